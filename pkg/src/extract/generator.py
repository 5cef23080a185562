"""
Geracao do dataset rotulado a partir do modelo fisico.

Cada indice i sorteia seus parametros do sub-fluxo (seed, i, tentativa),
entao o resultado nao depende da ordem nem do numero de processos.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.config import (
    ENGINE_DEFAULTS,
    MAX_DEGENERATE_FRACTION,
    MAX_REDRAWS_PER_INDEX,
    SHOW_PROGRESS,
    TRAIN_FRACTION,
)
from src.engine.counting_stats import cumulant_ratios
from src.engine.model import VARIED_FIELDS, EngineParams
from src.exceptions import DegenerateSampleError, DomainError, GenerationQualityError
from src.transform.dataset import Dataset, DatasetMeta, LabeledSample, ParameterRanges, split_indices
from src.transform.labels import label_of
from src.utils.seeding import substream

logger = logging.getLogger(__name__)


def draw_params(
    ranges: ParameterRanges,
    fixed_params: Dict[str, float],
    rng: np.random.Generator,
    p_h: Optional[float] = None
) -> EngineParams:
    """Sorteio uniforme e independente de cada parametro variado."""
    values = {}
    for name in VARIED_FIELDS:
        lo, hi = getattr(ranges, name)
        values[name] = float(rng.uniform(lo, hi))
    if p_h is not None:
        values["p_h"] = float(p_h)
    return EngineParams(**fixed_params, **values)


def _sample_index(
    task: Tuple[int, int, ParameterRanges, Dict[str, float], Optional[float]]
) -> Tuple[LabeledSample, int]:
    """Amostra valida do indice i e quantos re-sorteios foram precisos."""
    index, seed, ranges, fixed_params, p_h = task

    for attempt in range(MAX_REDRAWS_PER_INDEX + 1):
        params = draw_params(ranges, fixed_params, substream(seed, index, attempt), p_h)
        try:
            ratios = cumulant_ratios(params)
        except DegenerateSampleError as e:
            logger.debug(f"Amostra {index} tentativa {attempt} degenerada: {e}")
            continue
        if not np.all(np.isfinite(ratios.c)):
            logger.debug(f"Amostra {index} tentativa {attempt} com razao nao finita")
            continue

        sample = LabeledSample(features=ratios.c, label=label_of(params.p_h), params=params)
        return sample, attempt

    raise GenerationQualityError(
        f"Indice {index}: {MAX_REDRAWS_PER_INDEX} re-sorteios degenerados seguidos"
    )


def generate(
    n: int,
    ranges: Optional[ParameterRanges] = None,
    seed: int = 0,
    p_h_values: Optional[Sequence[float]] = None,
    workers: int = 1,
    fixed_params: Optional[Dict[str, float]] = None,
    train_fraction: float = TRAIN_FRACTION,
    progress: bool = SHOW_PROGRESS
) -> Dataset:
    """
    Gera n amostras rotuladas com particao treino/validacao.

    Args:
        n: Numero de amostras (>= 1)
        ranges: Faixas de amostragem; padrao ParameterRanges()
        seed: Semente da geracao e da particao
        p_h_values: Valores de p_h impostos, repetidos ciclicamente por indice
        workers: Processos paralelos; o resultado e identico ao serial
        fixed_params: Parametros nao sorteados; padrao ENGINE_DEFAULTS
        train_fraction: Fracao de treino
        progress: Mostra barra de progresso

    Returns:
        Dataset com meta de proveniencia

    Raises:
        DomainError: se n < 1 ou p_h_values fora de [0, 1]
        GenerationQualityError: se mais de 10% dos sorteios forem degenerados
    """
    if n < 1:
        raise DomainError(f"n deve ser >= 1, recebido {n}")
    if seed < 0:
        raise DomainError(f"Semente deve ser nao negativa, recebida {seed}")

    ranges = ranges or ParameterRanges()
    fixed_params = dict(fixed_params or ENGINE_DEFAULTS)
    unknown = set(fixed_params) - set(ENGINE_DEFAULTS)
    if unknown:
        raise DomainError(
            f"Parametros fixos nao reconhecidos: {sorted(unknown)}. "
            f"Opcoes validas: {list(ENGINE_DEFAULTS)}"
        )

    if p_h_values is not None:
        p_h_values = [float(p) for p in p_h_values]
        if not p_h_values:
            raise DomainError("p_h_values nao pode ser vazio")
        bad = [p for p in p_h_values if not 0.0 <= p <= 1.0]
        if bad:
            raise DomainError(f"Valores de p_h fora de [0, 1]: {bad}")

    tasks = [
        (i, seed, ranges, fixed_params, None if p_h_values is None else p_h_values[i % len(p_h_values)])
        for i in range(n)
    ]

    logger.info(f"Gerando {n} amostras (seed={seed}, workers={workers})")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(
                pool.map(_sample_index, tasks, chunksize=max(1, n // (workers * 8))),
                total=n, desc="Gerando amostras", disable=not progress,
            ))
    else:
        results = [
            _sample_index(task)
            for task in tqdm(tasks, desc="Gerando amostras", disable=not progress)
        ]

    samples = [sample for sample, _ in results]
    redraws = sum(attempts for _, attempts in results)

    # Fracao degenerada entre todos os sorteios feitos
    degenerate_fraction = redraws / (n + redraws)
    if redraws:
        logger.warning(f"{redraws} amostras degeneradas re-sorteadas ({degenerate_fraction:.2%})")
    if degenerate_fraction > MAX_DEGENERATE_FRACTION:
        raise GenerationQualityError(
            f"Fracao degenerada {degenerate_fraction:.2%} acima de "
            f"{MAX_DEGENERATE_FRACTION:.0%}; verifique as faixas {ranges.model_dump()}"
        )

    train, validation = split_indices(n, train_fraction, substream(seed))

    meta = DatasetMeta(
        seed=seed,
        n=n,
        ranges=ranges,
        fixed_params=samples[0].params.fixed_fields(),
        train_fraction=train_fraction,
        degenerate_redraws=redraws,
    )

    logger.info(f"Dataset pronto: {len(train)} treino / {len(validation)} validacao")
    return Dataset(samples=samples, train=train, validation=validation, meta=meta)
