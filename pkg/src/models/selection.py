"""
Validacao cruzada k-fold e busca aleatoria de hiperparametros do KNN.

As dobras sao embaralhadas com o sub-fluxo (seed, FOLD_STREAM) e os
candidatos com (seed, SEARCH_STREAM): mesma semente, mesmas dobras para
todos os candidatos e mesma trajetoria de busca.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.config import K_RANGE, METRICS, N_FOLDS, N_ITER, WEIGHTINGS
from src.exceptions import DomainError
from src.models.knn import KnnClassifier, KnnHyperParams, percent_correct
from src.utils.seeding import substream

logger = logging.getLogger(__name__)

FOLD_STREAM = 0
SEARCH_STREAM = 1


class HyperSpace(BaseModel):
    """Espaco de busca: k em k_range (inclusivo), pesos e metricas."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k_range: Tuple[int, int] = K_RANGE
    weightings: Tuple[str, ...] = WEIGHTINGS
    metrics: Tuple[str, ...] = METRICS

    @model_validator(mode="after")
    def _check_not_empty(self) -> "HyperSpace":
        lo, hi = self.k_range
        if lo < 1 or hi < lo:
            raise ValueError(f"k_range invalido: {self.k_range}")
        if not self.weightings or not self.metrics:
            raise ValueError("weightings e metrics nao podem ser vazios")
        for w in self.weightings:
            if w not in WEIGHTINGS:
                raise ValueError(f"Peso '{w}' nao reconhecido. Opcoes validas: {list(WEIGHTINGS)}")
        for m in self.metrics:
            if m not in METRICS:
                raise ValueError(f"Metrica '{m}' nao reconhecida. Opcoes validas: {list(METRICS)}")
        return self

    def candidates(self) -> List[KnnHyperParams]:
        """Todas as combinacoes em ordem canonica (k, peso, metrica)."""
        lo, hi = self.k_range
        weightings = sorted(self.weightings, key=WEIGHTINGS.index)
        metrics = sorted(self.metrics, key=METRICS.index)
        return [
            KnnHyperParams(k=k, weighting=w, metric=m)
            for k, w, m in product(range(lo, hi + 1), weightings, metrics)
        ]

    @property
    def size(self) -> int:
        lo, hi = self.k_range
        return (hi - lo + 1) * len(self.weightings) * len(self.metrics)


@dataclass(frozen=True)
class Trial:
    hyperparams: KnnHyperParams
    score: float
    fold_scores: Tuple[float, ...]


@dataclass(frozen=True)
class SearchResult:
    """Melhor candidato e a trajetoria completa, na ordem sorteada."""

    best: KnnHyperParams
    best_score: float
    trials: Tuple[Trial, ...]


def kfold_indices(n: int, folds: int, rng: np.random.Generator) -> List[np.ndarray]:
    """
    Dobras contiguas de uma permutacao embaralhada.

    Raises:
        DomainError: folds < 2 ou menos amostras que dobras
    """
    if folds < 2:
        raise DomainError(f"folds deve ser >= 2, recebido {folds}")
    if n < folds:
        raise DomainError(f"{n} amostras nao preenchem {folds} dobras")
    return np.array_split(rng.permutation(n), folds)


def cross_validate(
    features: np.ndarray,
    labels: np.ndarray,
    make_model: Callable[[], object],
    folds: int = N_FOLDS,
    seed: int = 0
) -> List[float]:
    """
    Acuracia (%) de cada dobra: treina nas outras folds-1 e avalia nela.

    Args:
        features: Matriz N x d
        labels: Rotulos
        make_model: Fabrica de modelos novos com fit/predict
        folds: Numero de dobras
        seed: Semente das dobras
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(features) != len(labels):
        raise DomainError(f"{len(features)} amostras e {len(labels)} rotulos")

    splits = kfold_indices(len(labels), folds, substream(seed, FOLD_STREAM))
    scores = []
    for i, held_out in enumerate(splits):
        train = np.sort(np.concatenate([s for j, s in enumerate(splits) if j != i]))
        model = make_model().fit(features[train], labels[train])
        scores.append(percent_correct(model.predict(features[held_out]), labels[held_out]))
    return scores


class _KnnFactory:
    """Fabrica serializavel (para ProcessPoolExecutor)."""

    def __init__(self, hyperparams: KnnHyperParams, mapping: str, scale: bool):
        self.hyperparams = hyperparams
        self.mapping = mapping
        self.scale = scale

    def __call__(self) -> KnnClassifier:
        return KnnClassifier(self.hyperparams, mapping=self.mapping, scale=self.scale)


def kfold_accuracy(
    features: np.ndarray,
    labels: np.ndarray,
    hyperparams: Optional[KnnHyperParams] = None,
    folds: int = N_FOLDS,
    seed: int = 0,
    mapping: str = "f1",
    scale: bool = False
) -> float:
    """Media das acuracias single-shot das dobras."""
    factory = _KnnFactory(hyperparams or KnnHyperParams(), mapping, scale)
    return float(np.mean(cross_validate(features, labels, factory, folds, seed)))


def _score_candidate(task) -> Trial:
    features, labels, hyperparams, folds, seed, mapping, scale = task
    factory = _KnnFactory(hyperparams, mapping, scale)
    fold_scores = cross_validate(features, labels, factory, folds, seed)
    return Trial(hyperparams=hyperparams, score=float(np.mean(fold_scores)), fold_scores=tuple(fold_scores))


def _canonical_key(trial: Trial) -> tuple:
    hp = trial.hyperparams
    return (-trial.score, hp.k, WEIGHTINGS.index(hp.weighting), METRICS.index(hp.metric))


def random_search(
    features: np.ndarray,
    labels: np.ndarray,
    space: Optional[HyperSpace] = None,
    n_iter: int = N_ITER,
    seed: int = 0,
    folds: int = N_FOLDS,
    mapping: str = "f1",
    scale: bool = False,
    workers: int = 1
) -> SearchResult:
    """
    Sorteia n_iter combinacoes sem reposicao e fica com a de maior acuracia k-fold.

    Empate: menor k, depois uniform antes de distance, depois euclidean
    antes de manhattan.

    Raises:
        DomainError: n_iter < 1
    """
    space = space or HyperSpace()
    if n_iter < 1:
        raise DomainError(f"n_iter deve ser >= 1, recebido {n_iter}")

    candidates = space.candidates()
    # k maior que o treino de uma dobra nao e avaliavel
    smallest_train = len(labels) - int(np.ceil(len(labels) / folds))
    candidates = [c for c in candidates if c.k <= smallest_train]
    if not candidates:
        raise DomainError(f"Nenhum k de {space.k_range} cabe em {smallest_train} amostras de treino")

    if n_iter > len(candidates):
        logger.warning(f"n_iter={n_iter} maior que o espaco ({len(candidates)}); limitando")
        n_iter = len(candidates)

    rng = substream(seed, SEARCH_STREAM)
    picks = rng.choice(len(candidates), size=n_iter, replace=False)
    chosen = [candidates[int(i)] for i in picks]

    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    tasks = [(features, labels, hp, folds, seed, mapping, scale) for hp in chosen]

    logger.info(f"Busca aleatoria: {n_iter} candidatos, {folds} dobras, workers={workers}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(_score_candidate, tasks))
    else:
        trials = [_score_candidate(task) for task in tasks]

    for trial in trials:
        logger.debug(f"{trial.hyperparams} -> {trial.score:.2f}%")

    best = min(trials, key=_canonical_key)
    logger.info(f"Melhor candidato: {best.hyperparams} ({best.score:.2f}%)")
    return SearchResult(best=best.hyperparams, best_score=best.score, trials=tuple(trials))
