import logging
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.config import N_FOLDS, SHOW_PROGRESS, SWEEP_SIZES
from src.exceptions import DomainError
from src.extract.generator import generate
from src.load.dataset_store import write_dat, write_table
from src.models.knn import KnnClassifier, KnnHyperParams, single_shot_accuracy
from src.models.selection import cross_validate
from src.models.tree import DecisionTreeClassifier
from src.transform.dataset import ParameterRanges

logger = logging.getLogger(__name__)

Estimator = Literal["knn", "tree"]


def _factory(estimator: str, mapping: str):
    if estimator == "knn":
        return lambda: KnnClassifier(KnnHyperParams(), mapping=mapping)
    if estimator == "tree":
        return DecisionTreeClassifier
    raise DomainError(f"Estimador '{estimator}' nao reconhecido. Opcoes validas: ['knn', 'tree']")


def run_size_sweep(
    sizes: Sequence[int] = SWEEP_SIZES,
    mapping: str = "f1",
    seed: int = 0,
    estimator: Estimator = "knn",
    ranges: Optional[ParameterRanges] = None,
    folds: int = N_FOLDS,
    workers: int = 1,
    out_dir: Optional[Union[str, Path]] = None,
    progress: bool = SHOW_PROGRESS
) -> pd.DataFrame:
    """
    Acuracia k-fold (hiperparametros padrao) em funcao do tamanho do dataset.

    Para cada tamanho tambem ajusta o modelo no treino inteiro e mede a
    acuracia de uma rodada sobre a validacao (30%).

    Com a mesma semente, o dataset de tamanho n e prefixo do de tamanho
    maior (cada indice tem o seu sub-fluxo).

    Args:
        sizes: Tamanhos em ordem crescente
        mapping: f1, f2 ou f3
        seed: Semente da geracao e das dobras
        estimator: "knn" ou "tree" (baseline)
        out_dir: Se informado, grava size_sweep_<estimator>.csv e .dat

    Returns:
        DataFrame: n, mapping, estimator, accuracy, fold_std, fold_min, fold_max,
            validation_accuracy
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise DomainError("Lista de tamanhos vazia")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError(f"Tamanhos devem ser crescentes: {sizes}")

    make_model = _factory(estimator, mapping)

    rows = []
    for n in tqdm(sizes, desc=f"Varredura {estimator}", disable=not progress):
        dataset = generate(n, ranges=ranges, seed=seed, workers=workers, progress=False)
        train_x, train_y = dataset.features(mapping, "train"), dataset.labels("train")
        scores = cross_validate(
            train_x,
            train_y,
            make_model,
            folds=folds,
            seed=seed,
        )
        model = make_model().fit(train_x, train_y)
        validation = single_shot_accuracy(
            model, dataset.features(mapping, "validation"), dataset.labels("validation")
        )
        rows.append({
            "n": n,
            "mapping": mapping,
            "estimator": estimator,
            "accuracy": float(np.mean(scores)),
            "fold_std": float(np.std(scores)),
            "fold_min": float(np.min(scores)),
            "fold_max": float(np.max(scores)),
            "validation_accuracy": validation,
        })
        logger.info(
            f"n={n}: {estimator} k-fold {rows[-1]['accuracy']:.2f}%, validacao {validation:.2f}%"
        )

    table = pd.DataFrame(rows)

    if out_dir is not None:
        out_dir = Path(out_dir)
        write_table(table, out_dir / f"size_sweep_{estimator}.csv")
        write_dat(table[["n", "accuracy", "fold_std", "validation_accuracy"]], out_dir / f"size_sweep_{estimator}.dat")

    return table
