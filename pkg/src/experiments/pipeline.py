import logging
import time
from dataclasses import dataclass
from typing import Optional

import pandas as pd

from src.config import N_FOLDS, N_ITER
from src.evaluation.metrics import ConfusionMatrix, accuracy
from src.evaluation.reports import class_report
from src.models.knn import KnnClassifier, KnnHyperParams
from src.models.selection import HyperSpace, SearchResult, kfold_accuracy, random_search
from src.transform.dataset import Dataset

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    """
    Modelo treinado de um mapeamento e o seu relatorio de validacao.

    train_accuracy e a media k-fold no treino (A_t); validation_accuracy e
    a acuracia single-shot nos 30% de validacao (a_i).
    """

    mapping: str
    model: KnnClassifier
    hyperparams: KnnHyperParams
    search: Optional[SearchResult]
    train_accuracy: float
    validation_accuracy: float
    confusion: ConfusionMatrix
    report: pd.DataFrame
    train_seconds: float
    predict_seconds: float
    seed: int


def run_pipeline(
    mapping: str,
    dataset: Dataset,
    seed: int = 0,
    tune: bool = True,
    hyperparams: Optional[KnnHyperParams] = None,
    space: Optional[HyperSpace] = None,
    n_iter: int = N_ITER,
    folds: int = N_FOLDS,
    scale: bool = False,
    workers: int = 1
) -> PipelineResult:
    """
    Ajusta, treina e avalia o classificador de um mapeamento.

    Fluxo:
        1. Seleciona as razoes C do mapeamento (treino e validacao)
        2. Busca aleatoria de hiperparametros (ou usa os informados)
        3. Treina no split de treino
        4. Avalia no split de validacao: acuracia, matriz de confusao,
           metricas por classe

    Args:
        mapping: f1, f2 ou f3
        dataset: Dataset com particao
        seed: Semente das dobras e da busca
        tune: Se False, usa `hyperparams` (ou os padroes) sem busca
    """
    logger.info(f"Pipeline {mapping} (seed={seed}, tune={tune})")

    # 1. Features do mapeamento
    x_train = dataset.features(mapping, "train")
    y_train = dataset.labels("train")
    x_val = dataset.features(mapping, "validation")
    y_val = dataset.labels("validation")

    # 2. Hiperparametros
    search = None
    if tune:
        search = random_search(
            x_train, y_train,
            space=space, n_iter=n_iter, seed=seed, folds=folds,
            mapping=mapping, scale=scale, workers=workers,
        )
        hyperparams = search.best
        train_accuracy = search.best_score
    else:
        hyperparams = hyperparams or KnnHyperParams()
        train_accuracy = kfold_accuracy(
            x_train, y_train, hyperparams, folds=folds, seed=seed, mapping=mapping, scale=scale
        )

    # 3. Treino
    started = time.perf_counter()
    model = KnnClassifier(hyperparams, mapping=mapping, scale=scale).fit(x_train, y_train)
    train_seconds = time.perf_counter() - started

    # 4. Validacao
    started = time.perf_counter()
    predicted = model.predict(x_val)
    predict_seconds = time.perf_counter() - started

    confusion = ConfusionMatrix.from_predictions(predicted, y_val)
    validation_accuracy = accuracy(confusion)

    logger.info(
        f"{mapping}: {hyperparams} A_t={train_accuracy:.2f}% a_i={validation_accuracy:.2f}%"
    )

    return PipelineResult(
        mapping=mapping,
        model=model,
        hyperparams=hyperparams,
        search=search,
        train_accuracy=train_accuracy,
        validation_accuracy=validation_accuracy,
        confusion=confusion,
        report=class_report(confusion),
        train_seconds=train_seconds,
        predict_seconds=predict_seconds,
        seed=seed,
    )
