import logging
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.config import CLASS_EDGES, N_CLASSES
from src.exceptions import DomainError
from src.transform.dataset import FEATURE_COLUMNS, Dataset

logger = logging.getLogger(__name__)


def label_of(p_h: float) -> int:
    """
    Classe do intervalo de p_h.

    Intervalos fechados embaixo e abertos em cima; 1.0 entra na classe 3:
        [0, .25) -> 0, [.25, .5) -> 1, [.5, .75) -> 2, [.75, 1] -> 3

    Raises:
        DomainError: se p_h estiver fora de [0, 1]
    """
    if not 0.0 <= p_h <= 1.0:
        raise DomainError(f"p_h fora de [0, 1]: {p_h}")

    for label, edge in enumerate(CLASS_EDGES):
        if p_h < edge:
            return label
    return N_CLASSES - 1


def zscore_fit(features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Media e desvio por coluna para padronizacao.

    Colunas constantes recebem desvio 1 (ficam apenas centradas).
    """
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def zscore_apply(features: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (features - mean) / std


def class_histograms(
    dataset: Dataset,
    bins: int = 40,
    value_range: Optional[Tuple[float, float]] = None
) -> pd.DataFrame:
    """
    Histograma de cada razao C^(i) dentro de cada classe.

    Mesmas bordas para todas as classes e razoes, para que as distribuicoes
    sejam comparaveis.

    Returns:
        DataFrame longo: label, feature, bin_left, bin_right, count
    """
    frame = dataset.to_frame()
    if frame.empty:
        return pd.DataFrame(columns=["label", "feature", "bin_left", "bin_right", "count"])

    if value_range is None:
        values = frame[FEATURE_COLUMNS].to_numpy()
        value_range = (float(values.min()), float(values.max()))
    edges = np.linspace(value_range[0], value_range[1], bins + 1)

    rows = []
    for label in range(N_CLASSES):
        subset = frame[frame["label"] == label]
        for feature in FEATURE_COLUMNS:
            counts, _ = np.histogram(subset[feature].to_numpy(), bins=edges)
            for left, right, count in zip(edges[:-1], edges[1:], counts):
                rows.append({
                    "label": label,
                    "feature": feature,
                    "bin_left": left,
                    "bin_right": right,
                    "count": int(count),
                })

    logger.info(f"Histogramas por classe: {bins} bins em {value_range}")
    return pd.DataFrame(rows)
