"""
Arvore de decisao CART (impureza de Gini), usada so como baseline do KNN.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.config import N_CLASSES, TREE_MAX_DEPTH, TREE_MIN_SAMPLES_SPLIT
from src.exceptions import DomainError, ModelStateError

logger = logging.getLogger(__name__)


@dataclass
class _Node:
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _gini(counts: np.ndarray) -> np.ndarray:
    """Gini de cada linha de contagens (linhas vazias valem 0)."""
    totals = counts.sum(axis=-1, keepdims=True)
    frac = np.divide(counts, totals, out=np.zeros_like(counts, dtype=float), where=totals > 0)
    return 1.0 - np.sum(frac ** 2, axis=-1)


def best_split(features: np.ndarray, labels: np.ndarray):
    """
    Melhor corte (feature, limiar, impureza ponderada) ou None.

    Empates ficam com a menor feature e, dentro dela, o menor limiar.
    """
    n = len(labels)
    onehot = np.eye(N_CLASSES)[labels]
    total = onehot.sum(axis=0)
    best = None

    for j in range(features.shape[1]):
        order = np.argsort(features[:, j], kind="stable")
        values = features[order, j]
        left_counts = np.cumsum(onehot[order], axis=0)[:-1]
        right_counts = total - left_counts

        # So corta onde o valor muda
        valid = values[1:] > values[:-1]
        if not np.any(valid):
            continue

        n_left = np.arange(1, n)
        impurity = (n_left * _gini(left_counts) + (n - n_left) * _gini(right_counts)) / n
        impurity = np.where(valid, impurity, np.inf)
        pos = int(np.argmin(impurity))

        if best is None or impurity[pos] < best[2]:
            threshold = (values[pos] + values[pos + 1]) / 2.0
            # Ponto medio de floats vizinhos pode arredondar para o valor de cima
            if not threshold < values[pos + 1]:
                threshold = values[pos]
            best = (j, float(threshold), float(impurity[pos]))

    return best


class DecisionTreeClassifier:
    """
    CART com profundidade maxima e tamanho minimo para dividir.

    Args:
        max_depth: Profundidade maxima (raiz = 0)
        min_samples_split: Amostras minimas num no para tentar dividir
    """

    def __init__(self, max_depth: int = TREE_MAX_DEPTH, min_samples_split: int = TREE_MIN_SAMPLES_SPLIT):
        if max_depth < 0:
            raise DomainError(f"max_depth deve ser >= 0, recebido {max_depth}")
        if min_samples_split < 2:
            raise DomainError(f"min_samples_split deve ser >= 2, recebido {min_samples_split}")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self._nodes: Optional[List[_Node]] = None
        self._n_features: Optional[int] = None

    def fit(self, features: np.ndarray, labels: np.ndarray) -> "DecisionTreeClassifier":
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=int)
        if features.ndim != 2 or len(features) == 0:
            raise DomainError(f"Treino com formato invalido: {features.shape}")
        if len(labels) != len(features):
            raise DomainError(f"{len(features)} amostras e {len(labels)} rotulos")

        self._n_features = features.shape[1]
        self._nodes = []
        self._grow(features, labels, depth=0)
        logger.debug(f"Arvore treinada: {len(self._nodes)} nos")
        return self

    def _grow(self, features: np.ndarray, labels: np.ndarray, depth: int) -> int:
        counts = np.bincount(labels, minlength=N_CLASSES).astype(float)
        index = len(self._nodes)
        node = _Node(counts=counts)
        self._nodes.append(node)

        pure = np.count_nonzero(counts) <= 1
        if pure or depth >= self.max_depth or len(labels) < self.min_samples_split:
            return index

        split = best_split(features, labels)
        if split is None:
            return index

        feature, threshold, _ = split
        goes_left = features[:, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.left = self._grow(features[goes_left], labels[goes_left], depth + 1)
        node.right = self._grow(features[~goes_left], labels[~goes_left], depth + 1)
        return index

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Fracao de cada classe na folha alcancada."""
        if self._nodes is None:
            raise ModelStateError("Arvore usada antes do fit")
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        queries = x[None, :] if single else x
        if queries.shape[1] != self._n_features:
            raise DomainError(f"Consulta com formato {x.shape}; esperado (m, {self._n_features})")

        proba = np.empty((len(queries), N_CLASSES))
        for i, row in enumerate(queries):
            node = self._nodes[0]
            while not node.is_leaf:
                node = self._nodes[node.left if row[node.feature] <= node.threshold else node.right]
            proba[i] = node.counts / node.counts.sum()

        return proba[0] if single else proba

    def predict(self, x: np.ndarray):
        proba = self.predict_proba(x)
        if proba.ndim == 1:
            return int(np.argmax(proba))
        return np.argmax(proba, axis=1)
