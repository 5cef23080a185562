"""
Matriz de confusao e metricas por classe.

Convencao: linhas = classe prevista, colunas = classe verdadeira.
As formulas seguem essa convencao ao pe da letra:
    p_k = chi_kk / soma da coluna k
    R_k = chi_kk / soma da linha k
(nomes trocados em relacao ao uso comum com linhas = verdadeiro.)

Metrica sem denominador nao vira zero: volta Metric(nan, defined=False).
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.config import N_CLASSES
from src.exceptions import DomainError


@dataclass(frozen=True)
class Metric:
    value: float
    defined: bool = True

    @classmethod
    def undefined(cls) -> "Metric":
        return cls(value=math.nan, defined=False)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Contagens chi[previsto, verdadeiro], inteiras e nao negativas."""

    chi: np.ndarray

    def __post_init__(self):
        chi = np.asarray(self.chi)
        if chi.ndim != 2 or chi.shape[0] != chi.shape[1]:
            raise DomainError(f"Matriz de confusao deve ser quadrada, recebida {chi.shape}")
        if np.any(chi < 0):
            raise DomainError("Matriz de confusao com entradas negativas")
        chi = chi.astype(np.int64)
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @classmethod
    def from_predictions(
        cls,
        predicted: np.ndarray,
        true: np.ndarray,
        n_classes: int = N_CLASSES
    ) -> "ConfusionMatrix":
        predicted = np.asarray(predicted, dtype=int)
        true = np.asarray(true, dtype=int)
        if predicted.shape != true.shape:
            raise DomainError(f"{len(predicted)} predicoes e {len(true)} rotulos")
        for values in (predicted, true):
            if values.size and (values.min() < 0 or values.max() >= n_classes):
                raise DomainError(f"Classes fora de 0..{n_classes - 1}: {np.unique(values)}")

        chi = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(chi, (predicted, true), 1)
        return cls(chi)

    @property
    def n_classes(self) -> int:
        return self.chi.shape[0]

    @property
    def total(self) -> int:
        return int(self.chi.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.chi, other.chi)


ChiLike = Union[ConfusionMatrix, np.ndarray]


def as_counts(chi: ChiLike) -> np.ndarray:
    return chi.chi if isinstance(chi, ConfusionMatrix) else ConfusionMatrix(np.asarray(chi)).chi


def _check_class(chi: np.ndarray, k: int) -> None:
    if not 0 <= k < chi.shape[0]:
        raise DomainError(f"Classe {k} fora de 0..{chi.shape[0] - 1}")


def accuracy(chi: ChiLike) -> float:
    """
    Traco sobre o total, em porcentagem.

    Raises:
        DomainError: matriz vazia
    """
    counts = as_counts(chi)
    total = counts.sum()
    if total == 0:
        raise DomainError("Matriz de confusao vazia")
    return float(np.trace(counts) / total * 100.0)


def precision_recall(chi: ChiLike, k: int) -> Tuple[Metric, Metric]:
    """(p_k, R_k) como fracoes em [0, 1]."""
    counts = as_counts(chi)
    _check_class(counts, k)
    hit = counts[k, k]
    column, row = counts[:, k].sum(), counts[k, :].sum()
    p = Metric(float(hit / column)) if column > 0 else Metric.undefined()
    r = Metric(float(hit / row)) if row > 0 else Metric.undefined()
    return p, r


def f_score(chi: ChiLike, k: int) -> Metric:
    """F_k = 2 p R / (p + R), em porcentagem."""
    p, r = precision_recall(chi, k)
    if not (p.defined and r.defined) or p.value + r.value == 0:
        return Metric.undefined()
    return Metric(2.0 * p.value * r.value / (p.value + r.value) * 100.0)


def one_vs_rest(chi: ChiLike, k: int) -> Tuple[int, int, int, int]:
    """(t+, f+, f-, t-) da classe k."""
    counts = as_counts(chi)
    _check_class(counts, k)
    t_pos = int(counts[k, k])
    f_pos = int(counts[:, k].sum() - t_pos)
    f_neg = int(counts[k, :].sum() - t_pos)
    t_neg = int(counts.sum() - counts[k, :].sum() - counts[:, k].sum() + t_pos)
    return t_pos, f_pos, f_neg, t_neg


def mcc(chi: ChiLike, k: int) -> Metric:
    """Coeficiente de Matthews da classe k, em porcentagem."""
    t_pos, f_pos, f_neg, t_neg = one_vs_rest(chi, k)
    margins = (t_pos + f_pos, t_pos + f_neg, t_neg + f_pos, t_neg + f_neg)
    if any(m == 0 for m in margins):
        return Metric.undefined()
    numerator = t_pos * t_neg - f_pos * f_neg
    denominator = math.sqrt(math.prod(float(m) for m in margins))
    return Metric(numerator / denominator * 100.0)
