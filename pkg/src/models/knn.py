"""
Classificador KNN multi-classe, implementado sobre numpy.

Busca exaustiva (sem indice espacial): as distancias de um lote de
consultas a todo o treino sao acumuladas dimensao a dimensao.

Desempates:
    - vizinhos empatados na k-esima distancia: menor indice de treino
    - classes empatadas no voto: menor indice de classe

Uso:
    model = KnnClassifier(KnnHyperParams(k=15, weighting="distance"), mapping="f1")
    model.fit(ds.features("f1", "train"), ds.labels("train"))
    proba = model.predict_proba(ds.features("f1", "validation"))
"""

import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import KNN_BATCH_SIZE, KNN_DEFAULTS, N_CLASSES
from src.exceptions import DomainError, ModelStateError, ParseError
from src.transform.dataset import feature_subset
from src.transform.labels import zscore_apply, zscore_fit

logger = logging.getLogger(__name__)

MODEL_SCHEMA = "qhe-knn/1"

Weighting = Literal["uniform", "distance"]
Metric = Literal["euclidean", "manhattan"]


class KnnHyperParams(BaseModel):
    """Numero de vizinhos, peso do voto e metrica de distancia."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k: int = Field(KNN_DEFAULTS["k"], ge=1)
    weighting: Weighting = KNN_DEFAULTS["weighting"]
    metric: Metric = KNN_DEFAULTS["metric"]


class _KnnDocument(BaseModel):
    """Formato JSON do modelo treinado (instancias inclusas)."""

    model_config = ConfigDict(extra="forbid")

    schema_tag: str = Field(alias="schema")
    hyperparams: KnnHyperParams
    mapping: str
    feature_subset: Tuple[int, ...]
    scale: bool
    mean: Optional[List[float]] = None
    std: Optional[List[float]] = None
    train_features: List[List[float]]
    train_labels: List[int]


def pairwise_distances(queries: np.ndarray, train: np.ndarray, metric: Metric) -> np.ndarray:
    """Matriz (m, N) de distancias entre consultas e pontos de treino."""
    acc = np.zeros((queries.shape[0], train.shape[0]))
    for j in range(queries.shape[1]):
        diff = queries[:, j, None] - train[None, :, j]
        if metric == "euclidean":
            acc += diff * diff
        else:
            acc += np.abs(diff)
    return np.sqrt(acc) if metric == "euclidean" else acc


def nearest_mask(distances: np.ndarray, k: int) -> np.ndarray:
    """
    Mascara booleana com exatamente k vizinhos por linha.

    Todos os pontos abaixo da k-esima distancia entram; entre os empatados
    nela entram os de menor indice ate completar k.
    """
    kth = np.partition(distances, k - 1, axis=1)[:, k - 1, None]
    closer = distances < kth
    tied = distances == kth
    missing = k - closer.sum(axis=1, keepdims=True)
    return closer | (tied & (np.cumsum(tied, axis=1) <= missing))


class KnnClassifier:
    """
    KNN com probabilidades por classe.

    Imutavel depois do fit; pode ser consultado de varias threads.

    Args:
        hyperparams: k, weighting, metric; padrao KNN_DEFAULTS
        mapping: f1, f2 ou f3 (quais razoes C entram)
        scale: Padroniza (z-score) com media/desvio do treino
        batch_size: Consultas por lote no calculo de distancias
    """

    def __init__(
        self,
        hyperparams: Optional[KnnHyperParams] = None,
        mapping: str = "f1",
        scale: bool = False,
        batch_size: int = KNN_BATCH_SIZE
    ):
        self.hyperparams = hyperparams or KnnHyperParams()
        self.mapping = mapping
        self.feature_subset = feature_subset(mapping)
        self.scale = scale
        self.batch_size = max(1, int(batch_size))

        self._train_features: Optional[np.ndarray] = None
        self._train_labels: Optional[np.ndarray] = None
        self._scaled_train: Optional[np.ndarray] = None
        self._mean: Optional[np.ndarray] = None
        self._std: Optional[np.ndarray] = None

    @property
    def n_features(self) -> int:
        return len(self.feature_subset)

    @property
    def is_fitted(self) -> bool:
        return self._train_features is not None

    def fit(self, features: np.ndarray, labels: np.ndarray) -> "KnnClassifier":
        """
        Guarda as instancias de treino.

        Raises:
            DomainError: dimensoes incompativeis, k > N ou rotulos fora de 0..3
        """
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=int)

        if features.ndim != 2 or features.shape[1] != self.n_features:
            raise DomainError(
                f"Treino com formato {features.shape}; mapeamento {self.mapping} "
                f"espera {self.n_features} colunas"
            )
        if len(labels) != len(features):
            raise DomainError(f"{len(features)} amostras e {len(labels)} rotulos")
        if not 1 <= self.hyperparams.k <= len(features):
            raise DomainError(f"k={self.hyperparams.k} fora de 1..{len(features)}")
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise DomainError(f"Rotulos fora de 0..{N_CLASSES - 1}: {np.unique(labels)}")

        self._train_features = features.copy()
        self._train_labels = labels.copy()
        self._train_features.setflags(write=False)
        self._train_labels.setflags(write=False)

        if self.scale:
            self._mean, self._std = zscore_fit(features)
            self._scaled_train = zscore_apply(features, self._mean, self._std)
        else:
            self._scaled_train = self._train_features

        logger.debug(f"KNN treinado: N={len(features)}, {self.hyperparams}")
        return self

    def _check_queries(self, x: np.ndarray) -> np.ndarray:
        if not self.is_fitted:
            raise ModelStateError("Modelo KNN usado antes do fit")
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DomainError(
                f"Consulta com formato {x.shape}; esperado (m, {self.n_features})"
            )
        if self.scale:
            return zscore_apply(x, self._mean, self._std)
        return x

    def _vote_mass(self, queries: np.ndarray) -> np.ndarray:
        hp = self.hyperparams
        onehot = np.eye(N_CLASSES)[self._train_labels]

        distances = pairwise_distances(queries, self._scaled_train, hp.metric)
        chosen = nearest_mask(distances, hp.k)

        if hp.weighting == "uniform":
            return chosen.astype(float) @ onehot

        # Coincidencia exata (d = 0) leva o voto inteiro
        exact = chosen & (distances == 0.0)
        has_exact = exact.any(axis=1, keepdims=True)
        with np.errstate(divide="ignore"):
            inverse = np.where(chosen & ~has_exact, 1.0 / distances, 0.0)
        weights = np.where(has_exact, exact.astype(float), inverse)
        return weights @ onehot

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """
        Massa de voto normalizada por classe.

        Args:
            x: Vetor (d,) ou matriz (m, d)

        Returns:
            (4,) ou (m, 4), cada linha somando 1

        Raises:
            ModelStateError: se chamado antes do fit
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        queries = self._check_queries(x[None, :] if single else x)

        proba = np.empty((len(queries), N_CLASSES))
        for start in range(0, len(queries), self.batch_size):
            batch = slice(start, start + self.batch_size)
            mass = self._vote_mass(queries[batch])
            proba[batch] = mass / mass.sum(axis=1, keepdims=True)

        return proba[0] if single else proba

    def predict(self, x: np.ndarray):
        """Classe de maior probabilidade; empate vai para a menor classe."""
        proba = self.predict_proba(x)
        if proba.ndim == 1:
            return int(np.argmax(proba))
        return np.argmax(proba, axis=1)

    def score(self, features: np.ndarray, labels: np.ndarray) -> float:
        return single_shot_accuracy(self, features, labels)

    def to_json(self) -> str:
        if not self.is_fitted:
            raise ModelStateError("Nada para serializar: modelo KNN sem fit")
        doc = _KnnDocument(
            schema=MODEL_SCHEMA,
            hyperparams=self.hyperparams,
            mapping=self.mapping,
            feature_subset=self.feature_subset,
            scale=self.scale,
            mean=None if self._mean is None else self._mean.tolist(),
            std=None if self._std is None else self._std.tolist(),
            train_features=self._train_features.tolist(),
            train_labels=self._train_labels.tolist(),
        )
        return doc.model_dump_json(by_alias=True)

    @classmethod
    def from_json(cls, text: str) -> "KnnClassifier":
        """
        Reconstroi um modelo gravado por to_json.

        Raises:
            ParseError: JSON invalido ou schema diferente de qhe-knn/1
        """
        try:
            doc = _KnnDocument.model_validate_json(text)
        except ValidationError as e:
            raise ParseError(f"Modelo KNN invalido: {e}") from e

        if doc.schema_tag != MODEL_SCHEMA:
            raise ParseError(
                f"Schema '{doc.schema_tag}' nao reconhecido. Opcoes validas: ['{MODEL_SCHEMA}']"
            )
        if tuple(doc.feature_subset) != feature_subset(doc.mapping):
            raise ParseError(
                f"feature_subset {doc.feature_subset} nao corresponde ao mapeamento {doc.mapping}"
            )

        features = np.array(doc.train_features, dtype=float).reshape(-1, len(doc.feature_subset))
        model = cls(doc.hyperparams, mapping=doc.mapping, scale=doc.scale)
        model.fit(features, np.array(doc.train_labels, dtype=int))
        return model


def single_shot_accuracy(model, features: np.ndarray, labels: np.ndarray) -> float:
    """
    Porcentagem de acertos exatos numa rodada de avaliacao.

    Raises:
        DomainError: conjunto vazio ou tamanhos diferentes
    """
    labels = np.asarray(labels, dtype=int)
    if len(features) != len(labels):
        raise DomainError(f"{len(features)} amostras e {len(labels)} rotulos")
    if len(labels) == 0:
        raise DomainError("Conjunto de avaliacao vazio")
    return percent_correct(model.predict(np.asarray(features, dtype=float)), labels)


def percent_correct(predicted: np.ndarray, labels: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if len(predicted) != len(labels):
        raise DomainError(f"{len(predicted)} predicoes e {len(labels)} rotulos")
    if len(labels) == 0:
        raise DomainError("Conjunto de avaliacao vazio")
    return float(np.mean(predicted == labels) * 100.0)
