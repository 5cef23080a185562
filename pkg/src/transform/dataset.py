import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src import __version__
from src.config import ENGINE_DEFAULTS, MAPPINGS, PARAMETER_RANGES, TRAIN_FRACTION
from src.engine.model import VARIED_FIELDS, EngineParams
from src.exceptions import DomainError

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = ["c1", "c2", "c3", "c4"]
CSV_COLUMNS = FEATURE_COLUMNS + ["label"] + list(VARIED_FIELDS) + ["split"]

Split = Literal["train", "validation"]

Interval = Tuple[float, float]


class ParameterRanges(BaseModel):
    """Intervalos de amostragem uniforme dos parametros variados."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t_c: Interval = PARAMETER_RANGES["t_c"]
    t_h: Interval = PARAMETER_RANGES["t_h"]
    t_l: Interval = PARAMETER_RANGES["t_l"]
    p_c: Interval = PARAMETER_RANGES["p_c"]
    p_h: Interval = PARAMETER_RANGES["p_h"]

    @model_validator(mode="after")
    def _check_bounds(self) -> "ParameterRanges":
        for name in VARIED_FIELDS:
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"Intervalo invertido para {name}: ({lo}, {hi})")
            if name.startswith("t_") and lo <= 0:
                raise ValueError(f"Temperatura {name} deve ser positiva: ({lo}, {hi})")
            if name.startswith("p_") and not (0.0 <= lo and hi <= 1.0):
                raise ValueError(f"Intervalo de {name} fora de [0, 1]: ({lo}, {hi})")
        return self


class DatasetMeta(BaseModel):
    """Proveniencia do dataset (vai para o sidecar .meta.json)."""

    model_config = ConfigDict(extra="forbid")

    seed: Optional[int]
    n: int
    ranges: ParameterRanges = Field(default_factory=ParameterRanges)
    fixed_params: dict = Field(default_factory=lambda: dict(ENGINE_DEFAULTS))
    train_fraction: float = TRAIN_FRACTION
    degenerate_redraws: int = 0
    generated_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    code_version: str = __version__


@dataclass(frozen=True)
class LabeledSample:
    """Razoes C^(1..4), classe de p_h e os parametros de origem."""

    features: Tuple[float, float, float, float]
    label: int
    params: EngineParams


@dataclass
class Dataset:
    """
    Amostras rotuladas com particao treino/validacao.

    `train` e `validation` guardam indices em `samples`, disjuntos e
    cobrindo todas as amostras.
    """

    samples: List[LabeledSample]
    train: Tuple[int, ...]
    validation: Tuple[int, ...]
    meta: DatasetMeta = field(default_factory=lambda: DatasetMeta(seed=0, n=0))

    def __post_init__(self):
        train, validation = set(self.train), set(self.validation)
        if train & validation:
            raise DomainError("Particao invalida: amostras em treino e validacao")
        if train | validation != set(range(len(self.samples))):
            raise DomainError("Particao invalida: nao cobre todas as amostras")

    def __len__(self) -> int:
        return len(self.samples)

    def _indices(self, split: Optional[Split]) -> Tuple[int, ...]:
        if split is None:
            return tuple(range(len(self.samples)))
        if split == "train":
            return self.train
        if split == "validation":
            return self.validation
        raise DomainError(f"Particao '{split}' nao reconhecida. Opcoes validas: ['train', 'validation']")

    def features(self, mapping: str = "f1", split: Optional[Split] = None) -> np.ndarray:
        """Matriz N x d com as razoes usadas pelo mapeamento."""
        columns = [i - 1 for i in feature_subset(mapping)]
        idx = self._indices(split)
        if not idx:
            return np.empty((0, len(columns)))
        matrix = np.array([self.samples[i].features for i in idx], dtype=float)
        return matrix[:, columns]

    def labels(self, split: Optional[Split] = None) -> np.ndarray:
        idx = self._indices(split)
        return np.array([self.samples[i].label for i in idx], dtype=int)

    def to_frame(self) -> pd.DataFrame:
        """Uma linha por amostra, na ordem do indice, com o esquema do CSV."""
        train = set(self.train)
        rows = []
        for i, sample in enumerate(self.samples):
            row = dict(zip(FEATURE_COLUMNS, sample.features))
            row["label"] = sample.label
            for name in VARIED_FIELDS:
                row[name] = getattr(sample.params, name)
            row["split"] = "train" if i in train else "validation"
            rows.append(row)
        return pd.DataFrame(rows, columns=CSV_COLUMNS)


def feature_subset(mapping: str) -> Tuple[int, ...]:
    """Indices (base 1) das razoes C usadas por f1, f2 ou f3."""
    if mapping not in MAPPINGS:
        raise DomainError(
            f"Mapeamento '{mapping}' nao reconhecido. Opcoes validas: {list(MAPPINGS)}"
        )
    return MAPPINGS[mapping]


def split_indices(n: int, train_fraction: float, rng: np.random.Generator) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Particao embaralhada: os primeiros round(f n) indices vao para treino."""
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(f"Fracao de treino deve estar em (0, 1), recebida {train_fraction}")
    order = rng.permutation(n)
    n_train = int(round(train_fraction * n))
    train = tuple(sorted(int(i) for i in order[:n_train]))
    validation = tuple(sorted(int(i) for i in order[n_train:]))
    return train, validation
