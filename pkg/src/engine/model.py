"""
Modelo do motor termico quantico de quatro niveis.

Vetor densidade no espaco de Liouville, nesta ordem:
    |rho> = {rho_11, rho_22, rho_bb, rho_aa, Re(rho_12)}

O gerador torcido L(lambda) e uma matriz real 5x5. Apenas as duas entradas
da cavidade dependem do campo de contagem:
    (bb, aa): g^2 n_l e^{-lambda}    emissao a -> b, peso -1
    (aa, bb): g^2 (1+n_l) e^{+lambda}  absorcao b -> a, peso +1

Convencoes de gap para as ocupacoes de Bose-Einstein:
    n_h: E_a - E_1 a T_h
    n_c: E_b - E_1 a T_c
    n_l: E_a - E_b a T_l
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import ENGINE_DEFAULTS, REFERENCE_TEMPERATURES
from src.exceptions import DomainError

logger = logging.getLogger(__name__)

# Indices no vetor densidade
IDX_1, IDX_2, IDX_B, IDX_A, IDX_COH = 0, 1, 2, 3, 4

# Vetor esquerdo nulo (conservacao das populacoes)
TRACE_VECTOR = np.array([1.0, 1.0, 1.0, 1.0, 0.0])

# Campos sorteados na geracao de dados; o resto fica fixo
VARIED_FIELDS = ("t_c", "t_h", "t_l", "p_c", "p_h")


class EngineParams(BaseModel):
    """
    Constantes fisicas do motor e dos banhos.

    Imutavel. Serializa para um objeto JSON plano com as mesmas chaves.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    e1: float = ENGINE_DEFAULTS["e1"]
    e_a: float = ENGINE_DEFAULTS["e_a"]
    e_b: float = ENGINE_DEFAULTS["e_b"]
    g: float = Field(ENGINE_DEFAULTS["g"], gt=0)
    r: float = Field(ENGINE_DEFAULTS["r"], gt=0)
    tau: float = Field(ENGINE_DEFAULTS["tau"], ge=0)
    t_c: float = Field(REFERENCE_TEMPERATURES["t_c"], gt=0)
    t_h: float = Field(REFERENCE_TEMPERATURES["t_h"], gt=0)
    t_l: float = Field(REFERENCE_TEMPERATURES["t_l"], gt=0)
    p_c: float = Field(0.0, ge=0, le=1)
    p_h: float = Field(0.0, ge=0, le=1)

    @model_validator(mode="after")
    def _check_level_ordering(self) -> "EngineParams":
        if not self.e_a > self.e_b > self.e1:
            raise ValueError(
                f"Ordem dos niveis invalida: e_a={self.e_a}, e_b={self.e_b}, "
                f"e1={self.e1} (esperado e_a > e_b > e1)"
            )
        return self

    def classical(self) -> "EngineParams":
        """Mesmo motor sem coerencia (p_c = p_h = 0)."""
        return self.with_coherence(0.0, 0.0)

    def with_coherence(self, p_c: float, p_h: float) -> "EngineParams":
        return EngineParams(**{**self.model_dump(), "p_c": p_c, "p_h": p_h})

    def fixed_fields(self) -> dict:
        """Campos que nao sao sorteados na geracao de dados."""
        return {k: v for k, v in self.model_dump().items() if k not in VARIED_FIELDS}


@dataclass(frozen=True)
class Occupations:
    """Ocupacoes medias de Bose-Einstein e os respectivos 1 + n."""

    n_h: float
    n_c: float
    n_l: float

    @property
    def nt_h(self) -> float:
        return 1.0 + self.n_h

    @property
    def nt_c(self) -> float:
        return 1.0 + self.n_c

    @property
    def nt_l(self) -> float:
        return 1.0 + self.n_l


def bose_occupation(gap: float, temperature: float) -> float:
    """
    Ocupacao de Bose-Einstein 1 / (exp(gap/T) - 1).

    Raises:
        DomainError: se gap ou temperatura nao forem positivos
    """
    if not gap > 0:
        raise DomainError(f"Gap de energia deve ser positivo, recebido {gap}")
    if not temperature > 0:
        raise DomainError(f"Temperatura deve ser positiva, recebida {temperature}")

    # Banho congelado: exp estoura para inf e a ocupacao vai a zero
    with np.errstate(over="ignore"):
        return float(1.0 / np.expm1(gap / temperature))


def coherence_coupling(r: float, p: float) -> float:
    """
    Termo misto Gamma_12x = r * p_x.

    Raises:
        DomainError: se r <= 0 ou p fora de [0, 1]
    """
    if not r > 0:
        raise DomainError(f"Taxa r deve ser positiva, recebida {r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Intensidade de coerencia fora de [0, 1]: {p}")
    return r * p


def occupations(params: EngineParams) -> Occupations:
    return Occupations(
        n_h=bose_occupation(params.e_a - params.e1, params.t_h),
        n_c=bose_occupation(params.e_b - params.e1, params.t_c),
        n_l=bose_occupation(params.e_a - params.e_b, params.t_l),
    )


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class TwistedGenerator:
    """
    Gerador vestido pelo campo de contagem.

    Atributos:
        l0: L(lambda=0), 5x5
        l_deriv: (dL/dlambda, ..., d^4L/dlambda^4) em lambda=0
        emission_rate: g^2 n_l (a -> b, conta -1)
        absorption_rate: g^2 (1+n_l) (b -> a, conta +1)
    """

    l0: np.ndarray
    l_deriv: Tuple[np.ndarray, ...]
    emission_rate: float
    absorption_rate: float
    params: EngineParams

    def evaluate(self, lam: Union[float, complex]) -> np.ndarray:
        """Matriz L(lambda) para lambda real ou complexo."""
        dtype = complex if isinstance(lam, complex) else float
        matrix = np.array(self.l0, dtype=dtype)
        matrix[IDX_B, IDX_A] = self.emission_rate * np.exp(-lam)
        matrix[IDX_A, IDX_B] = self.absorption_rate * np.exp(lam)
        return matrix

    def derivative(self, k: int) -> np.ndarray:
        """k-esima derivada em lambda = 0, k = 1..4."""
        if not 1 <= k <= len(self.l_deriv):
            raise DomainError(f"Ordem de derivada {k} fora de 1..{len(self.l_deriv)}")
        return self.l_deriv[k - 1]


def build_generator(params: EngineParams, printed: bool = False) -> TwistedGenerator:
    """
    Monta o gerador torcido 5x5.

    Na forma usual da matriz a coluna da coerencia nao conserva
    populacao (soma das quatro primeiras linhas = -Gamma_12c n_c).
    Por padrao a entrada (bb, coerencia) vale 2 Gamma_12c n_c, o que restaura
    u^T L(0) = 0 com u = (1, 1, 1, 1, 0). `printed=True` mantem o valor
    usual (Gamma_12c n_c), apenas para comparacao.

    Args:
        params: Parametros do motor
        printed: Se True, usa a entrada usual sem a correcao do traco

    Returns:
        TwistedGenerator
    """
    occ = occupations(params)
    r = params.r
    g2 = params.g ** 2

    # Gamma_1x = Gamma_2x = r, entao Gamma_x = 2r
    g12h = coherence_coupling(r, params.p_h)
    g12c = coherence_coupling(r, params.p_c)
    g_bar = -occ.n_h * r - occ.n_c * r
    g12 = (g12c * occ.n_c + g12h * occ.n_h) / 2.0

    coh_into_b = 2.0 * g12c * occ.n_c
    if printed:
        coh_into_b = g12c * occ.n_c

    loss_12 = -(r * occ.n_h + r * occ.n_c)

    l0 = np.array([
        [loss_12, 0.0, r * occ.nt_h, r * occ.nt_c, -2.0 * g12],
        [0.0, loss_12, r * occ.nt_h, r * occ.nt_c, -2.0 * g12],
        [r * occ.n_c, r * occ.n_c, -2.0 * r * occ.nt_h - g2 * occ.nt_l, g2 * occ.n_l, coh_into_b],
        [r * occ.n_h, r * occ.n_h, g2 * occ.nt_l, -g2 * occ.n_l - 2.0 * r * occ.nt_c, 2.0 * g12h * occ.n_h],
        [-g12, -g12, g12h * occ.nt_h, 2.0 * g12c * occ.nt_c, g_bar - params.tau],
    ])

    emission = g2 * occ.n_l
    absorption = g2 * occ.nt_l

    derivs = []
    for k in range(1, 5):
        d = np.zeros((5, 5))
        d[IDX_B, IDX_A] = (-1.0) ** k * emission
        d[IDX_A, IDX_B] = absorption
        derivs.append(_frozen(d))

    return TwistedGenerator(
        l0=_frozen(l0),
        l_deriv=tuple(derivs),
        emission_rate=emission,
        absorption_rate=absorption,
        params=params,
    )


def affinity(params: EngineParams) -> float:
    """
    Afinidade termodinamica da corrente contada (sem coerencia).

    A = ln(n_c (1+n_c) (1+n_l) / (n_h (1+n_h) n_l)). Com Gamma_1x = Gamma_2x o
    ciclo 1 -> a -> 2 -> b -> 1 tem afinidade nula e os dois ciclos pela
    cavidade compartilham A, logo S(lambda) = S(-lambda - A) em p = 0.
    """
    occ = occupations(params)
    forward = occ.n_c * occ.nt_c * occ.nt_l
    backward = occ.n_h * occ.nt_h * occ.n_l
    return math.log(forward / backward)


def zero_bias_hot_temperature(params: EngineParams) -> float:
    """
    T_h que anula a afinidade para T_c e T_l dados.

    Resolve n_h (1 + n_h) = n_c (1 + n_c) exp((E_a - E_b) / T_l) para n_h e
    inverte a ocupacao de Bose-Einstein.
    """
    occ = occupations(params)
    target = occ.n_c * occ.nt_c * math.exp((params.e_a - params.e_b) / params.t_l)
    n_h = (-1.0 + math.sqrt(1.0 + 4.0 * target)) / 2.0
    return (params.e_a - params.e1) / math.log1p(1.0 / n_h)
