"""
Estatistica de contagem completa dos fotons trocados com a cavidade.

S(lambda) e o autovalor de L(lambda) conectado ao zero em lambda = 0; suas
derivadas em zero sao os cumulantes j^(k). O caminho de producao e a
teoria de perturbacao do autovalor nao degenerado (sem ajuste de passo);
diferencas finitas com Richardson e a integral de Cauchy servem de oraculo.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import scipy.linalg as la

from src.config import (
    CONDITION_MAX,
    CONTOUR_POINTS,
    CONTOUR_RADIUS,
    DEGENERATE_TOL,
    FD_PRECISION_DIGITS,
    FD_STEPS,
    NULL_SPACE_TOL,
    SPECTRAL_GAP_MIN,
)
from src.engine.model import (
    IDX_A,
    IDX_B,
    IDX_COH,
    TRACE_VECTOR,
    EngineParams,
    TwistedGenerator,
    build_generator,
)
from src.exceptions import (
    BranchAmbiguityError,
    ConditioningError,
    DegenerateSampleError,
    SingularityError,
)
from src.utils.numerics import central_difference, richardson_extrapolate, taylor_derivatives

logger = logging.getLogger(__name__)

MAX_ORDER = 4


@dataclass(frozen=True)
class SteadyState:
    """Estado estacionario {rho_11, rho_22, rho_bb, rho_aa, Re(rho_12)}."""

    rho: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return self.rho[:IDX_COH]

    @property
    def coherence(self) -> float:
        return float(self.rho[IDX_COH])


@dataclass(frozen=True)
class CumulantSet:
    """
    Cumulantes com coerencia (j), sem coerencia (j0) e as razoes c = j / j0.

    Indice 0 corresponde a j^(1) (media), 3 a j^(4).
    """

    j: Tuple[float, ...]
    j0: Tuple[float, ...]
    c: Tuple[float, ...]

    @property
    def fano_factor(self) -> float:
        return fano_factor(self.j)


def steady_state(gen: TwistedGenerator) -> SteadyState:
    """
    Vetor nulo de L(0) normalizado para populacoes somando 1.

    Raises:
        SingularityError: se o espaco nulo numerico nao tiver dimensao 1
    """
    l0 = np.asarray(gen.l0)
    singular = la.svdvals(l0)
    scale = max(singular[0], 1.0)
    null_dim = int(np.sum(singular < NULL_SPACE_TOL * scale))
    if null_dim != 1:
        raise SingularityError(
            f"Espaco nulo de L(0) com dimensao {null_dim} (esperado 1); "
            f"valores singulares: {singular}"
        )

    # As quatro primeiras linhas somam zero: troca uma delas pela normalizacao
    system = l0.copy()
    system[0, :] = TRACE_VECTOR
    rhs = np.zeros(5)
    rhs[0] = 1.0
    rho = la.solve(system, rhs)

    return SteadyState(rho=rho)


def _branch_eigenvalue(matrix: np.ndarray) -> complex:
    """Autovalor de maior parte real, com verificacao de separacao."""
    eigs = la.eigvals(matrix)
    order = np.argsort(-eigs.real, kind="stable")
    top, runner_up = eigs[order[0]], eigs[order[1]]
    gap = top.real - runner_up.real
    if gap <= SPECTRAL_GAP_MIN:
        raise BranchAmbiguityError(
            f"Separacao espectral {gap:.3e} <= {SPECTRAL_GAP_MIN:.0e} entre "
            f"{top} e {runner_up}; reduza |lambda|"
        )
    return complex(top)


def cgf(gen: TwistedGenerator, lam: Union[float, complex]) -> Union[float, complex]:
    """
    Funcao geradora de cumulantes S(lambda).

    Para lambda real devolve um float; para lambda complexo (usado pelo
    oraculo de contorno) devolve o autovalor complexo do mesmo ramo.

    Raises:
        BranchAmbiguityError: se o ramo nao estiver isolado espectralmente
    """
    value = _branch_eigenvalue(gen.evaluate(lam))
    if isinstance(lam, complex):
        return value
    return value.real


def cumulants(gen: TwistedGenerator) -> np.ndarray:
    """
    j^(1..4) por perturbacao do autovalor.

    Com rho_0 (estado estacionario), u = (1,1,1,1,0), u.rho_0 = 1 e
    S = sum s_n lambda^n / n!, rho(lambda) = sum rho_n lambda^n / n!:

        s_n   = sum_{k=1..n} C(n,k) u . L_k . rho_{n-k}
        L_0 rho_n = sum_{k=1..n} C(n,k) (s_k - L_k) rho_{n-k},  u . rho_n = 0

    Cada sistema singular e resolvido pelo sistema com borda
        [[L_0, rho_0], [u, 0]] [x; mu] = [b; 0].

    Raises:
        ConditioningError: se o numero de condicao passar de CONDITION_MAX
    """
    rho0 = steady_state(gen).rho
    l0 = np.asarray(gen.l0)

    bordered = np.zeros((6, 6))
    bordered[:5, :5] = l0
    bordered[:5, 5] = rho0
    bordered[5, :5] = TRACE_VECTOR

    condition = np.linalg.cond(bordered)
    if not condition < CONDITION_MAX:
        raise ConditioningError(
            f"Sistema com borda mal condicionado: cond={condition:.3e} "
            f"(limite {CONDITION_MAX:.0e})"
        )
    lu = la.lu_factor(bordered)

    rhos = [rho0]
    s = [0.0]
    for n in range(1, MAX_ORDER + 1):
        s_n = sum(
            math.comb(n, k) * TRACE_VECTOR @ gen.derivative(k) @ rhos[n - k]
            for k in range(1, n + 1)
        )
        s.append(float(s_n))

        if n == MAX_ORDER:
            break

        rhs = np.zeros(5)
        for k in range(1, n + 1):
            rhs += math.comb(n, k) * (s[k] * rhos[n - k] - gen.derivative(k) @ rhos[n - k])

        solution = la.lu_solve(lu, np.append(rhs, 0.0))
        rhos.append(solution[:5])

    return np.array(s[1:])


def _precise_cgf(gen: TwistedGenerator, lam: float, dps: int):
    """
    S(lambda) com `dps` digitos: raiz de det(L(lambda) - s I) partindo do
    autovalor em dupla precisao.
    """
    guess = cgf(gen, lam)
    with mpmath.workdps(dps):
        matrix = mpmath.matrix(np.asarray(gen.l0).tolist())
        matrix[IDX_B, IDX_A] = gen.emission_rate * mpmath.exp(-mpmath.mpf(lam))
        matrix[IDX_A, IDX_B] = gen.absorption_rate * mpmath.exp(mpmath.mpf(lam))
        identity = mpmath.eye(matrix.rows)
        start = mpmath.mpf(guess)
        return mpmath.findroot(
            lambda s: mpmath.det(matrix - s * identity), (start, start + mpmath.mpf("1e-12"))
        )


def finite_difference_cumulants(
    gen: TwistedGenerator,
    steps: Optional[Sequence[float]] = None,
    dps: int = FD_PRECISION_DIGITS
) -> np.ndarray:
    """
    Oraculo: diferencas centrais de S com extrapolacao de Richardson.

    Em dupla precisao o arredondamento de S (~eps |L|) dividido por h^4
    deixa j^(3) e j^(4) com erro relativo de ate ~1e-3. Aqui S e as somas dos estenceis
    usam `dps` digitos, entao passos pequenos servem para as quatro ordens.

    Args:
        gen: Gerador torcido
        steps: Passos com razao 2, do maior para o menor
        dps: Digitos decimais de trabalho
    """
    steps = tuple(steps or FD_STEPS)
    cache = {}

    def s_of(lam: float):
        if lam not in cache:
            cache[lam] = _precise_cgf(gen, lam, dps)
        return cache[lam]

    result = []
    with mpmath.workdps(dps):
        for order in range(1, MAX_ORDER + 1):
            estimates = [central_difference(s_of, 0.0, order, h) for h in steps]
            result.append(richardson_extrapolate(estimates, p=2, r=steps[0] / steps[1]))

    return np.array(result)


def contour_cumulants(
    gen: TwistedGenerator,
    radius: float = CONTOUR_RADIUS,
    n_points: int = CONTOUR_POINTS
) -> np.ndarray:
    """Oraculo: integral de Cauchy de S sobre |lambda| = radius."""
    return taylor_derivatives(
        lambda z: cgf(gen, complex(z)),
        max_order=MAX_ORDER,
        radius=radius,
        n_points=n_points,
    )


def cumulant_ratios(params: EngineParams) -> CumulantSet:
    """
    Cumulantes com e sem coerencia e as razoes C^(i) = j^(i) / j0^(i).

    O mesmo caminho de codigo calcula j e j0, entao em p_c = p_h = 0 as
    razoes sao exatamente 1.

    Raises:
        DegenerateSampleError: se algum |j0^(i)| < DEGENERATE_TOL
    """
    j = cumulants(build_generator(params))
    j0 = cumulants(build_generator(params.classical()))

    small = np.abs(j0) < DEGENERATE_TOL
    if np.any(small):
        orders = [i + 1 for i in np.flatnonzero(small)]
        raise DegenerateSampleError(
            f"Cumulante classico degenerado nas ordens {orders}: j0={j0.tolist()}"
        )

    c = j / j0
    return CumulantSet(j=tuple(j.tolist()), j0=tuple(j0.tolist()), c=tuple(c.tolist()))


def fano_factor(j: Sequence[float]) -> float:
    """
    Variancia sobre |media| da contagem de fotons.

    Com media nula devolve inf (variancia positiva) ou nan (variancia nula).
    """
    mean = abs(float(j[0]))
    if mean == 0.0:
        return math.inf if j[1] > 0 else math.nan
    return float(j[1]) / mean


def photon_statistics(c1: float, c2: float, tol: float = 0.0) -> str:
    """
    Nome do regime para a relacao entre C^(1) e C^(2).

    'poissonian' (C1 = C2), 'bunched' (C1 > C2), 'antibunched' (C1 < C2).
    """
    if abs(c1 - c2) <= tol:
        return "poissonian"
    return "bunched" if c1 > c2 else "antibunched"


def symmetry_scan(
    gen: TwistedGenerator,
    affinity_value: float,
    lambdas: Sequence[float]
) -> np.ndarray:
    """
    Residuos S(lambda) - S(-lambda - A) numa grade de lambda.

    Nao afirma nada; so expoe o quanto a simetria de flutuacao vale.
    """
    return np.array([
        cgf(gen, lam) - cgf(gen, -lam - affinity_value) for lam in lambdas
    ])
