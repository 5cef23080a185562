"""
Oraculo estocastico: Gillespie no limite classico (p_c = p_h = 0).

Sem coerencia o bloco de populacoes de L(0) e um processo de saltos de
Markov genuino sobre {1, 2, b, a}. Contamos os saltos pela cavidade:
b -> a soma +1 e a -> b soma -1, como os fatores e^{+-lambda} do gerador.

Cada trajetoria tem seu proprio gerador aleatorio, derivado de
(seed, indice). As trajetorias avancam em passo sincronizado (um salto por
passo para todas as ativas), cada uma consumindo o seu fluxo na mesma ordem
que consumiria sozinha; serial ou vetorizado da o mesmo resultado.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg as la

from src.engine.counting_stats import cumulants
from src.engine.model import IDX_A, IDX_B, IDX_COH, EngineParams, TwistedGenerator, build_generator
from src.exceptions import AbsorbingStateError, DomainError
from src.utils.seeding import substream

logger = logging.getLogger(__name__)

N_STATES = IDX_COH

# Tamanho do bloco de numeros aleatorios pre-sorteados por trajetoria
BLOCK_SIZE = 4096


@dataclass(frozen=True, eq=False)
class JumpProcess:
    """
    Processo de saltos de 4 estados.

    Atributos:
        rate_matrix: rate_matrix[i, j] = taxa do salto j -> i (i != j)
        weights: weights[i, j] = incremento da contagem no salto j -> i
    """

    rate_matrix: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        off_diag = self.rate_matrix[~np.eye(N_STATES, dtype=bool)]
        if np.any(off_diag < 0):
            raise DomainError(f"Taxas negativas na matriz de saltos: {self.rate_matrix}")

    @classmethod
    def from_generator(cls, gen: TwistedGenerator) -> "JumpProcess":
        """
        Extrai o processo do bloco de populacoes de L(0).

        Raises:
            DomainError: se o gerador tiver acoplamento de coerencia
        """
        l0 = np.asarray(gen.l0)
        if np.any(l0[IDX_COH, :IDX_COH] != 0) or np.any(l0[:IDX_COH, IDX_COH] != 0):
            raise DomainError(
                "Oraculo de trajetorias so vale sem coerencia (p_c = p_h = 0)"
            )

        rates = l0[:N_STATES, :N_STATES].copy()
        np.fill_diagonal(rates, 0.0)

        weights = np.zeros((N_STATES, N_STATES))
        weights[IDX_A, IDX_B] = 1.0
        weights[IDX_B, IDX_A] = -1.0

        return cls(rate_matrix=rates, weights=weights)

    @property
    def escape_rates(self) -> np.ndarray:
        return self.rate_matrix.sum(axis=0)

    def generator(self) -> np.ndarray:
        """Gerador completo com colunas somando zero."""
        return self.rate_matrix - np.diag(self.escape_rates)

    def stationary(self) -> np.ndarray:
        system = self.generator()
        system[0, :] = 1.0
        rhs = np.zeros(N_STATES)
        rhs[0] = 1.0
        return la.solve(system, rhs)

    def jump_table(self) -> np.ndarray:
        """cum[j, i]: probabilidade acumulada de saltar de j para estados <= i."""
        escape = self.escape_rates
        probs = np.divide(
            self.rate_matrix.T, escape[:, None],
            out=np.zeros((N_STATES, N_STATES)),
            where=escape[:, None] > 0,
        )
        return np.cumsum(probs, axis=1)


@dataclass(frozen=True)
class TrajectoryStats:
    """Media e variancia da contagem por unidade de tempo, com erros padrao."""

    t_final: float
    n_traj: int
    mean_rate: float
    mean_rate_se: float
    var_rate: float
    var_rate_se: float
    seed: int


def default_t_final(proc: JumpProcess) -> float:
    """10^4 vezes o maior tempo caracteristico (inverso da menor taxa)."""
    positive = proc.rate_matrix[proc.rate_matrix > 0]
    return 1e4 / float(positive.min())


def _jackknife_se(samples: np.ndarray, statistic) -> float:
    n = len(samples)
    leave_one_out = np.array([statistic(np.delete(samples, i)) for i in range(n)])
    spread = np.sum((leave_one_out - leave_one_out.mean()) ** 2)
    return float(np.sqrt((n - 1) / n * spread))


def _simulate_counts(proc: JumpProcess, t_final: float, n_traj: int, seed: int) -> np.ndarray:
    escape = proc.escape_rates
    cum = proc.jump_table()
    weights_from_to = proc.weights.T
    rngs = [substream(seed, i) for i in range(n_traj)]

    # Estado inicial sorteado da distribuicao estacionaria
    pi_cum = np.cumsum(proc.stationary())
    state = np.array([
        min(int(np.searchsorted(pi_cum, rng.random(), side="right")), N_STATES - 1)
        for rng in rngs
    ])
    if np.any(escape[state] <= 0):
        raise AbsorbingStateError(f"Estado inicial sem taxa de saida: {escape}")

    time = np.zeros(n_traj)
    counts = np.zeros(n_traj)
    active = np.ones(n_traj, dtype=bool)
    rows = np.arange(n_traj)

    while np.any(active):
        waits = np.stack([rng.standard_exponential(BLOCK_SIZE) for rng in rngs])
        picks = np.stack([rng.random(BLOCK_SIZE) for rng in rngs])

        for step in range(BLOCK_SIZE):
            idx = rows[active]
            current = state[idx]
            time[idx] += waits[idx, step] / escape[current]

            within = time[idx] <= t_final
            finished = idx[~within]
            active[finished] = False

            moving = idx[within]
            if moving.size == 0:
                if not np.any(active):
                    break
                continue

            src = state[moving]
            dst = np.sum(picks[moving, step][:, None] >= cum[src], axis=1)
            dst = np.minimum(dst, N_STATES - 1)
            counts[moving] += weights_from_to[src, dst]
            state[moving] = dst

            if np.any(escape[dst] <= 0):
                raise AbsorbingStateError(
                    f"Estado absorvente alcancado: taxas de saida {escape}"
                )

    return counts


def simulate(
    proc: JumpProcess,
    t_final: Optional[float] = None,
    n_traj: int = 200,
    seed: int = 0
) -> TrajectoryStats:
    """
    Estatistica empirica da contagem liquida de fotons ate t_final.

    Args:
        proc: Processo de saltos
        t_final: Tempo simulado; padrao default_t_final(proc)
        n_traj: Numero de trajetorias (>= 2)
        seed: Semente; trajetoria i usa o sub-fluxo (seed, i)

    Returns:
        TrajectoryStats com erros padrao jackknife entre trajetorias

    Raises:
        AbsorbingStateError: se um estado alcancavel nao tiver saida
    """
    if n_traj < 2:
        raise DomainError(f"n_traj deve ser >= 2, recebido {n_traj}")
    t_final = default_t_final(proc) if t_final is None else t_final
    if not t_final > 0:
        raise DomainError(f"t_final deve ser positivo, recebido {t_final}")

    logger.info(f"Simulando {n_traj} trajetorias ate t={t_final:.3g} (seed={seed})")
    counts = _simulate_counts(proc, t_final, n_traj, seed)

    def mean_stat(x):
        return x.mean() / t_final

    def var_stat(x):
        return x.var(ddof=1) / t_final

    return TrajectoryStats(
        t_final=t_final,
        n_traj=n_traj,
        mean_rate=float(mean_stat(counts)),
        mean_rate_se=_jackknife_se(counts, mean_stat),
        var_rate=float(var_stat(counts)),
        var_rate_se=_jackknife_se(counts, var_stat),
        seed=seed,
    )


def compare_with_analytic(
    params: EngineParams,
    t_final: float,
    n_traj: int,
    seed: int
) -> Dict[str, float]:
    """
    Compara j^(1), j^(2) analiticos com a simulacao (params sem coerencia).

    Returns:
        Dicionario com valores, erros padrao e z-scores
    """
    classical = params.classical()
    gen = build_generator(classical)
    j = cumulants(gen)
    stats = simulate(JumpProcess.from_generator(gen), t_final, n_traj, seed)

    return {
        "t_c": classical.t_c,
        "t_h": classical.t_h,
        "t_l": classical.t_l,
        "j1_analytic": float(j[0]),
        "j1_empirical": stats.mean_rate,
        "j1_se": stats.mean_rate_se,
        "j1_z": (stats.mean_rate - j[0]) / stats.mean_rate_se,
        "j2_analytic": float(j[1]),
        "j2_empirical": stats.var_rate,
        "j2_se": stats.var_rate_se,
        "j2_z": (stats.var_rate - j[1]) / stats.var_rate_se,
    }
