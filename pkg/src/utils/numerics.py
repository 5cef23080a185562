"""
Derivadas numericas de funcoes escalares.

Duas ferramentas independentes:
- diferencas centrais de ordem 1 a 4 + extrapolacao de Richardson
- coeficientes de Taylor por integral de Cauchy (FFT sobre um circulo)

Uso:
    d2 = central_difference(np.exp, 0.0, order=2, step=1e-3)   # ~1.0
    melhor = richardson_extrapolate([d_h, d_h2, d_h4], p=2)    # remove h^2 e h^4
"""

import math
from typing import Callable, Sequence

import numpy as np


# Estencis centrais: (deslocamentos em unidades de h, pesos, divisor de h^n)
_STENCILS = {
    1: ((-1, 1), (-1.0, 1.0), 2.0),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0), 1.0),
    3: ((-2, -1, 1, 2), (-1.0, 2.0, -2.0, 1.0), 2.0),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0), 1.0),
}


def central_difference(
    func: Callable[[float], float],
    x: float,
    order: int,
    step: float
) -> float:
    """
    Derivada de ordem `order` por diferenca central com erro O(h^2).

    Raises:
        ValueError: se a ordem nao estiver em {1, 2, 3, 4} ou step <= 0
    """
    if order not in _STENCILS:
        raise ValueError(f"Ordem {order} nao suportada. Opcoes validas: [1, 2, 3, 4]")
    if step <= 0:
        raise ValueError(f"Passo deve ser positivo, recebido {step}")

    offsets, weights, divisor = _STENCILS[order]
    total = sum(w * func(x + m * step) for m, w in zip(offsets, weights))
    return total / (divisor * step ** order)


def richardson_extrapolate(
    base_values: Sequence[float],
    p: int,
    r: float = 2.0
) -> float:
    """
    Extrapolacao de Richardson sobre aproximacoes com passos h, h/r, h/r^2...

    Com p=2 e estencis centrais, cada nivel elimina mais uma potencia par
    (h^2, depois h^4, ...).

    Args:
        base_values: Aproximacoes, do maior para o menor passo
        p: Ordem do termo de erro dominante
        r: Razao entre passos consecutivos

    Returns:
        Valor extrapolado
    """
    n = len(base_values)
    if n < 2:
        raise ValueError("Richardson precisa de pelo menos dois valores")

    vals = [float(v) for v in base_values]
    for j in range(1, n):
        factor = r ** (p * j)
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)

    return vals[-1]


def taylor_derivatives(
    func: Callable[[complex], complex],
    max_order: int,
    radius: float,
    n_points: int
) -> np.ndarray:
    """
    Derivadas f^(k)(0), k = 1..max_order, pela integral de Cauchy.

    Avalia f em n_points pontos do circulo |z| = radius e usa a FFT para
    obter os coeficientes de Taylor a_k; f^(k)(0) = k! a_k. O erro de
    arredondamento escala como k! eps / radius^k, sem cancelamento
    catastrofico das diferencas finitas.
    """
    if n_points <= 2 * max_order:
        raise ValueError(f"n_points={n_points} insuficiente para ordem {max_order}")

    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    z = radius * np.exp(1j * theta)
    values = np.array([func(zi) for zi in z], dtype=complex)

    coeffs = np.fft.fft(values) / n_points
    orders = np.arange(1, max_order + 1)
    taylor = coeffs[orders] / radius ** orders
    factorials = np.array([math.factorial(k) for k in orders], dtype=float)

    return np.real(taylor) * factorials
