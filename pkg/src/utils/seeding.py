"""
Sub-fluxos de numeros aleatorios derivados de (semente, chaves...).

Cada amostra, trajetoria ou dobra recebe um gerador proprio, entao a
ordem de execucao (serial ou em paralelo) nao muda o resultado.
"""

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    """
    Gerador deterministico para (seed, *keys).

    Exemplo:
        rng = substream(42, indice, tentativa)
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError(f"Semente e chaves devem ser nao negativas: {entropy}")
    return np.random.default_rng(np.random.SeedSequence(entropy))
