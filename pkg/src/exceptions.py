"""
Hierarquia de erros do laboratorio.

Dois grandes grupos:
- DomainError: argumento ou arquivo invalido (CLI sai com codigo 2)
- NumericalQualityError: a conta nao e confiavel (CLI sai com codigo 3)
"""

from typing import Optional


class QheLabError(Exception):
    """Erro base do projeto."""


class DomainError(QheLabError, ValueError):
    """Argumento fora do dominio valido."""


class ParseError(DomainError):
    """Arquivo mal formado. Guarda o numero da linha quando conhecido."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"linha {line}: {message}"
        super().__init__(message)


class ModelStateError(QheLabError, RuntimeError):
    """Modelo usado antes de ser treinado."""


class NumericalQualityError(QheLabError, ArithmeticError):
    """Resultado numerico nao confiavel."""


class SingularityError(NumericalQualityError):
    """Espaco nulo de L(0) com dimensao diferente de 1."""


class BranchAmbiguityError(NumericalQualityError):
    """Ramo da CGF sem separacao espectral (diminua lambda)."""


class ConditioningError(NumericalQualityError):
    """Sistema linear mal condicionado."""


class DegenerateSampleError(NumericalQualityError):
    """Cumulante classico ~0, razao C indefinida."""


class GenerationQualityError(NumericalQualityError):
    """Muitas amostras degeneradas durante a geracao."""


class InfeasibleConstraintError(NumericalQualityError):
    """Restricao de cenario com taxa de aceitacao muito baixa."""


class AbsorbingStateError(NumericalQualityError):
    """Estado alcancavel sem taxa de saida."""
