"""
Exception hierarchy for the Rivlin cube toolkit.

The CLI maps these onto process exit codes (see cli/main.py).
"""

from typing import Optional


class CubeError(Exception):
    """Base class for every error raised by this package."""


class ParameterDomainError(CubeError, ValueError):
    """A material parameter, stretch or tolerance is outside its admissible range."""


class DomainError(CubeError, ValueError):
    """A matrix or region argument violates the operation's domain."""


class EvaluationError(CubeError, ArithmeticError):
    """A scalar function returned a non-finite value."""

    def __init__(self, message: str, x: Optional[float] = None):
        super().__init__(message)
        self.x = x


class ConvergenceError(CubeError, RuntimeError):
    """A scalar solver could not bracket or converge to its root."""


def require_material_m(M: float) -> float:
    """Validate the dimensionless stiffness ratio M > 2/3 and return it as float."""
    M = float(M)
    if not M > 2.0 / 3.0:
        raise ParameterDomainError(f"M must satisfy M > 2/3, got M = {M!r}")
    return M
