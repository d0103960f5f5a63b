"""Exception hierarchy shared by the solver, certificate and matrix layers."""

from __future__ import annotations


class MinmaxError(Exception):
    """Base class for every error raised by the package."""


class InputValidationError(MinmaxError, ValueError):
    """Raised when inputs are malformed or dimensionally inconsistent."""


class SymmetryError(InputValidationError):
    """Raised when the conjugate-symmetry precondition of the real case fails."""


class DecompositionMismatchError(InputValidationError):
    """Raised when a decomposition does not match the evaluation table."""


class ConvergenceError(MinmaxError):
    """Raised when an iterative routine stops short of its tolerance."""

    def __init__(self, message: str, *, achieved: float | None = None) -> None:
        super().__init__(message)
        self.achieved = achieved


class RealnessError(MinmaxError):
    """Raised when a real-mode worst-case vector keeps a nonnegligible imaginary part."""

    def __init__(self, message: str, *, imaginary: float) -> None:
        super().__init__(message)
        self.imaginary = imaginary


class NotOptimalError(MinmaxError):
    """Raised when no positive certificate exists for the given coefficients.

    By the characterization of best approximations this proves the coefficients
    are not optimal.
    """

    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


__all__ = [
    "ConvergenceError",
    "DecompositionMismatchError",
    "InputValidationError",
    "MinmaxError",
    "NotOptimalError",
    "RealnessError",
    "SymmetryError",
]
