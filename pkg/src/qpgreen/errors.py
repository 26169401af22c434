"""Exceptions and warnings raised by qpgreen."""

from typing import Any, List, Optional, Tuple


class QPGreenError(Exception):
    """Base class for every qpgreen error."""


class DegenerateBasisError(QPGreenError, ValueError):
    """Periodicity vectors are (numerically) linearly dependent."""


class OrderTooLargeError(QPGreenError, ValueError):
    """Finite-difference order exceeds the supported maximum."""


class SingularityError(QPGreenError, ArithmeticError):
    """Evaluation point coincides with a source or one of its images."""


class ShiftNotAdmissibleError(QPGreenError, ValueError):
    """Shift distance d annihilates one of the propagating modes."""

    def __init__(self, message: str, offending: Optional[List[Tuple[int, int]]] = None) -> None:
        super().__init__(message)
        self.offending = offending or []


class WoodFrequencyError(QPGreenError, ArithmeticError):
    """The classical spectral series diverges at a Wood configuration."""


class SlowConvergenceError(QPGreenError, ArithmeticError):
    """A spectral series cannot reach its truncation bound."""


class SpectralDomainError(QPGreenError, ValueError):
    """The shifted spectral form is only valid above all images (z > 0)."""


class ResolutionError(QPGreenError, ValueError):
    """Grid resolution below the supported minimum."""


class ProblemSizeError(QPGreenError, MemoryError):
    """Dense system would exceed the configured number of unknowns."""


class GMRESConvergenceError(QPGreenError, RuntimeError):
    """GMRES did not reach the requested tolerance."""

    def __init__(self, message: str, best: Any = None, residual: float = float("nan"),
                 iterations: int = 0) -> None:
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class DegenerateIncidenceError(QPGreenError, ValueError):
    """The specular order does not propagate, so energy ratios are undefined."""


class DegenerateFitError(QPGreenError, ValueError):
    """Rate fit requested on unusable samples."""


class ConfigError(QPGreenError, ValueError):
    """Invalid run configuration."""


class QuadratureResolutionWarning(UserWarning):
    """Integrand carries energy in the highest resolved Fourier mode."""
