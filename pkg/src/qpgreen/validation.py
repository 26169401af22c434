"""Independent oracles: Helmholtz residual, quasi-periodicity defect and rate fits."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateFitError
from .greens import GreenParams, qp_green_batch
from .lattice import Lattice

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], complex]

NOISE_FLOOR = 1e-15
DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log A, log err)."""

    samples: List[Tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float


def helmholtz_residual(
    field: Field, x: ArrayLike, h: float = DEFAULT_STEP, k: float = 1.0
) -> float:
    """|7-point Laplacian(field)(x) + k^2 field(x)|."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    centre = complex(field(x))
    lap = -6.0 * centre
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        lap += complex(field(x + e)) + complex(field(x - e))
    return float(abs(lap / h**2 + k**2 * centre))


def quasi_periodicity_defect(
    field: Field, x: ArrayLike, mn: Tuple[int, int], alpha: Sequence[float], lat: Lattice
) -> float:
    """|field(x + (v_mn, 0)) - e^{i alpha.v_mn} field(x)|."""
    x = np.asarray(x, dtype=float)
    v = lat.translate(mn[0], mn[1])
    shifted = x + np.array([v[0], v[1], 0.0])
    phase = np.exp(1j * float(np.dot(np.asarray(alpha, dtype=float), v)))
    return float(abs(complex(field(shifted)) - phase * complex(field(x))))


def fit_decay_rate(samples: Sequence[Tuple[float, float]]) -> RateFit:
    """Fit log(err) = intercept + slope log(A)."""
    pts = [(float(a), float(e)) for a, e in samples]
    if len(pts) < 3:
        raise DegenerateFitError(f"need at least 3 samples, got {len(pts)}")
    A = np.array([a for a, _ in pts])
    err = np.array([e for _, e in pts])
    if np.any(np.diff(A) <= 0):
        raise DegenerateFitError("window radii must be strictly increasing")
    if np.any(err <= 0):
        raise DegenerateFitError("errors must be positive for a log-log fit")
    if np.all(err < NOISE_FLOOR):
        raise DegenerateFitError("all errors sit below the rounding floor")
    x, y = np.log(A), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    r = np.corrcoef(x, y)[0, 1] if np.ptp(y) > 0 else 0.0
    r2 = min(1.0, max(0.0, float(r) ** 2))
    return RateFit(samples=pts, slope=float(slope), intercept=float(intercept), r_squared=r2)


def green_convergence(
    points: ArrayLike, gp: GreenParams, A_values: Sequence[float], A_ref: float
) -> Tuple[List[Tuple[float, float]], RateFit]:
    """max |G^{p,A} - G^{p,A_ref}| over ``points`` for each A, with its fitted rate."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if A_ref <= max(A_values):
        raise ValueError(f"reference radius {A_ref} must exceed every sweep radius")
    ref, _ = qp_green_batch(pts, gp.with_window(A_ref))
    samples = []
    for A in A_values:
        vals, _ = qp_green_batch(pts, gp.with_window(A))
        err = float(np.max(np.abs(vals - ref)))
        logger.info(f"Green convergence A={A}: max error {err:.3e}")
        samples.append((float(A), err))
    return samples, fit_decay_rate(samples)
