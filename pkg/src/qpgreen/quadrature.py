"""Periodic trapezoid helpers and the local polar rule used near singular targets."""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike

from .greens import bump

# below this distance from a node the cardinal function is taken as exactly 1
CARDINAL_EPS = 1e-14
# the local disc may cover the neighbouring cells of the target
MAX_POLAR_RADIUS = 2.0


def trig_cardinal(t: ArrayLike, N: int) -> np.ndarray:
    """Periodic cardinal function of the N-point uniform grid on [0, 1).

    L(t) = sin(pi N t) cot(pi t) / N for even N, i.e. the real trigonometric
    interpolant with the Nyquist mode split evenly between +-N/2. L(0) = 1
    and L(i/N) = 0 for the other nodes.
    """
    if N % 2:
        raise ValueError(f"trigonometric cardinal functions need even N, got {N}")
    t = np.asarray(t, dtype=float)
    t = t - np.round(t)
    at_node = np.abs(t) < CARDINAL_EPS
    ts = np.where(at_node, 0.25, t)
    val = np.sin(np.pi * N * ts) / (N * np.tan(np.pi * ts))
    return np.where(at_node, 1.0, val)


def interpolation_matrix(points: ArrayLike, N: int) -> np.ndarray:
    """Rows evaluate the periodic interpolant of N nodal values at ``points``."""
    nodes = np.arange(N) / N
    return trig_cardinal(np.asarray(points, dtype=float)[:, None] - nodes[None, :], N)


def pou(rho: ArrayLike, delta: float) -> np.ndarray:
    """Radial partition of unity: 1 at rho=0, 0 for rho >= delta, C-infinity."""
    return bump(np.asarray(rho, dtype=float) / delta)


@dataclass(frozen=True, eq=False)
class PolarRule:
    """Offsets (da, db) and weights of the polar rule on a disc of radius delta.

    Weights already contain the polar jacobian rho, the partition of unity
    and the angular step, so integral(eta(rho) F) ~ sum(weights * F(offsets)).
    """

    delta: float
    n_r: int
    n_theta: int
    da: np.ndarray
    db: np.ndarray
    rho: np.ndarray
    weights: np.ndarray


def polar_rule(delta: float, n_r: int, n_theta: int) -> PolarRule:
    """Gauss-Legendre in rho on [0, delta] times the uniform rule in theta."""
    if not 0 < delta <= MAX_POLAR_RADIUS:
        raise ValueError(
            f"polar radius must lie in (0, {MAX_POLAR_RADIUS}] cell units, got {delta}"
        )
    if n_r < 1 or n_theta < 1:
        raise ValueError("polar rule needs at least one node per direction")
    x, w = leggauss(n_r)
    rho = 0.5 * delta * (x + 1.0)
    w_rho = 0.5 * delta * w
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(rho, theta, indexing="ij")
    weights = (w_rho * rho * pou(rho, delta))[:, None] * np.full(n_theta, 2.0 * np.pi / n_theta)
    return PolarRule(
        delta=delta,
        n_r=n_r,
        n_theta=n_theta,
        da=(rr * np.cos(tt)).ravel(),
        db=(rr * np.sin(tt)).ravel(),
        rho=rr.ravel(),
        weights=weights.ravel(),
    )


def top_mode_energy(values: np.ndarray) -> float:
    """Fraction of spectral energy in the outermost resolved Fourier ring of a grid."""
    spec = np.abs(np.fft.fft2(values)) ** 2
    total = float(spec.sum())
    if total == 0.0:
        return 0.0
    N, M = values.shape
    kx = np.abs(np.fft.fftfreq(N) * N)
    ky = np.abs(np.fft.fftfreq(M) * M)
    ring = (kx[:, None] >= N // 2) | (ky[None, :] >= M // 2)
    return float(spec[ring].sum() / total)
