"""Rayleigh coefficients, energy-conservation defect and reference errors."""

import logging
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateIncidenceError, QuadratureResolutionWarning
from .greens import qp_green_batch
from .lattice import ModeIndex, mode_window, propagating_set, search_modes
from .quadrature import top_mode_energy

if TYPE_CHECKING:
    from .bie import DensitySolution, SolveConfig

logger = logging.getLogger(__name__)

# relative spectral energy allowed in the top resolved Fourier mode
RESOLUTION_THRESHOLD = 1e-8

Key = Tuple[int, int]


@dataclass(frozen=True)
class RayleighSpectrum:
    """Upward Rayleigh coefficients B_jl and the propagating orders."""

    coeffs: Dict[Key, complex]
    propagating: List[Key]
    gamma00: float
    gammas: Dict[Key, complex]
    tau_rel: float
    k: float


@dataclass(frozen=True)
class ErrorReport:
    eps: float
    eps1: Optional[float]
    iterations: int


def default_J_max(cfg: "SolveConfig") -> int:
    """Smallest J covering every order with |v*_jl| <= 2k."""
    k = cfg.inc.k
    reach = [
        max(abs(m.j), abs(m.l))
        for m in search_modes(cfg.inc, cfg.gp.lat)
        if np.hypot(*m.vstar) <= 2.0 * k
    ]
    return max(reach, default=0)


def _modes(cfg: "SolveConfig", J_max: Optional[int]) -> List[ModeIndex]:
    J = default_J_max(cfg) if J_max is None else J_max
    if J < 0:
        raise ValueError(f"J_max must be non-negative, got {J}")
    modes = {m.key: m for m in mode_window(cfg.inc, cfg.gp.lat, J)}
    for m in propagating_set(cfg.inc, cfg.gp.lat, cfg.gp.wood.tau_rel):
        modes.setdefault(m.key, m)
    return [modes[key] for key in sorted(modes)]


def _qper_density(density: "DensitySolution", cfg: "SolveConfig") -> np.ndarray:
    """phi^qper = e^{i alpha.x~} phi^per at the flat node list."""
    nodes = cfg.grid.flat_nodes()
    alpha = np.asarray(cfg.inc.alpha)
    return np.exp(1j * (nodes[:, :2] @ alpha)) * np.asarray(density.values).ravel()


def rayleigh_coefficients(
    density: "DensitySolution", cfg: "SolveConfig", J_max: Optional[int] = None
) -> RayleighSpectrum:
    """B_jl = (i/2D) w_jl Q_jl from the trapezoid rule on the solved density."""
    gp = cfg.gp
    grid = cfg.grid
    nodes = grid.flat_nodes()
    normals = grid.flat_normals()
    phi = _qper_density(density, cfg) * grid.weights
    grazing = set(gp.wood.keys)

    coeffs: Dict[Key, complex] = {}
    gammas: Dict[Key, complex] = {}
    specular = None
    for mode in _modes(cfg, J_max):
        gam = mode.gamma_jl
        wave = np.array([mode.vstar[0], mode.vstar[1], gam], dtype=complex)
        plane = np.exp(-1j * (nodes.astype(complex) @ wave))
        if cfg.bc == "dirichlet":
            bracket = 1j * cfg.eta - 1j * cfg.xi * (normals.astype(complex) @ wave)
        else:
            bracket = np.ones(len(nodes), dtype=complex)
        integrand = phi * plane * bracket
        if mode.key in grazing:
            weight = gp.b[mode.key]
        else:
            weight = (1.0 - np.exp(1j * gam * gp.d)) ** gp.p / gam
        coeffs[mode.key] = complex(1j / (2.0 * gp.lat.D) * weight * np.sum(integrand))
        gammas[mode.key] = complex(gam)
        if mode.key == (0, 0):
            specular = integrand

    if specular is not None:
        # energy ratios ignore the uniform 1/(N M) factor of the weights
        top = top_mode_energy(specular.reshape(grid.N, grid.M))
        if top > RESOLUTION_THRESHOLD:
            message = (
                f"top Fourier mode carries {top:.2e} of the Rayleigh integrand energy "
                f"on the {grid.N}x{grid.M} grid"
            )
            logger.warning(message)
            warnings.warn(message, QuadratureResolutionWarning)

    propagating = [
        m.key for m in propagating_set(cfg.inc, gp.lat, gp.wood.tau_rel)
    ]
    return RayleighSpectrum(
        coeffs=coeffs,
        propagating=propagating,
        gamma00=float(cfg.inc.gamma),
        gammas=gammas,
        tau_rel=gp.wood.tau_rel,
        k=cfg.inc.k,
    )


def energy_defect(spec: RayleighSpectrum) -> float:
    """eps = |sum_P (gamma_jl/gamma_00) |B_jl|^2 - 1|."""
    if spec.gamma00 <= spec.tau_rel * spec.k:
        raise DegenerateIncidenceError(
            f"gamma_00={spec.gamma00} lies in the Wood band; energy ratios are undefined"
        )
    total = 0.0
    for key in spec.propagating:
        total += spec.gammas[key].real / spec.gamma00 * abs(spec.coeffs[key]) ** 2
    return abs(total - 1.0)


def eps1(spec: RayleighSpectrum, ref_B00: complex) -> float:
    """|B_00 - B_00^ref|."""
    return float(abs(spec.coeffs[(0, 0)] - complex(ref_B00)))


def evaluate_potential(
    density: "DensitySolution", cfg: "SolveConfig", points: ArrayLike
) -> np.ndarray:
    """Scattered field at points above the surface by the trapezoid rule."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    grid = cfg.grid
    if np.any(pts[:, 2] <= grid.z_plus):
        raise ValueError(f"evaluation points must lie above z_plus={grid.z_plus}")
    nodes = grid.flat_nodes()
    normals = grid.flat_normals()
    phi = _qper_density(density, cfg) * grid.weights

    out = np.zeros(len(pts), dtype=complex)
    for idx, x in enumerate(pts):
        vals, grads = qp_green_batch(x - nodes, cfg.gp)
        if cfg.bc == "dirichlet":
            kern = 1j * cfg.eta * vals + cfg.xi * np.sum(normals * grads, axis=1)
        else:
            kern = vals
        out[idx] = np.sum(kern * phi)
    return out


def plane_sampled_coefficients(
    density: "DensitySolution",
    cfg: "SolveConfig",
    z0: float,
    J_max: Optional[int] = None,
    samples: Optional[int] = None,
) -> Dict[Key, complex]:
    """Rayleigh coefficients from an FFT of the field sampled on the plane z = z0."""
    J = default_J_max(cfg) if J_max is None else J_max
    n = samples or max(8, 4 * (J + 1))
    if n < 2 * J + 1:
        raise ValueError(f"{n} samples per direction cannot resolve |j| <= {J}")
    lat = cfg.gp.lat
    a = np.arange(n) / n
    aa, bb = np.meshgrid(a, a, indexing="ij")
    xt = lat.translate(aa.ravel(), bb.ravel())
    pts = np.column_stack([xt, np.full(len(xt), float(z0))])
    field = evaluate_potential(density, cfg, pts)
    periodic = field * np.exp(-1j * (xt @ np.asarray(cfg.inc.alpha)))
    c = np.fft.fft2(periodic.reshape(n, n)) / (n * n)
    out: Dict[Key, complex] = {}
    for mode in mode_window(cfg.inc, lat, J):
        out[mode.key] = complex(c[mode.j % n, mode.l % n] * np.exp(-1j * mode.gamma_jl * z0))
    return out
