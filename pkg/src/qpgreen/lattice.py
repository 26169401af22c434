"""Periodicity lattices, Rayleigh exponents and Wood-frequency detection.

All records here are immutable. Mode searches enumerate integer pairs
(j, l) whose dual-lattice vectors satisfy |v*_jl| <= 2k, padded by two
rings so that every query about propagating or grazing orders is
answered from a finite superset.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union, overload

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateBasisError

logger = logging.getLogger(__name__)

Vec2 = Tuple[float, float]

DEFAULT_TAU_REL = 1e-3
SHIFT_TOLERANCE = 1e-8
SEARCH_MARGIN = 2


def _as_vec2(v: Sequence[float]) -> Vec2:
    if len(v) != 2:
        raise ValueError(f"expected a 2-vector, got {v!r}")
    return (float(v[0]), float(v[1]))


def _cross(u: Vec2, v: Vec2) -> float:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Lattice:
    """Primal periodicity vectors v1, v2 and their duals (v_i* . v_j = delta_ij)."""

    v1: Vec2
    v2: Vec2
    v1s: Vec2
    v2s: Vec2
    D: float

    @property
    def basis(self) -> np.ndarray:
        """Rows v1, v2."""
        return np.array([self.v1, self.v2])

    @property
    def dual(self) -> np.ndarray:
        """Rows v1*, v2*."""
        return np.array([self.v1s, self.v2s])

    def translate(self, m: ArrayLike, n: ArrayLike) -> np.ndarray:
        """Lattice vectors m v1 + n v2 (broadcasts over array arguments)."""
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        return np.stack(
            [m * self.v1[0] + n * self.v2[0], m * self.v1[1] + n * self.v2[1]],
            axis=-1,
        )


def dual_basis(v1: Sequence[float], v2: Sequence[float]) -> Lattice:
    """Build a Lattice from two periodicity vectors."""
    a = _as_vec2(v1)
    b = _as_vec2(v2)
    area = abs(_cross(a, b))
    if area < 1e-12 * math.hypot(*a) * math.hypot(*b):
        raise DegenerateBasisError(f"periodicity vectors {a} and {b} are dependent")
    # columns of V^{-1} satisfy v_i . v_j* = delta_ij
    inv = np.linalg.solve(np.array([a, b]), np.eye(2))
    return Lattice(
        v1=a,
        v2=b,
        v1s=(float(inv[0, 0]), float(inv[1, 0])),
        v2s=(float(inv[0, 1]), float(inv[1, 1])),
        D=area,
    )


def unit_lattice() -> Lattice:
    """The square unit lattice v1=(1,0), v2=(0,1)."""
    return dual_basis((1.0, 0.0), (0.0, 1.0))


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave exp(i(alpha . x~ - gamma z)) impinging from above."""

    k: float
    alpha: Vec2 = (0.0, 0.0)
    gamma: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f"wavenumber must be positive, got {self.k}")
        object.__setattr__(self, "alpha", _as_vec2(self.alpha))
        a2 = self.alpha[0] ** 2 + self.alpha[1] ** 2
        if math.isnan(self.gamma):
            if a2 > self.k**2:
                raise ValueError("|alpha| exceeds k: incident wave is evanescent")
            object.__setattr__(self, "gamma", math.sqrt(self.k**2 - a2))
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative (downward incidence)")
        if abs(a2 + self.gamma**2 - self.k**2) > 1e-12 * self.k**2:
            raise ValueError("|alpha|^2 + gamma^2 must equal k^2")


def incident_from_angles(k: float, theta: float = 0.0, phi: float = 0.0) -> IncidentWave:
    """Incident wave with polar angle theta (from the downward normal) and azimuth phi."""
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
    s = k * math.sin(theta)
    return IncidentWave(
        k=k, alpha=(s * math.cos(phi), s * math.sin(phi)), gamma=k * math.cos(theta)
    )


@dataclass(frozen=True)
class ModeIndex:
    """Rayleigh order (j, l) with its lateral wavevector and exponent."""

    j: int
    l: int  # noqa: E741
    vstar: Vec2
    gamma_jl: complex

    @property
    def key(self) -> Tuple[int, int]:
        return (self.j, self.l)


@dataclass(frozen=True)
class WoodSet:
    """Orders whose exponent lies within tau_rel*k of zero."""

    members: Tuple[ModeIndex, ...]
    tau_rel: float

    def __len__(self) -> int:
        return len(self.members)

    def __bool__(self) -> bool:
        return bool(self.members)

    def __contains__(self, key: object) -> bool:
        return key in self.keys

    @property
    def keys(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(m.key for m in self.members)


@overload
def rayleigh_exponent(s: float) -> complex:
    ...


@overload
def rayleigh_exponent(s: np.ndarray) -> np.ndarray:
    ...


def rayleigh_exponent(s: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """sqrt(s) for real s with sqrt(1)=1 and the cut on the negative imaginary axis.

    Non-negative arguments give non-negative reals; negative arguments give
    positive imaginary values. Broadcasts over arrays.
    """
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 0, np.sqrt(np.abs(s)) + 0j, 1j * np.sqrt(np.abs(s)))
    return out if out.ndim else complex(out)


def dual_vectors(
    j: ArrayLike, l: ArrayLike, inc: IncidentWave, lat: Lattice  # noqa: E741
) -> np.ndarray:
    """v*_jl = 2 pi j v1* + 2 pi l v2* + alpha, broadcasting over j, l."""
    j = np.asarray(j, dtype=float)
    l = np.asarray(l, dtype=float)  # noqa: E741
    two_pi = 2.0 * math.pi
    return np.stack(
        [
            two_pi * (j * lat.v1s[0] + l * lat.v2s[0]) + inc.alpha[0],
            two_pi * (j * lat.v1s[1] + l * lat.v2s[1]) + inc.alpha[1],
        ],
        axis=-1,
    )


def gamma_exponent(j: int, l: int, inc: IncidentWave, lat: Lattice) -> ModeIndex:  # noqa: E741
    """Rayleigh exponent gamma_jl = (k^2 - |v*_jl|^2)^(1/2)."""
    vs = dual_vectors(j, l, inc, lat)
    s = inc.k**2 - float(vs[0] ** 2 + vs[1] ** 2)
    return ModeIndex(
        j=int(j), l=int(l), vstar=(float(vs[0]), float(vs[1])), gamma_jl=rayleigh_exponent(s)
    )


def _search_extent(alpha: Vec2, lat: Lattice, radius: float) -> Tuple[int, int]:
    # j = (v* - alpha) . v1 / (2 pi), so |j| <= (radius + |alpha|) |v1| / (2 pi)
    reach = radius + math.hypot(*alpha)
    j_max = int(math.ceil(reach * math.hypot(*lat.v1) / (2 * math.pi))) + SEARCH_MARGIN
    l_max = int(math.ceil(reach * math.hypot(*lat.v2) / (2 * math.pi))) + SEARCH_MARGIN
    return j_max, l_max


def _enumerate(inc: IncidentWave, lat: Lattice, j_max: int, l_max: int) -> List[ModeIndex]:
    j, l = np.meshgrid(  # noqa: E741
        np.arange(-j_max, j_max + 1), np.arange(-l_max, l_max + 1), indexing="ij"
    )
    j = j.ravel()
    l = l.ravel()  # noqa: E741
    vs = dual_vectors(j, l, inc, lat)
    gam = rayleigh_exponent(inc.k**2 - (vs[:, 0] ** 2 + vs[:, 1] ** 2))
    return [
        ModeIndex(int(a), int(b), (float(v[0]), float(v[1])), complex(g))
        for a, b, v, g in zip(j, l, vs, gam)
    ]


def search_modes(inc: IncidentWave, lat: Lattice) -> List[ModeIndex]:
    """All orders with |v*_jl| <= 2k plus a two-ring margin, sorted by (j, l)."""
    j_max, l_max = _search_extent(inc.alpha, lat, 2.0 * inc.k)
    return _enumerate(inc, lat, j_max, l_max)


def mode_window(inc: IncidentWave, lat: Lattice, J: int) -> List[ModeIndex]:
    """All orders with |j|, |l| <= J."""
    return _enumerate(inc, lat, J, J)


def _check_tau(tau_rel: float) -> None:
    if not 0.0 < tau_rel <= 1e-2:
        raise ValueError(f"tau_rel must lie in (0, 1e-2], got {tau_rel}")


def wood_set(inc: IncidentWave, lat: Lattice, tau_rel: float = DEFAULT_TAU_REL) -> WoodSet:
    """Grazing orders: |gamma_jl| <= tau_rel * k."""
    _check_tau(tau_rel)
    members = tuple(
        m for m in search_modes(inc, lat) if abs(m.gamma_jl) <= tau_rel * inc.k
    )
    if members:
        logger.debug(f"Wood set at k={inc.k}: {[m.key for m in members]}")
    return WoodSet(members=members, tau_rel=tau_rel)


def propagating_set(
    inc: IncidentWave, lat: Lattice, tau_rel: float = DEFAULT_TAU_REL
) -> List[ModeIndex]:
    """Orders with real gamma_jl > tau_rel * k (grazing orders excluded)."""
    _check_tau(tau_rel)
    return [
        m
        for m in search_modes(inc, lat)
        if m.gamma_jl.imag == 0.0 and m.gamma_jl.real > tau_rel * inc.k
    ]


def shift_admissible(
    d: float, inc: IncidentWave, lat: Lattice, tau_rel: float = DEFAULT_TAU_REL
) -> Tuple[bool, List[Tuple[int, int]]]:
    """Check (1 - exp(i gamma_jl d)) != 0 for every order outside the Wood set.

    Evanescent orders never violate the constraint; grazing orders are
    carried by the completion term instead and are skipped.
    """
    if not d > 0:
        raise ValueError(f"shift distance must be positive, got {d}")
    _check_tau(tau_rel)
    offending = []
    for m in search_modes(inc, lat):
        if abs(m.gamma_jl) <= tau_rel * inc.k or m.gamma_jl.imag > 0:
            continue
        if abs(1.0 - np.exp(1j * m.gamma_jl * d)) <= SHIFT_TOLERANCE:
            offending.append(m.key)
    return (not offending, offending)


def wood_wavenumbers(
    alpha: Sequence[float], lat: Lattice, k_max: float
) -> List[Tuple[float, List[Tuple[int, int]]]]:
    """Wavenumbers k <= k_max at which some gamma_jl vanishes for fixed alpha.

    Each entry pairs k = |v*_jl| with the orders that graze there.
    """
    a = _as_vec2(alpha)
    j_max, l_max = _search_extent(a, lat, k_max)
    grouped: Dict[float, List[Tuple[int, int]]] = {}
    tol = 1e-12 * max(k_max, 1.0)
    for jj in range(-j_max, j_max + 1):
        for ll in range(-l_max, l_max + 1):
            vs = (
                2 * math.pi * (jj * lat.v1s[0] + ll * lat.v2s[0]) + a[0],
                2 * math.pi * (jj * lat.v1s[1] + ll * lat.v2s[1]) + a[1],
            )
            kw = math.hypot(*vs)
            if kw <= tol or kw > k_max + tol:
                continue
            match = next((key for key in grouped if abs(key - kw) <= tol), None)
            grouped.setdefault(kw if match is None else match, []).append((jj, ll))
    return [(kw, sorted(grouped[kw])) for kw in sorted(grouped)]
