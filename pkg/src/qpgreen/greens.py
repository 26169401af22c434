"""Quasi-periodic Helmholtz Green functions for doubly periodic gratings.

Kernel convention: every evaluator takes the difference vector
``x = target - source`` and returns G(x) together with the gradient with
respect to the *source* point, i.e. ``-grad G(x)``. Lattice sums follow

    G^{p,A}(x) = 1/(4 pi) sum_{m,n} e^{-i alpha.v_mn} W_mn sum_q a_pq e^{i k r}/r,

where r = |x + (v_mn, q d)| and W_mn is the hard (|v_mn| <= A) or the
smooth window chi(|x~ + v_mn| / A). The smooth sum is exactly
quasi-periodic because its window travels with the argument.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union, overload

import numpy as np
from numpy.typing import ArrayLike

from .errors import (
    OrderTooLargeError,
    ShiftNotAdmissibleError,
    SingularityError,
    SlowConvergenceError,
    SpectralDomainError,
    WoodFrequencyError,
)
from .lattice import (
    DEFAULT_TAU_REL,
    IncidentWave,
    Lattice,
    WoodSet,
    _search_extent,
    dual_vectors,
    rayleigh_exponent,
    shift_admissible,
    wood_set,
)

logger = logging.getLogger(__name__)

MAX_FD_ORDER = 12
POLE_GUARD = 1e-12
SPECTRAL_TOL = 1e-14
MIN_SPECTRAL_HEIGHT = 1e-3
WINDOW_KINDS = ("hard", "smooth")

# elements per (points x lattice) block in the lattice-sum kernels
BLOCK_SIZE = 1 << 18
LATTICE_BLOCK = 1 << 15
# lattice tables up to this many points are kept in memory between calls
CACHE_LIMIT = 1 << 21


def fd_coeffs(p: int) -> List[int]:
    """Finite-difference coefficients a_pq = (-1)^q binomial(p, q)."""
    if p < 0:
        raise ValueError(f"order must be non-negative, got {p}")
    if p > MAX_FD_ORDER:
        raise OrderTooLargeError(f"order {p} exceeds the maximum {MAX_FD_ORDER}")
    return [(-1) ** q * math.comb(p, q) for q in range(p + 1)]


def bump(u: ArrayLike) -> np.ndarray:
    """exp(2 e^{-1/u} / (u - 1)): 1 for u <= 0, 0 for u >= 1, C-infinity between."""
    u = np.asarray(u, dtype=float)
    inner = (u > 0) & (u < 1)
    ui = np.where(inner, u, 0.5)
    val = np.exp(2.0 * np.exp(-1.0 / ui) / (ui - 1.0))
    return np.where(u <= 0, 1.0, np.where(inner, val, 0.0))


def bump_derivative(u: ArrayLike) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    # exp(g) underflows long before dg overflows; treat that tail as zero
    inner = (u > 0) & (u < 1)
    ui = np.where(inner, u, 0.5)
    e = np.exp(-1.0 / ui)
    g = 2.0 * e / (ui - 1.0)
    live = inner & (g > -700.0)
    ui = np.where(live, ui, 0.5)
    e = np.where(live, e, np.exp(-2.0))
    dg = 2.0 * e * (1.0 / (ui**2 * (ui - 1.0)) - 1.0 / (ui - 1.0) ** 2)
    return np.where(live, np.exp(np.where(live, g, 0.0)) * dg, 0.0)


@overload
def chi(t: float, c: float = ...) -> float:
    ...


@overload
def chi(t: np.ndarray, c: float = ...) -> np.ndarray:
    ...


def chi(t: Union[float, np.ndarray], c: float = 0.5) -> Union[float, np.ndarray]:
    """Smooth truncation: 1 for t <= c, 0 for t >= 1, monotone in between."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"window ratio c must lie in (0, 1), got {c}")
    out = bump((np.asarray(t, dtype=float) - c) / (1.0 - c))
    return out if out.ndim else float(out)


@overload
def chi_derivative(t: float, c: float = ...) -> float:
    ...


@overload
def chi_derivative(t: np.ndarray, c: float = ...) -> np.ndarray:
    ...


def chi_derivative(t: Union[float, np.ndarray], c: float = 0.5) -> Union[float, np.ndarray]:
    """d chi / dt."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"window ratio c must lie in (0, 1), got {c}")
    out = bump_derivative((np.asarray(t, dtype=float) - c) / (1.0 - c)) / (1.0 - c)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class GreenValue:
    """Kernel value and its gradient with respect to the source point."""

    value: complex
    gradient_source: np.ndarray


@dataclass(frozen=True)
class HProbe:
    """Sample of the shifted radial profile h(rho, eps, eps_hat)."""

    rho: float
    eps: float
    eps_hat: float
    p: int
    value: complex


@dataclass(frozen=True, eq=False)
class GreenParams:
    """Shift, window and grazing-mode completion settings for one (k, alpha, lattice)."""

    inc: IncidentWave
    lat: Lattice
    p: int = 0
    d: float = 1.0
    A: float = 40.0
    window_c: float = 0.5
    window_kind: str = "smooth"
    wood: Optional[WoodSet] = None
    b: Optional[Dict[Tuple[int, int], complex]] = None
    _cache: Dict[Tuple[str, float], List[Tuple[np.ndarray, np.ndarray]]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )
    _cache_lock: threading.Lock = field(
        default_factory=threading.Lock, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        fd_coeffs(self.p)
        if not self.d > 0:
            raise ValueError(f"shift distance must be positive, got {self.d}")
        if not self.A > 0:
            raise ValueError(f"window radius must be positive, got {self.A}")
        if self.window_kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.window_kind!r}")
        if not 0.0 < self.window_c < 1.0:
            raise ValueError(f"window ratio must lie in (0, 1), got {self.window_c}")
        if self.wood is None:
            object.__setattr__(self, "wood", wood_set(self.inc, self.lat, DEFAULT_TAU_REL))
        if self.b is None:
            object.__setattr__(self, "b", {key: 1.0 + 0j for key in self.wood.keys})
        missing = [key for key in self.wood.keys if key not in self.b]
        if missing:
            raise ValueError(f"completion coefficients missing for {missing}")
        if any(self.b[key] == 0 for key in self.wood.keys):
            raise ValueError("completion coefficients must be non-zero")
        if self.wood and self.p < 3:
            raise ValueError(
                f"shift order p={self.p} is too low at a Wood configuration (need p >= 3)"
            )
        if self.p >= 1:
            ok, offending = shift_admissible(self.d, self.inc, self.lat, self.wood.tau_rel)
            if not ok:
                raise ShiftNotAdmissibleError(
                    f"shift d={self.d} annihilates orders {offending}", offending
                )

    @property
    def k(self) -> float:
        return self.inc.k

    @property
    def coeffs(self) -> List[int]:
        return fd_coeffs(self.p)

    def with_window(self, A: float, window_kind: Optional[str] = None) -> "GreenParams":
        """Copy with another window radius (and optionally kind)."""
        return GreenParams(
            inc=self.inc,
            lat=self.lat,
            p=self.p,
            d=self.d,
            A=A,
            window_c=self.window_c,
            window_kind=window_kind or self.window_kind,
            wood=self.wood,
            b=self.b,
        )


def _as_points(x: ArrayLike) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 3:
        raise ValueError(f"expected 3-vectors, got shape {pts.shape}")
    return pts.reshape(-1, 3)


def _free_terms(y: np.ndarray, k: float) -> Tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(y, axis=-1)
    if np.any(r < POLE_GUARD):
        raise SingularityError("free-space kernel evaluated at its source")
    g = np.exp(1j * k * r) / (4.0 * np.pi * r)
    grad = (g * (1j * k - 1.0 / r) / r)[..., None] * y
    return g, grad


def free_green_batch(diff: ArrayLike, k: float) -> Tuple[np.ndarray, np.ndarray]:
    """Free-space kernel values and source gradients at many difference vectors."""
    g, grad = _free_terms(_as_points(diff), k)
    return g, -grad


def free_green(x: ArrayLike, k: float) -> GreenValue:
    """Free-space kernel e^{ik|x|}/(4 pi |x|)."""
    g, grad = _free_terms(_as_points(x), k)
    return GreenValue(value=complex(g[0]), gradient_source=-grad[0])


def shifted_green(x: ArrayLike, k: float, p: int, d: float) -> GreenValue:
    """p-th order finite difference of the free-space kernel along z with step d."""
    y = _as_points(x)[0]
    value = 0j
    grad = np.zeros(3, dtype=complex)
    for q, a in enumerate(fd_coeffs(p)):
        yq = y + np.array([0.0, 0.0, q * d])
        if np.linalg.norm(yq) < POLE_GUARD:
            raise SingularityError(f"point {tuple(y)} is an image pole (q={q})")
        g, gr = _free_terms(yq[None, :], k)
        value += a * g[0]
        grad += a * gr[0]
    return GreenValue(value=complex(value), gradient_source=-grad)


def h_function(rho: float, eps: float, eps_hat: float, p: int, k: float) -> HProbe:
    """h(rho, eps, eps_hat) = sum_q a_pq g(rho, eps + q eps_hat).

    g(rho, e) = exp(i k rho sqrt(1+e^2)) / (rho sqrt(1+e^2)). The common
    phase e^{i k rho} is factored out so the finite difference cancels
    without losing the slowly varying part to rounding.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    total = 0j
    for q, a in enumerate(fd_coeffs(p)):
        zq = rho * (eps + q * eps_hat)
        R = math.hypot(rho, zq)
        excess = zq * zq / (R + rho)  # R - rho, free of cancellation
        total += a * np.exp(1j * k * excess) / R
    return HProbe(rho=rho, eps=eps, eps_hat=eps_hat, p=p, value=complex(np.exp(1j * k * rho) * total))


def _lattice_blocks(
    gp: GreenParams, radius: float, block: int
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Lattice vectors with |v_mn| <= radius and their phases e^{-i alpha.v_mn}.

    Built strip by strip in m so that very large windows never need the
    whole table at once.
    """
    lat = gp.lat
    alpha = np.asarray(gp.inc.alpha)
    m_max = int(math.ceil(radius * math.hypot(*lat.v1s))) + 1
    n_max = int(math.ceil(radius * math.hypot(*lat.v2s))) + 1
    n_all = np.arange(-n_max, n_max + 1)
    pending: List[np.ndarray] = []
    count = 0
    for m in range(-m_max, m_max + 1):
        v = lat.translate(np.full_like(n_all, m), n_all)
        v = v[np.hypot(v[:, 0], v[:, 1]) <= radius]
        if len(v):
            pending.append(v)
            count += len(v)
        if count >= block:
            vs = np.concatenate(pending)
            yield vs, np.exp(-1j * (vs @ alpha))
            pending, count = [], 0
    if pending:
        vs = np.concatenate(pending)
        yield vs, np.exp(-1j * (vs @ alpha))


def _lattice_table(gp: GreenParams, radius: float) -> Iterable[Tuple[np.ndarray, np.ndarray]]:
    block = LATTICE_BLOCK
    if gp.window_kind == "hard":
        key = ("hard", gp.A)
    else:
        key = ("smooth", float(math.ceil(radius)))
        radius = math.ceil(radius)
    if math.pi * (radius + 1.0) ** 2 / gp.lat.D > CACHE_LIMIT:
        return _StreamedTable(gp, radius, block)
    # assembly threads share one GreenParams; the first caller builds the table
    with gp._cache_lock:
        cached = gp._cache.get(key)
        if cached is None:
            cached = list(_lattice_blocks(gp, radius, block))
            gp._cache[key] = cached
    return cached


class _StreamedTable:
    """Re-iterable lattice table regenerated on every pass."""

    def __init__(self, gp: GreenParams, radius: float, block: int) -> None:
        self.gp = gp
        self.radius = radius
        self.block = block

    def __iter__(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        return _lattice_blocks(self.gp, self.radius, self.block)


def lattice_sum_batch(
    diff: ArrayLike, gp: GreenParams, skip_self: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """Windowed shifted lattice sum at many difference vectors.

    Returns (values, gradients) where gradients are taken with respect to
    the source point. With ``skip_self`` the (m, n, q) = (0, 0, 0) term is
    dropped at every point (used for the regular part of Nystrom rows).
    """
    y = _as_points(diff)
    P = len(y)
    k = gp.k
    coeffs = gp.coeffs
    smooth = gp.window_kind == "smooth"
    A = gp.A
    values = np.zeros(P, dtype=complex)
    grads = np.zeros((P, 3), dtype=complex)
    if P == 0:
        return values, grads

    reach = float(np.max(np.hypot(y[:, 0], y[:, 1])))
    radius = A + reach if smooth else A
    cell = math.hypot(*gp.lat.v1) + math.hypot(*gp.lat.v2)
    n_lat = max(1, int(math.pi * (radius + cell) ** 2 / gp.lat.D))
    rows = max(1, min(P, BLOCK_SIZE // min(n_lat, LATTICE_BLOCK)))
    table = _lattice_table(gp, radius)

    for start in range(0, P, rows):
        yc = y[start:start + rows]
        val_parts = []
        grad_parts = []
        for v, phase in table:
            lx = yc[:, 0:1] + v[None, :, 0]
            ly = yc[:, 1:2] + v[None, :, 1]
            rt2 = lx * lx + ly * ly
            if smooth:
                rt = np.sqrt(rt2)
                w = bump((rt / A - gp.window_c) / (1.0 - gp.window_c))
                dw = bump_derivative((rt / A - gp.window_c) / (1.0 - gp.window_c)) / (
                    (1.0 - gp.window_c) * A
                )
                with np.errstate(invalid="ignore", divide="ignore"):
                    dw_over_rt = np.where(rt > 0, dw / rt, 0.0)
            sv = np.zeros(lx.shape, dtype=complex)
            sl = np.zeros(lx.shape, dtype=complex)
            sz = np.zeros(lx.shape, dtype=complex)
            for q, a in enumerate(coeffs):
                zq = yc[:, 2:3] + q * gp.d
                r = np.sqrt(rt2 + zq * zq)
                near = r < POLE_GUARD
                if skip_self and q == 0:
                    self_term = (np.abs(v[None, :, 0]) + np.abs(v[None, :, 1])) == 0
                    near = near & ~self_term
                    mask = self_term
                else:
                    mask = None
                if np.any(near):
                    raise SingularityError("lattice sum evaluated at an image pole")
                with np.errstate(invalid="ignore", divide="ignore"):
                    g = np.exp(1j * k * r) / r
                    f = g * (1j * k - 1.0 / r) / r
                if mask is not None:
                    g = np.where(mask, 0.0, g)
                    f = np.where(mask, 0.0, f)
                sv += a * g
                sl += a * f
                sz += a * f * zq
            if smooth:
                wp = w * phase[None, :]
                lat_factor = wp * sl + (dw_over_rt * phase[None, :]) * sv
                val_parts.append(np.sum(wp * sv, axis=1))
                grad_parts.append(
                    np.stack(
                        [
                            np.sum(lat_factor * lx, axis=1),
                            np.sum(lat_factor * ly, axis=1),
                            np.sum(wp * sz, axis=1),
                        ],
                        axis=-1,
                    )
                )
            else:
                ph = phase[None, :]
                val_parts.append(np.sum(ph * sv, axis=1))
                grad_parts.append(
                    np.stack(
                        [
                            np.sum(ph * sl * lx, axis=1),
                            np.sum(ph * sl * ly, axis=1),
                            np.sum(ph * sz, axis=1),
                        ],
                        axis=-1,
                    )
                )
        values[start:start + rows] = np.sum(np.stack(val_parts), axis=0)
        grads[start:start + rows] = np.sum(np.stack(grad_parts), axis=0)

    scale = 1.0 / (4.0 * np.pi)
    return values * scale, -grads * scale


def qp_green_truncated(x: ArrayLike, gp: GreenParams) -> GreenValue:
    """Hard- or smooth-windowed shifted quasi-periodic lattice sum at one point."""
    vals, grads = lattice_sum_batch(x, gp)
    return GreenValue(value=complex(vals[0]), gradient_source=grads[0])


def _spectral_modes(
    inc: IncidentWave, lat: Lattice, z: float, tol: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orders whose evanescent factor e^{-|Im gamma| |z|} is at least tol."""
    decay = math.log(1.0 / tol) / abs(z)
    radius = math.sqrt(inc.k**2 + decay**2)
    j_max, l_max = _search_extent(inc.alpha, lat, radius)
    j, l = np.meshgrid(  # noqa: E741
        np.arange(-j_max, j_max + 1), np.arange(-l_max, l_max + 1), indexing="ij"
    )
    keys = np.stack([j.ravel(), l.ravel()], axis=-1)
    vs = dual_vectors(keys[:, 0], keys[:, 1], inc, lat)
    gam = rayleigh_exponent(inc.k**2 - np.sum(vs * vs, axis=1))
    keep = np.exp(-np.abs(gam.imag) * abs(z)) >= tol
    return keys[keep], vs[keep], gam[keep]


def _check_height(z: float, lat: Lattice) -> None:
    period = min(math.hypot(*lat.v1), math.hypot(*lat.v2))
    if abs(z) < MIN_SPECTRAL_HEIGHT * period:
        raise SlowConvergenceError(
            f"|z|={abs(z):.3g} is below {MIN_SPECTRAL_HEIGHT} periods; "
            "the spectral series cannot reach its truncation bound"
        )


def spectral_qp_green_classical(
    x_tilde: ArrayLike,
    z: float,
    inc: IncidentWave,
    lat: Lattice,
    tol: float = SPECTRAL_TOL,
) -> complex:
    """Classical spectral series (i/2D) sum e^{i v*.x~} e^{i gamma |z|} / gamma."""
    if wood_set(inc, lat, DEFAULT_TAU_REL):
        raise WoodFrequencyError(f"k={inc.k} is a Wood frequency; the series diverges")
    _check_height(z, lat)
    xt = np.asarray(x_tilde, dtype=float)
    _, vs, gam = _spectral_modes(inc, lat, z, tol)
    terms = np.exp(1j * (vs @ xt)) * np.exp(1j * gam * abs(z)) / gam
    return complex(1j / (2.0 * lat.D) * np.sum(terms))


def spectral_qp_green_shifted(
    x_tilde: ArrayLike, z: float, gp: GreenParams, tol: float = SPECTRAL_TOL
) -> complex:
    """Shifted spectral series with the grazing orders removed (valid for z > 0)."""
    if not z > 0:
        raise SpectralDomainError(f"shifted spectral form needs z > 0, got {z}")
    _check_height(z, gp.lat)
    xt = np.asarray(x_tilde, dtype=float)
    keys, vs, gam = _spectral_modes(gp.inc, gp.lat, z, tol)
    grazing = set(gp.wood.keys)
    keep = np.array([(int(a), int(b)) not in grazing for a, b in keys], dtype=bool)
    vs, gam = vs[keep], gam[keep]
    weight = (1.0 - np.exp(1j * gam * gp.d)) ** gp.p / gam
    terms = np.exp(1j * (vs @ xt)) * np.exp(1j * gam * z) * weight
    return complex(1j / (2.0 * gp.lat.D) * np.sum(terms))


def completion_batch(diff: ArrayLike, gp: GreenParams) -> Tuple[np.ndarray, np.ndarray]:
    """Grazing-mode plane waves v at many points, with source gradients."""
    y = _as_points(diff)
    values = np.zeros(len(y), dtype=complex)
    grads = np.zeros((len(y), 3), dtype=complex)
    if not gp.wood:
        return values, grads
    for mode in gp.wood.members:
        wave = np.array([mode.vstar[0], mode.vstar[1], mode.gamma_jl], dtype=complex)
        term = gp.b[mode.key] * np.exp(1j * (y.astype(complex) @ wave))
        values += term
        grads += -1j * term[:, None] * wave[None, :]
    scale = 1j / (2.0 * gp.lat.D)
    return values * scale, grads * scale


def grazing_completion(x_tilde: ArrayLike, z: float, gp: GreenParams) -> complex:
    """v(x~, z) = (i/2D) sum_{U} b_jl e^{i v*.x~} e^{i gamma_jl z}."""
    xt = np.asarray(x_tilde, dtype=float)
    vals, _ = completion_batch([xt[0], xt[1], z], gp)
    return complex(vals[0])


def qp_green_batch(
    diff: ArrayLike, gp: GreenParams, skip_self: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """Windowed shifted lattice sum plus grazing completion at many points."""
    vals, grads = lattice_sum_batch(diff, gp, skip_self=skip_self)
    if gp.wood:
        cv, cg = completion_batch(diff, gp)
        vals = vals + cv
        grads = grads + cg
    return vals, grads


def complete_green(x: ArrayLike, gp: GreenParams) -> GreenValue:
    """Complete Green function G^q_p = windowed shifted sum + grazing completion."""
    vals, grads = qp_green_batch(x, gp)
    return GreenValue(value=complex(vals[0]), gradient_source=grads[0])
