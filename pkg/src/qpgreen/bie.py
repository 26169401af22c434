"""Nystrom discretization of the periodic boundary integral equations.

Dirichlet problems use the combined-layer equation

    xi/2 phi(x) + int K(x, x') phi(x') ds' = -e^{-i gamma f(x~)},
    K = [i eta G(x - x') + xi dG(x - x')/dn(x')] e^{i alpha.(x~' - x~)},

Neumann problems the single-layer equation with -1/2 on the diagonal and
K = dG(x - x')/dn(x) e^{i alpha.(x~' - x~)}. Both act on periodic densities.
G is the complete shifted Green function of ``greens``.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as slinalg
from numpy.typing import ArrayLike

from .errors import GMRESConvergenceError, ProblemSizeError, ShiftNotAdmissibleError
from .greens import GreenParams, free_green_batch, qp_green_batch
from .lattice import IncidentWave, shift_admissible
from .postproc import (
    ErrorReport,
    RayleighSpectrum,
    energy_defect,
    eps1,
    rayleigh_coefficients,
)
from .quadrature import MAX_POLAR_RADIUS, PolarRule, interpolation_matrix, polar_rule, pou
from .surface import SurfaceGrid

logger = logging.getLogger(__name__)

BOUNDARY_CONDITIONS = ("dirichlet", "neumann")
DEFAULT_MAX_UNKNOWNS = 4096
MAX_GMRES_TOL = 1e-2


@dataclass(frozen=True)
class PolarSettings:
    """Radius of the partition of unity (cell units) and local rule sizes.

    The trapezoid rule only sees (1 - pou) G0, so the error of the regular
    part falls with the number of grid nodes across the disc. ``n_r`` and
    ``n_theta`` left unset follow the grid: the local rule has to integrate
    the trigonometric interpolant of an N x M density over the whole disc.
    """

    delta: float = 1.5
    n_r: Optional[int] = None
    n_theta: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.delta <= MAX_POLAR_RADIUS:
            raise ValueError(
                f"polar radius must lie in (0, {MAX_POLAR_RADIUS}] cell units, got {self.delta}"
            )
        if any(n is not None and n < 1 for n in (self.n_r, self.n_theta)):
            raise ValueError("polar rule needs at least one node per direction")

    def rule_sizes(self, N: int, M: int) -> Tuple[int, int]:
        """(n_r, n_theta) for an N x M grid."""
        # largest phase 2 pi delta |(N/2, M/2)| of an interpolant mode on the disc edge
        band = math.pi * self.delta * math.hypot(N, M)
        n_r = self.n_r or int(math.ceil(band / 4.0)) + 48
        # multiples of 4 keep the rule invariant under a swap of the lattice axes
        margin = 8.0 * band ** (1.0 / 3.0) + 16.0
        n_theta = self.n_theta or 4 * int(math.ceil((band + margin) / 4.0))
        return n_r, n_theta


@dataclass(frozen=True, eq=False)
class SolveConfig:
    """Everything needed to assemble and solve one scattering problem."""

    bc: str
    gp: GreenParams
    grid: SurfaceGrid
    xi: float = 1.0
    eta: Optional[float] = None
    gmres_tol: float = 1e-6
    gmres_maxit: int = 200
    polar: PolarSettings = field(default_factory=PolarSettings)
    max_unknowns: int = DEFAULT_MAX_UNKNOWNS
    threads: int = 1
    J_max: Optional[int] = None

    def __post_init__(self) -> None:
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.eta is None:
            object.__setattr__(self, "eta", -self.gp.k)
        if self.xi == 0 or self.eta == 0:
            raise ValueError("coupling constants xi and eta must be non-zero")
        if not self.eta / self.xi < 0:
            raise ValueError(f"couplings need eta/xi < 0, got xi={self.xi}, eta={self.eta}")
        if not 0 < self.gmres_tol <= MAX_GMRES_TOL:
            raise ValueError(f"gmres_tol must lie in (0, {MAX_GMRES_TOL}], got {self.gmres_tol}")
        if self.gmres_maxit < 1:
            raise ValueError("gmres_maxit must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.grid.spec.lat != self.gp.lat:
            raise ValueError("surface and Green function use different lattices")
        # the nearest image of every source must carry full window weight
        lat = self.gp.lat
        reach = 0.5 * (math.hypot(*lat.v1) + math.hypot(*lat.v2))
        if self.gp.window_kind == "smooth" and self.gp.A * self.gp.window_c < reach:
            raise ValueError(
                f"window A={self.gp.A} is smaller than one unit cell; "
                "the local correction needs A*window_c >= half the cell diagonal"
            )

    @property
    def inc(self) -> IncidentWave:
        return self.gp.inc

    @property
    def unknowns(self) -> int:
        return self.grid.size


@dataclass(frozen=True, eq=False)
class DensitySolution:
    """Periodic density on the N x M grid and the GMRES statistics."""

    values: np.ndarray
    iterations: int
    final_residual: float
    history: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ScatteringReport:
    """Summary of one solve in the layout of the convergence tables."""

    k: float
    N: int
    M: int
    A: float
    p: int
    d: float
    bc: str
    window_kind: str
    iterations: int
    eps: float
    eps1: Optional[float]
    B00: complex
    final_residual: float
    assembly_s: float
    solve_s: float

    @property
    def unknowns(self) -> str:
        return f"{self.N}x{self.M}"


def _kernel(
    cfg: SolveConfig,
    values: np.ndarray,
    grads: np.ndarray,
    source_normals: np.ndarray,
    target_normal: np.ndarray,
) -> np.ndarray:
    """Combine Green values and source gradients into the boundary kernel."""
    if cfg.bc == "dirichlet":
        return 1j * cfg.eta * values + cfg.xi * np.sum(source_normals * grads, axis=-1)
    # dG/dn(x) = n(x) . grad_x G = -n(x) . grad_source G
    return -(grads @ target_normal)


def periodic_kernel(
    x: ArrayLike,
    xp: ArrayLike,
    gp: GreenParams,
    bc: str,
    xi: float = 1.0,
    eta: Optional[float] = None,
    n: Optional[ArrayLike] = None,
    n_p: Optional[ArrayLike] = None,
) -> complex:
    """Periodic kernel K(x, x') between two surface points.

    ``n`` and ``n_p`` are the unit normals at x and x'. They default to
    (0, 0, 1).
    """
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}")
    eta = -gp.k if eta is None else eta
    target = np.asarray(x, dtype=float)
    source = np.asarray(xp, dtype=float)
    up = np.array([0.0, 0.0, 1.0])
    n_target = up if n is None else np.asarray(n, dtype=float)
    n_source = up if n_p is None else np.asarray(n_p, dtype=float)
    vals, grads = qp_green_batch(target - source, gp)
    if bc == "dirichlet":
        kern = 1j * eta * vals[0] + xi * np.dot(n_source, grads[0])
    else:
        kern = -np.dot(n_target, grads[0])
    phase = np.exp(1j * np.dot(np.asarray(gp.inc.alpha), source[:2] - target[:2]))
    return complex(kern * phase)


class _RowAssembler:
    """Builds operator rows; immutable after construction so rows may run in threads."""

    def __init__(self, cfg: SolveConfig, rule: PolarRule) -> None:
        grid = cfg.grid
        self.cfg = cfg
        self.rule = rule
        self.N = grid.N
        self.M = grid.M
        self.nodes = grid.flat_nodes()
        self.normals = grid.flat_normals()
        self.weights = grid.weights
        self.a = np.repeat(grid.a, grid.M)
        self.b = np.tile(grid.b, grid.N)
        self.alpha = np.asarray(cfg.inc.alpha)
        self.La0 = interpolation_matrix(rule.da, grid.N)
        self.Lb0 = interpolation_matrix(rule.db, grid.M)
        reach = int(math.ceil(rule.delta + 0.5))
        self.disc_images = [
            (ta, tb)
            for ta in range(-reach, reach + 1)
            for tb in range(-reach, reach + 1)
            if (ta, tb) != (0, 0)
        ]

    def regular(self, i: int) -> np.ndarray:
        """Trapezoid part: the lattice sum minus pou * G0 for every image inside the disc."""
        cfg = self.cfg
        gp = cfg.gp
        lat = gp.lat
        delta = cfg.polar.delta
        # nearest image: cell offset (ra, rb) in [-1/2, 1/2)^2 around the target
        da = self.a - self.a[i]
        db = self.b - self.b[i]
        sa = np.floor(da + 0.5)
        sb = np.floor(db + 0.5)
        ra = da - sa
        rb = db - sb
        src = self.nodes.copy()
        src[:, :2] -= lat.translate(sa, sb)
        diff = self.nodes[i] - src

        vals, grads = qp_green_batch(diff, gp, skip_self=True)
        cut = 1.0 - pou(np.hypot(ra, rb), delta)
        cut[i] = 0.0
        far = cut > 0
        if np.any(far):
            g0, gr0 = free_green_batch(diff[far], gp.k)
            vals[far] += cut[far] * g0
            grads[far] += cut[far, None] * gr0

        # further images of each source that the disc reaches
        for ta, tb in self.disc_images:
            eta = pou(np.hypot(ra + ta, rb + tb), delta)
            near = eta > 0
            if not np.any(near):
                continue
            shift = lat.translate(ta, tb)
            shifted = diff[near]
            shifted[:, :2] -= shift
            g0, gr0 = free_green_batch(shifted, gp.k)
            w = eta[near] * np.exp(1j * float(shift @ self.alpha))
            vals[near] -= w * g0
            grads[near] -= w[:, None] * gr0

        kern = _kernel(cfg, vals, grads, self.normals, self.normals[i])
        phase = np.exp(1j * ((src[:, :2] - self.nodes[i, :2]) @ self.alpha))
        return self.weights * kern * phase

    def local(self, i: int) -> np.ndarray:
        """Polar part around the target, folded onto the nodes by interpolation."""
        cfg = self.cfg
        rule = self.rule
        ia, ib = divmod(i, self.M)
        pts, nrm, jac = cfg.grid.spec.evaluate(self.a[i] + rule.da, self.b[i] + rule.db)
        diff = self.nodes[i] - pts
        g0, gr0 = free_green_batch(diff, cfg.gp.k)
        kern = _kernel(cfg, g0, gr0, nrm, self.normals[i])
        phase = np.exp(1j * ((pts[:, :2] - self.nodes[i, :2]) @ self.alpha))
        c = rule.weights * jac * kern * phase
        La = np.roll(self.La0, ia, axis=1)
        Lb = np.roll(self.Lb0, ib, axis=1)
        return ((La.T * c) @ Lb).ravel()

    def row(self, i: int) -> np.ndarray:
        return self.regular(i) + self.local(i)


def _check_size(cfg: SolveConfig) -> None:
    if cfg.unknowns > cfg.max_unknowns:
        raise ProblemSizeError(
            f"{cfg.unknowns} unknowns exceed the configured cap of {cfg.max_unknowns}"
        )


def assemble_operator(cfg: SolveConfig) -> np.ndarray:
    """Dense Nystrom matrix including the identity term."""
    _check_size(cfg)
    gp = cfg.gp
    if gp.p >= 1:
        ok, offending = shift_admissible(gp.d, gp.inc, gp.lat, gp.wood.tau_rel)
        if not ok:
            raise ShiftNotAdmissibleError(
                f"shift d={gp.d} annihilates orders {offending}", offending
            )
    n_r, n_theta = cfg.polar.rule_sizes(cfg.grid.N, cfg.grid.M)
    rule = polar_rule(cfg.polar.delta, n_r, n_theta)
    assembler = _RowAssembler(cfg, rule)
    n = cfg.unknowns
    operator = np.empty((n, n), dtype=complex)

    def fill(i: int) -> None:
        operator[i] = assembler.row(i)
        if i and i % max(1, n // 8) == 0:
            logger.debug(f"Assembled row {i}/{n}")

    start = time.perf_counter()
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            list(pool.map(fill, range(n)))
    else:
        for i in range(n):
            fill(i)
    diagonal = 0.5 * cfg.xi if cfg.bc == "dirichlet" else -0.5
    operator[np.diag_indices(n)] += diagonal
    logger.info(
        f"Assembled {n}x{n} {cfg.bc} operator in {time.perf_counter() - start:.1f}s "
        f"(k={gp.k}, A={gp.A}, p={gp.p})"
    )
    return operator


def rhs(cfg: SolveConfig) -> np.ndarray:
    """Right-hand side in periodic form (incident phase e^{i alpha.x~} removed)."""
    inc = cfg.inc
    nodes = cfg.grid.flat_nodes()
    trace = np.exp(-1j * inc.gamma * nodes[:, 2])
    if cfg.bc == "dirichlet":
        return -trace
    wave = np.array([inc.alpha[0], inc.alpha[1], -inc.gamma])
    return -1j * (cfg.grid.flat_normals() @ wave) * trace


def _givens(a: complex, b: complex) -> Tuple[float, complex]:
    """Rotation (c, s) with [c s; -conj(s) c] [a; b] = [r; 0]."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, 1.0 + 0j
    r = math.hypot(abs(a), abs(b))
    return abs(a) / r, (a / abs(a)) * np.conj(b) / r


def gmres_solve(
    operator: np.ndarray, b: np.ndarray, tol: float = 1e-6, maxit: int = 200
) -> DensitySolution:
    """Unrestarted GMRES with twice-orthogonalized Arnoldi and Givens updates.

    The returned ``values`` are flat; callers reshape to the grid.
    """
    A = np.asarray(operator)
    b = np.asarray(b, dtype=complex)
    n = len(b)
    if A.ndim != 2 or A.shape != (n, n):
        raise ValueError(f"operator of shape {A.shape} does not match rhs of length {n}")
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return DensitySolution(values=np.zeros(n, dtype=complex), iterations=0, final_residual=0.0)

    m = min(maxit, n)
    Q = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    cs = np.zeros(m)
    sn = np.zeros(m, dtype=complex)
    beta = np.zeros(m + 1, dtype=complex)
    beta[0] = b_norm
    Q[:, 0] = b / b_norm
    history: List[float] = []

    steps = 0
    for j in range(m):
        w = A @ Q[:, j]
        for _ in range(2):
            h = Q[:, : j + 1].conj().T @ w
            H[: j + 1, j] += h
            w = w - Q[:, : j + 1] @ h
        h_next = float(np.linalg.norm(w))
        H[j + 1, j] = h_next
        breakdown = h_next <= 1e-14 * float(np.max(np.abs(H[: j + 1, j])))
        if not breakdown:
            Q[:, j + 1] = w / h_next

        for i in range(j):
            top = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = top
        cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
        H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
        H[j + 1, j] = 0.0
        beta[j + 1] = -np.conj(sn[j]) * beta[j]
        beta[j] = cs[j] * beta[j]

        steps = j + 1
        res = abs(beta[j + 1]) / b_norm
        history.append(float(res))
        logger.debug(f"GMRES iteration {steps}: residual {res:.3e}")
        if res <= tol or breakdown:
            break

    y = slinalg.solve_triangular(H[:steps, :steps], beta[:steps])
    x = Q[:, :steps] @ y
    residual = float(np.linalg.norm(A @ x - b) / b_norm)
    if history[-1] > tol:
        raise GMRESConvergenceError(
            f"GMRES stopped after {steps} iterations at residual {residual:.3e} (tol {tol:.1e})",
            best=x,
            residual=residual,
            iterations=steps,
        )
    return DensitySolution(
        values=x, iterations=steps, final_residual=residual, history=tuple(history)
    )


def solve_scattering(
    cfg: SolveConfig, ref_B00: Optional[complex] = None
) -> Tuple[DensitySolution, RayleighSpectrum, ScatteringReport]:
    """Assemble, solve and post-process one configuration."""
    start = time.perf_counter()
    operator = assemble_operator(cfg)
    assembled = time.perf_counter()
    flat = gmres_solve(operator, rhs(cfg), tol=cfg.gmres_tol, maxit=cfg.gmres_maxit)
    solved = time.perf_counter()
    density = DensitySolution(
        values=flat.values.reshape(cfg.grid.N, cfg.grid.M),
        iterations=flat.iterations,
        final_residual=flat.final_residual,
        history=flat.history,
    )

    spectrum = rayleigh_coefficients(density, cfg, cfg.J_max)
    errors = ErrorReport(
        eps=energy_defect(spectrum),
        eps1=None if ref_B00 is None else eps1(spectrum, ref_B00),
        iterations=density.iterations,
    )
    gp = cfg.gp
    report = ScatteringReport(
        k=gp.k,
        N=cfg.grid.N,
        M=cfg.grid.M,
        A=gp.A,
        p=gp.p,
        d=gp.d,
        bc=cfg.bc,
        window_kind=gp.window_kind,
        iterations=errors.iterations,
        eps=errors.eps,
        eps1=errors.eps1,
        B00=spectrum.coeffs[(0, 0)],
        final_residual=density.final_residual,
        assembly_s=assembled - start,
        solve_s=solved - assembled,
    )
    logger.info(
        f"Solved k={report.k} {report.unknowns} A={report.A} p={report.p}: "
        f"{report.iterations} iterations, eps={report.eps:.3e}"
    )
    return density, spectrum, report
