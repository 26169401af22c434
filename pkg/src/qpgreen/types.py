"""Serialized record types for qpgreen (config file, reports, table rows)."""

from typing import Any, Dict, List, Optional

from typing_extensions import TypedDict


class SurfaceConfig(TypedDict, total=False):
    """Scattering surface selection."""

    kind: str  # cosine_product | flat | custom_harmonic
    amplitude: float
    v1: List[float]
    v2: List[float]
    # custom_harmonic only: [[m, n, cos_coeff, sin_coeff], ...]
    harmonics: List[List[float]]


class GreenConfig(TypedDict, total=False):
    """Green-function parameters."""

    p: int
    d: float
    A: float
    window_kind: str  # smooth | hard
    window_c: float
    tau_rel: float
    b: List[float]  # [re, im], applied to every grazing order


class QuadratureConfig(TypedDict, total=False):
    """Local polar rule around each target."""

    delta: float  # cell units
    n_r: Optional[int]  # None follows the grid
    n_theta: Optional[int]


class SolverConfig(TypedDict, total=False):
    """Boundary condition, couplings and GMRES settings."""

    bc: str  # dirichlet | neumann
    N: int
    M: int
    xi: float
    eta: Optional[float]
    gmres_tol: float
    gmres_maxit: int
    J_max: Optional[int]


class SweepConfig(TypedDict, total=False):
    """Sweep lists and the Green-function convergence study."""

    A_values: List[float]
    k_values: List[float]
    A_ref: float
    n_points: int


class RunConfig(TypedDict, total=False):
    """Complete CLI run configuration."""

    mode: str  # solve | sweep_A | sweep_k | green_conv | make_ref
    k: float
    alpha: List[float]
    angles: Optional[List[float]]  # [theta, phi]; overrides alpha when set
    surface: SurfaceConfig
    green: GreenConfig
    solver: SolverConfig
    quadrature: QuadratureConfig
    sweep: SweepConfig
    reference: Optional[str]
    output: str
    threads: int
    seed: int
    silent: bool
    max_unknowns: int


class TableRow(TypedDict, total=False):
    """One CSV row in the layout of the convergence tables."""

    k: float
    unknowns: str
    A: float
    iters: Optional[int]
    eps1: Optional[float]
    eps: Optional[float]
    B00_re: Optional[float]
    B00_im: Optional[float]
    p: int
    d: float
    bc: str
    window_kind: str
    error: str


class RunReport(TypedDict, total=False):
    """Machine-readable summary written after every run."""

    version: str
    mode: str
    started_at: str
    completed_at: str
    duration_s: float
    config: Dict[str, Any]
    rows: List[TableRow]
    B00: Optional[List[float]]
    fit: Optional[Dict[str, float]]
    failures: int


class ReferenceRecord(TypedDict, total=False):
    """Stored reference solution used for eps1 comparisons."""

    version: str
    created_at: str
    B00: List[float]  # [re, im]
    eps: float
    config: Dict[str, Any]
