"""
qpgreen - Quasi-periodic Helmholtz Green functions for doubly periodic gratings.

Usage:
    from qpgreen import GreenParams, IncidentWave, complete_green, unit_lattice

    gp = GreenParams(inc=IncidentWave(k=6.283185307179586), lat=unit_lattice(), p=3, d=1.4)
    complete_green([0.1, 0.2, 0.3], gp).value

    # Or drive full scattering runs from a JSON config:
    #   qpgreen solve --config configs/cosine_k1_p0.json
"""

import logging

from .bie import (
    DensitySolution,
    PolarSettings,
    ScatteringReport,
    SolveConfig,
    assemble_operator,
    gmres_solve,
    periodic_kernel,
    rhs,
    solve_scattering,
)
from .config import build_solve_config, load_config
from .errors import (
    ConfigError,
    DegenerateBasisError,
    DegenerateFitError,
    DegenerateIncidenceError,
    GMRESConvergenceError,
    OrderTooLargeError,
    ProblemSizeError,
    QPGreenError,
    QuadratureResolutionWarning,
    ResolutionError,
    ShiftNotAdmissibleError,
    SingularityError,
    SlowConvergenceError,
    SpectralDomainError,
    WoodFrequencyError,
)
from .greens import (
    GreenParams,
    GreenValue,
    HProbe,
    chi,
    complete_green,
    fd_coeffs,
    free_green,
    grazing_completion,
    h_function,
    qp_green_batch,
    qp_green_truncated,
    shifted_green,
    spectral_qp_green_classical,
    spectral_qp_green_shifted,
)
from .lattice import (
    IncidentWave,
    Lattice,
    ModeIndex,
    WoodSet,
    dual_basis,
    gamma_exponent,
    incident_from_angles,
    mode_window,
    propagating_set,
    shift_admissible,
    unit_lattice,
    wood_set,
    wood_wavenumbers,
)
from .postproc import (
    ErrorReport,
    RayleighSpectrum,
    energy_defect,
    eps1,
    evaluate_potential,
    plane_sampled_coefficients,
    rayleigh_coefficients,
)
from .surface import SurfaceGrid, SurfaceSpec, build_grid
from .validation import (
    RateFit,
    fit_decay_rate,
    green_convergence,
    helmholtz_residual,
    quasi_periodicity_defect,
)
from .version import __version__

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "__version__",
    # lattice
    "Lattice",
    "IncidentWave",
    "ModeIndex",
    "WoodSet",
    "dual_basis",
    "unit_lattice",
    "incident_from_angles",
    "gamma_exponent",
    "mode_window",
    "wood_set",
    "propagating_set",
    "shift_admissible",
    "wood_wavenumbers",
    # greens
    "GreenParams",
    "GreenValue",
    "HProbe",
    "fd_coeffs",
    "chi",
    "free_green",
    "shifted_green",
    "h_function",
    "qp_green_truncated",
    "qp_green_batch",
    "spectral_qp_green_classical",
    "spectral_qp_green_shifted",
    "grazing_completion",
    "complete_green",
    # surface
    "SurfaceSpec",
    "SurfaceGrid",
    "build_grid",
    # bie
    "SolveConfig",
    "PolarSettings",
    "DensitySolution",
    "ScatteringReport",
    "periodic_kernel",
    "assemble_operator",
    "rhs",
    "gmres_solve",
    "solve_scattering",
    # postproc
    "RayleighSpectrum",
    "ErrorReport",
    "rayleigh_coefficients",
    "energy_defect",
    "eps1",
    "evaluate_potential",
    "plane_sampled_coefficients",
    # validation
    "RateFit",
    "helmholtz_residual",
    "quasi_periodicity_defect",
    "fit_decay_rate",
    "green_convergence",
    # config
    "load_config",
    "build_solve_config",
    # errors
    "QPGreenError",
    "DegenerateBasisError",
    "OrderTooLargeError",
    "SingularityError",
    "ShiftNotAdmissibleError",
    "WoodFrequencyError",
    "SlowConvergenceError",
    "SpectralDomainError",
    "ResolutionError",
    "ProblemSizeError",
    "GMRESConvergenceError",
    "DegenerateIncidenceError",
    "DegenerateFitError",
    "ConfigError",
    "QuadratureResolutionWarning",
]
