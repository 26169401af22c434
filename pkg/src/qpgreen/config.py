"""Run configuration: defaults, JSON loading, validation and object builders."""

import copy
import json
import logging
import os
from typing import Any, Dict, List, Mapping, Optional

from .bie import DEFAULT_MAX_UNKNOWNS, PolarSettings, SolveConfig
from .errors import ConfigError, QPGreenError
from .greens import GreenParams
from .lattice import IncidentWave, Lattice, dual_basis, incident_from_angles, wood_set
from .surface import SurfaceSpec, build_grid, harmonics_from_table
from .types import RunConfig

logger = logging.getLogger(__name__)

MODES = ("solve", "sweep_A", "sweep_k", "green_conv", "make_ref")


def _get_default_config() -> RunConfig:
    """Every default, with QPGREEN_* environment overrides."""
    return {
        "mode": "solve",
        "k": 1.0,
        "alpha": [0.0, 0.0],
        "angles": None,
        "surface": {
            "kind": "cosine_product",
            "amplitude": 0.5,
            "v1": [1.0, 0.0],
            "v2": [0.0, 1.0],
            "harmonics": [],
        },
        "green": {
            "p": 0,
            "d": 1.4,
            "A": 40.0,
            "window_kind": "smooth",
            "window_c": 0.5,
            "tau_rel": 1e-3,
            "b": [1.0, 0.0],
        },
        "solver": {
            "bc": "dirichlet",
            "N": 16,
            "M": 16,
            "xi": 1.0,
            "eta": None,
            "gmres_tol": 1e-6,
            "gmres_maxit": 200,
            "J_max": None,
        },
        "quadrature": {"delta": 1.5, "n_r": None, "n_theta": None},
        "sweep": {"A_values": [], "k_values": [], "A_ref": 1280.0, "n_points": 10},
        "reference": None,
        "output": os.getenv("QPGREEN_OUTPUT_DIR", "results"),
        "threads": int(os.getenv("QPGREEN_THREADS", "1")),
        "seed": 0,
        "silent": os.getenv("QPGREEN_SILENT", "true").lower() == "true",
        "max_unknowns": int(os.getenv("QPGREEN_MAX_UNKNOWNS", str(DEFAULT_MAX_UNKNOWNS))),
    }


def _merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Merge nested sections key-wise; scalars and lists are replaced."""
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)
    return base


def load_config(path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """Defaults, then the JSON file, then non-None keyword overrides; validated."""
    config: Dict[str, Any] = dict(_get_default_config())
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                content = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(content, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        _merge(config, content)
    _merge(config, {key: value for key, value in overrides.items() if value is not None})
    validate_config(config)  # type: ignore[arg-type]
    return config  # type: ignore[return-value]


def build_lattice(config: RunConfig) -> Lattice:
    surface = config["surface"]
    return dual_basis(surface.get("v1", [1.0, 0.0]), surface.get("v2", [0.0, 1.0]))


def build_incident(config: RunConfig, k: Optional[float] = None) -> IncidentWave:
    """Incident wave from ``alpha`` or, when given, ``angles`` = [theta, phi]."""
    k = config["k"] if k is None else k
    angles = config.get("angles")
    if angles:
        return incident_from_angles(k, float(angles[0]), float(angles[1]))
    return IncidentWave(k=k, alpha=tuple(config["alpha"]))  # type: ignore[arg-type]


def build_surface(config: RunConfig) -> SurfaceSpec:
    surface = config["surface"]
    return SurfaceSpec(
        kind=surface.get("kind", "cosine_product"),
        amplitude=float(surface.get("amplitude", 0.5)),
        lat=build_lattice(config),
        harmonics=harmonics_from_table(surface.get("harmonics", [])),
    )


def build_green_params(
    config: RunConfig, k: Optional[float] = None, A: Optional[float] = None
) -> GreenParams:
    """GreenParams at the configured (or given) wavenumber and window radius."""
    green = config["green"]
    lat = build_lattice(config)
    inc = build_incident(config, k)
    wood = wood_set(inc, lat, float(green.get("tau_rel", 1e-3)))
    b_re, b_im = green.get("b", [1.0, 0.0])
    return GreenParams(
        inc=inc,
        lat=lat,
        p=int(green.get("p", 0)),
        d=float(green.get("d", 1.4)),
        A=float(green.get("A", 40.0) if A is None else A),
        window_c=float(green.get("window_c", 0.5)),
        window_kind=green.get("window_kind", "smooth"),
        wood=wood,
        b={key: complex(b_re, b_im) for key in wood.keys},
    )


def build_solve_config(
    config: RunConfig, k: Optional[float] = None, A: Optional[float] = None
) -> SolveConfig:
    solver = config["solver"]
    quad = config["quadrature"]
    eta = solver.get("eta")
    return SolveConfig(
        bc=solver.get("bc", "dirichlet"),
        gp=build_green_params(config, k, A),
        grid=build_grid(build_surface(config), int(solver["N"]), int(solver["M"])),
        xi=float(solver.get("xi", 1.0)),
        eta=None if eta is None else float(eta),
        gmres_tol=float(solver.get("gmres_tol", 1e-6)),
        gmres_maxit=int(solver.get("gmres_maxit", 200)),
        polar=PolarSettings(
            delta=float(quad.get("delta", 1.5)),
            n_r=_optional_int(quad.get("n_r")),
            n_theta=_optional_int(quad.get("n_theta")),
        ),
        max_unknowns=int(config.get("max_unknowns", DEFAULT_MAX_UNKNOWNS)),
        threads=int(config.get("threads", 1)),
        J_max=solver.get("J_max"),
    )


def _optional_int(value: Any) -> Optional[int]:
    return None if value is None else int(value)


def _sweep_points(config: RunConfig) -> List[Dict[str, float]]:
    sweep = config["sweep"]
    mode = config["mode"]
    if mode == "sweep_A":
        return [{"A": float(a)} for a in sweep.get("A_values", [])]
    if mode == "sweep_k":
        return [{"k": float(k)} for k in sweep.get("k_values", [])]
    return [{}]


def validate_config(config: RunConfig) -> None:
    """Raise ConfigError naming the offending key."""
    mode = config.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode: unknown mode {mode!r} (expected one of {MODES})")
    sweep = config["sweep"]
    if mode == "sweep_A" and not sweep.get("A_values"):
        raise ConfigError("sweep.A_values: must be non-empty for sweep_A")
    if mode == "sweep_k" and not sweep.get("k_values"):
        raise ConfigError("sweep.k_values: must be non-empty for sweep_k")
    if mode == "green_conv":
        A_values = sweep.get("A_values") or []
        if len(A_values) < 3:
            raise ConfigError("sweep.A_values: green_conv needs at least three radii")
        if float(sweep.get("A_ref", 0.0)) <= max(A_values):
            raise ConfigError("sweep.A_ref: must exceed every entry of sweep.A_values")
    if int(config.get("threads", 1)) < 1:
        raise ConfigError("threads: must be at least 1")
    solver = config["solver"]
    for key in ("N", "M"):
        n = int(solver.get(key, 0))
        if n < 4 or n % 2:
            raise ConfigError(f"solver.{key}: must be even and at least 4, got {n}")
    unknowns = int(solver["N"]) * int(solver["M"])
    if unknowns > int(config.get("max_unknowns", DEFAULT_MAX_UNKNOWNS)):
        raise ConfigError(f"solver.N: {unknowns} unknowns exceed max_unknowns")
    reference = config.get("reference")
    if reference and mode != "make_ref" and not os.path.exists(reference):
        logger.warning(f"Reference file {reference} not found; eps1 will be omitted")

    for point in _sweep_points(config):
        try:
            if mode == "green_conv":
                build_green_params(config, point.get("k"), point.get("A"))
            else:
                build_solve_config(config, point.get("k"), point.get("A"))
        except (QPGreenError, ValueError) as e:
            raise ConfigError(f"{_key_hint(e)}: {e}") from e


def _key_hint(error: Exception) -> str:
    text = str(error)
    if "polar" in text:
        return "quadrature"
    if "annihilates" in text:
        return "green.d"
    if "order" in text or "p=" in text:
        return "green.p"
    if "eta" in text or "xi" in text:
        return "solver.eta"
    if "window" in text:
        return "green.A"
    if "grid" in text:
        return "solver.N"
    if "alpha" in text or "wavenumber" in text:
        return "k"
    return "config"
