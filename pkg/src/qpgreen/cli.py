"""Command-line driver: solves, sweeps, Green-function convergence and references."""

import argparse
import logging
import math
import os
import sys
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bie import solve_scattering
from .config import MODES, build_green_params, build_solve_config, load_config
from .errors import ConfigError
from .report import (
    TableWriter,
    build_run_report,
    failed_row,
    read_reference,
    table_row,
    write_convergence,
    write_json,
    write_reference,
)
from .types import RunConfig, TableRow
from .validation import green_convergence
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ROW_FAILED = 1
EXIT_INVALID = 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpgreen",
        description="Quasi-periodic Green functions and grating scattering solves.",
    )
    parser.add_argument("--version", action="version", version=f"qpgreen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run the configured solve, sweep or study")
    solve.add_argument("--config", required=True, help="JSON run configuration")
    solve.add_argument("--output", help="output directory (overrides the config)")
    solve.add_argument("--mode", choices=MODES, help="override the configured mode")
    solve.add_argument("--threads", type=int, help="assembly threads")
    solve.add_argument("--seed", type=int, help="reserved; no stochastic components")
    solve.add_argument("--verbose", action="store_true", help="log progress at INFO")
    return parser


def sample_points(n: int) -> np.ndarray:
    """Fixed evaluation points over the cell with heights in [0.4, 1.0]."""
    t = (np.arange(n) + 0.5) / n
    golden = 0.5 * (math.sqrt(5.0) - 1.0)
    return np.column_stack([t, (t * n * golden) % 1.0, 0.4 + 0.6 * t])


def _reference_B00(config: RunConfig) -> Optional[complex]:
    path = config.get("reference")
    if not path or config["mode"] == "make_ref":
        return None
    if not os.path.exists(path):
        logger.warning(f"Reference file {path} not found; eps1 omitted")
        return None
    return read_reference(path)


def _points(config: RunConfig) -> List[Tuple[float, float]]:
    """(k, A) for every row of the run."""
    k = float(config["k"])
    A = float(config["green"]["A"])
    sweep = config["sweep"]
    if config["mode"] == "sweep_A":
        return [(k, float(a)) for a in sweep["A_values"]]
    if config["mode"] == "sweep_k":
        return [(float(kk), A) for kk in sweep["k_values"]]
    return [(k, A)]


def _run_solves(config: RunConfig, out_dir: str, started: float) -> int:
    ref = _reference_B00(config)
    rows: List[TableRow] = []
    last_B00: Optional[complex] = None
    last_eps = float("nan")
    with TableWriter(os.path.join(out_dir, "results.csv")) as table:
        for k, A in _points(config):
            try:
                cfg = build_solve_config(config, k=k, A=A)
                _, _, report = solve_scattering(cfg, ref_B00=ref)
                row = table_row(report)
                last_B00, last_eps = report.B00, report.eps
            except Exception as e:
                logger.warning(f"Row k={k}, A={A} failed: {e}")
                row = failed_row(config, k, A, e)
            table.write(row)
            rows.append(row)

    completed = time.time()
    write_json(
        os.path.join(out_dir, "report.json"),
        dict(build_run_report(config, rows, started, completed, B00=last_B00)),
    )
    if config["mode"] == "make_ref" and last_B00 is not None:
        path = config.get("reference") or os.path.join(out_dir, "reference.json")
        write_reference(path, last_B00, last_eps, config, completed)
    return EXIT_ROW_FAILED if any(row.get("error") for row in rows) else EXIT_OK


def _run_green_conv(config: RunConfig, out_dir: str, started: float) -> int:
    sweep = config["sweep"]
    gp = build_green_params(config)
    pts = sample_points(int(sweep.get("n_points", 10)))
    samples, fit = green_convergence(pts, gp, sweep["A_values"], float(sweep["A_ref"]))
    write_convergence(os.path.join(out_dir, "green_conv.csv"), samples)
    logger.info(f"Fitted decay slope {fit.slope:.3f} (r^2={fit.r_squared:.4f})")
    fit_info = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    write_json(
        os.path.join(out_dir, "report.json"),
        dict(build_run_report(config, [], started, time.time(), fit=fit_info)),
    )
    return EXIT_OK


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    started = time.time()
    out_dir = config["output"]
    os.makedirs(out_dir, exist_ok=True)
    logger.info(f"qpgreen {__version__}: mode {config['mode']}, output {out_dir}")
    if config["mode"] == "green_conv":
        return _run_green_conv(config, out_dir, started)
    return _run_solves(config, out_dir, started)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(
            args.config,
            output=args.output,
            mode=args.mode,
            threads=args.threads,
            seed=args.seed,
        )
    except ConfigError as e:
        logging.basicConfig(level=logging.INFO)
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    if args.verbose or not config.get("silent"):
        logging.basicConfig(level=logging.INFO)
    try:
        return run(config)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
