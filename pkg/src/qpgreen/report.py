"""Result files: table CSV, JSON run report and JSON reference solutions."""

import csv
import json
import logging
import os
from datetime import datetime, timezone
from typing import IO, Any, Dict, List, Optional

import numpy as np

from .bie import ScatteringReport
from .errors import ConfigError
from .types import ReferenceRecord, RunConfig, RunReport, TableRow
from .version import __version__

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "k",
    "unknowns",
    "A",
    "iters",
    "eps1",
    "eps",
    "B00_re",
    "B00_im",
    "p",
    "d",
    "bc",
    "window_kind",
    "error",
]
ERROR_COLUMNS = {"eps1", "eps"}


def _to_iso8601(timestamp: float) -> str:
    """UTC ISO 8601 text for a Unix timestamp, with a Z suffix."""
    return (
        datetime.fromtimestamp(timestamp, tz=timezone.utc)
        .isoformat()
        .replace("+00:00", "Z")
    )


def _format(column: str, value: Any) -> str:
    """Shortest round-trip text; error columns in scientific notation."""
    if value is None:
        return ""
    if isinstance(value, float):
        if column in ERROR_COLUMNS:
            return np.format_float_scientific(value, unique=True)
        return repr(value)
    return str(value)


def table_row(report: ScatteringReport) -> TableRow:
    return {
        "k": report.k,
        "unknowns": report.unknowns,
        "A": report.A,
        "iters": report.iterations,
        "eps1": report.eps1,
        "eps": report.eps,
        "B00_re": report.B00.real,
        "B00_im": report.B00.imag,
        "p": report.p,
        "d": report.d,
        "bc": report.bc,
        "window_kind": report.window_kind,
        "error": "",
    }


def failed_row(config: RunConfig, k: float, A: float, error: BaseException) -> TableRow:
    """Row for a sweep point that raised; parameters echoed, results empty."""
    solver = config["solver"]
    green = config["green"]
    return {
        "k": k,
        "unknowns": f"{solver['N']}x{solver['M']}",
        "A": A,
        "iters": None,
        "eps1": None,
        "eps": None,
        "B00_re": None,
        "B00_im": None,
        "p": int(green["p"]),
        "d": float(green["d"]),
        "bc": solver["bc"],
        "window_kind": green["window_kind"],
        "error": f"{type(error).__name__}: {error}",
    }


class TableWriter:
    """CSV writer that flushes after every row so partial sweeps survive."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._fh: Optional[IO[str]] = None
        self._writer: Any = None

    def __enter__(self) -> "TableWriter":
        os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_COLUMNS)
        return self

    def write(self, row: TableRow) -> None:
        if self._fh is None:
            raise RuntimeError("TableWriter used outside of its context")
        self._writer.writerow([_format(c, row.get(c)) for c in CSV_COLUMNS])
        self._fh.flush()

    def __exit__(self, *exc: Any) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_table(path: str) -> List[Dict[str, str]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def build_run_report(
    config: RunConfig,
    rows: List[TableRow],
    started: float,
    completed: float,
    B00: Optional[complex] = None,
    fit: Optional[Dict[str, float]] = None,
) -> RunReport:
    return {
        "version": __version__,
        "mode": config["mode"],
        "started_at": _to_iso8601(started),
        "completed_at": _to_iso8601(completed),
        "duration_s": completed - started,
        "config": dict(config),
        "rows": rows,
        "B00": None if B00 is None else [B00.real, B00.imag],
        "fit": fit,
        "failures": sum(1 for row in rows if row.get("error")),
    }


def write_json(path: str, payload: Dict[str, Any]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def write_reference(path: str, B00: complex, eps: float, config: RunConfig, created: float) -> None:
    record: ReferenceRecord = {
        "version": __version__,
        "created_at": _to_iso8601(created),
        "B00": [B00.real, B00.imag],
        "eps": eps,
        "config": dict(config),
    }
    write_json(path, dict(record))
    logger.info(f"Wrote reference B00={B00} to {path}")


def read_reference(path: str) -> complex:
    """B00 stored by ``write_reference``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            record = json.load(fh)
        re, im = record["B00"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"reference file {path} is unreadable: {e}") from e
    return complex(float(re), float(im))


def write_convergence(path: str, samples: List[Any]) -> None:
    """(A, max error) pairs of a Green-function convergence study."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["A", "max_error"])
        for A, err in samples:
            writer.writerow([repr(float(A)), np.format_float_scientific(err, unique=True)])
