"""Tests for result files."""

import json

import pytest

from qpgreen import ConfigError, ScatteringReport
from qpgreen.report import (
    CSV_COLUMNS,
    TableWriter,
    _format,
    _to_iso8601,
    build_run_report,
    failed_row,
    read_reference,
    read_table,
    table_row,
    write_convergence,
    write_reference,
)


@pytest.fixture
def report():
    """A finished solve summary."""
    return ScatteringReport(
        k=1.0,
        N=16,
        M=16,
        A=40.0,
        p=0,
        d=1.4,
        bc="dirichlet",
        window_kind="smooth",
        iterations=12,
        eps=3.1e-9,
        eps1=None,
        B00=complex(-0.25, 0.5),
        final_residual=1e-7,
        assembly_s=1.0,
        solve_s=0.1,
    )


@pytest.mark.unit
class TestFormatting:
    """Test cell formatting."""

    def test_to_iso8601(self):
        """Test the epoch converts to UTC."""
        assert _to_iso8601(0) == "1970-01-01T00:00:00Z"

    def test_format(self):
        """Test round-trip floats, scientific errors and empty None."""
        assert _format("A", 0.1) == "0.1"
        assert _format("eps", 3.1e-9) == "3.1e-09"
        assert _format("eps1", None) == ""
        assert _format("iters", 12) == "12"


@pytest.mark.unit
class TestTable:
    """Test the CSV table."""

    def test_rows_round_trip(self, tmp_path, report):
        """Test a written row reads back with every column."""
        path = str(tmp_path / "out" / "results.csv")
        config = {"solver": {"N": 16, "M": 16, "bc": "dirichlet"},
                  "green": {"p": 0, "d": 1.4, "window_kind": "smooth"}}
        with TableWriter(path) as table:
            table.write(table_row(report))
            table.write(failed_row(config, 2.0, 40.0, ValueError("boom")))
        rows = read_table(path)
        assert list(rows[0]) == CSV_COLUMNS
        assert rows[0]["unknowns"] == "16x16"
        assert float(rows[0]["B00_im"]) == 0.5
        assert rows[0]["eps1"] == ""
        assert rows[0]["error"] == ""
        assert rows[1]["error"] == "ValueError: boom"
        assert rows[1]["iters"] == ""

    def test_write_outside_context(self, tmp_path, report):
        """Test writing without entering the context raises."""
        with pytest.raises(RuntimeError):
            TableWriter(str(tmp_path / "t.csv")).write(table_row(report))

    def test_run_report_counts_failures(self, report):
        """Test failures are counted from the error column."""
        rows = [table_row(report), {"error": "ValueError: x"}]
        payload = build_run_report({"mode": "sweep_A"}, rows, 0.0, 2.5, B00=report.B00)
        assert payload["failures"] == 1
        assert payload["duration_s"] == 2.5
        assert payload["B00"] == [-0.25, 0.5]

    def test_convergence_file(self, tmp_path):
        """Test the Green convergence CSV layout."""
        path = str(tmp_path / "green_conv.csv")
        write_convergence(path, [(10.0, 1e-3), (20.0, 2.5e-4)])
        assert read_table(path) == [
            {"A": "10.0", "max_error": "1.e-03"},
            {"A": "20.0", "max_error": "2.5e-04"},
        ]


@pytest.mark.unit
class TestReference:
    """Test reference solutions."""

    def test_round_trip(self, tmp_path):
        """Test B00 survives write and read."""
        path = str(tmp_path / "ref.json")
        write_reference(path, complex(-0.3, 0.7), 1e-10, {"mode": "make_ref"}, 0.0)
        assert read_reference(path) == complex(-0.3, 0.7)
        with open(path) as fh:
            assert json.load(fh)["created_at"] == "1970-01-01T00:00:00Z"

    def test_unreadable(self, tmp_path):
        """Test a malformed reference raises ConfigError."""
        path = tmp_path / "ref.json"
        path.write_text(json.dumps({"B00": "nope"}))
        with pytest.raises(ConfigError):
            read_reference(str(path))
        with pytest.raises(ConfigError):
            read_reference(str(tmp_path / "absent.json"))
