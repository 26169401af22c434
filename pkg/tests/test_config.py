"""Tests for run configuration loading and validation."""

import math

import pytest

from qpgreen import ConfigError, load_config
from qpgreen.config import _get_default_config, build_incident, build_solve_config

TWO_PI = 2.0 * math.pi


@pytest.mark.unit
class TestDefaults:
    """Test the default configuration."""

    def test_defaults(self, monkeypatch):
        """Test the documented defaults without environment overrides."""
        for name in ("QPGREEN_OUTPUT_DIR", "QPGREEN_THREADS", "QPGREEN_SILENT", "QPGREEN_MAX_UNKNOWNS"):
            monkeypatch.delenv(name, raising=False)
        config = _get_default_config()
        assert config["mode"] == "solve"
        assert config["green"]["A"] == 40.0
        assert config["green"]["tau_rel"] == 1e-3
        assert config["solver"]["gmres_tol"] == 1e-6
        assert config["quadrature"] == {"delta": 1.5, "n_r": None, "n_theta": None}
        assert config["output"] == "results"
        assert config["threads"] == 1
        assert config["silent"] is True
        assert config["max_unknowns"] == 4096

    def test_environment(self, monkeypatch):
        """Test QPGREEN_* variables feed the defaults."""
        monkeypatch.setenv("QPGREEN_OUTPUT_DIR", "/tmp/qp")
        monkeypatch.setenv("QPGREEN_THREADS", "3")
        monkeypatch.setenv("QPGREEN_SILENT", "false")
        config = _get_default_config()
        assert config["output"] == "/tmp/qp"
        assert config["threads"] == 3
        assert config["silent"] is False


@pytest.mark.unit
class TestLoadConfig:
    """Test loading and merging."""

    def test_file_merges_sections(self, write_config, small_config):
        """Test nested sections are merged key-wise."""
        config = load_config(write_config(small_config))
        assert config["green"]["A"] == 4.0
        assert config["green"]["d"] == 1.4
        assert config["solver"]["N"] == 4
        assert config["solver"]["bc"] == "dirichlet"

    def test_overrides_win(self, write_config, small_config):
        """Test keyword overrides replace file values and None is ignored."""
        config = load_config(write_config(small_config), output="elsewhere", mode=None)
        assert config["output"] == "elsewhere"
        assert config["mode"] == "solve"

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "absent.json"))

    def test_bad_json(self, tmp_path):
        """Test malformed JSON raises ConfigError."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_non_object(self, tmp_path):
        """Test a JSON list raises ConfigError."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_angles_override_alpha(self, write_config, small_config):
        """Test angles = [theta, phi] set alpha = k sin(theta) (cos phi, sin phi)."""
        small_config["angles"] = [math.pi / 6, 0.0]
        inc = build_incident(load_config(write_config(small_config)))
        assert inc.alpha[0] == pytest.approx(0.5)
        assert inc.gamma == pytest.approx(math.sqrt(3) / 2)

    def test_build_solve_config(self, write_config, small_config):
        """Test the solve configuration mirrors the file."""
        cfg = build_solve_config(load_config(write_config(small_config)))
        assert cfg.grid.N == 4
        assert cfg.gp.A == 4.0
        assert cfg.eta == -1.0
        assert cfg.polar.n_r == 8


@pytest.mark.unit
class TestValidation:
    """Test ConfigError reporting."""

    def _expect(self, write_config, config, key):
        with pytest.raises(ConfigError) as exc:
            load_config(write_config(config))
        assert str(exc.value).startswith(key)

    def test_unknown_mode(self, write_config, small_config):
        """Test an unknown mode is rejected."""
        small_config["mode"] = "bogus"
        self._expect(write_config, small_config, "mode")

    def test_empty_sweep(self, write_config, small_config):
        """Test sweep_A without radii is rejected."""
        small_config["mode"] = "sweep_A"
        self._expect(write_config, small_config, "sweep.A_values")

    def test_green_conv_reference(self, write_config, small_config):
        """Test A_ref must exceed the sweep radii."""
        small_config["mode"] = "green_conv"
        small_config["sweep"] = {"A_values": [10, 20, 40], "A_ref": 40}
        self._expect(write_config, small_config, "sweep.A_ref")

    def test_positive_eta(self, write_config, small_config):
        """Test eta > 0 is rejected."""
        small_config["solver"]["eta"] = 1.0
        self._expect(write_config, small_config, "solver.eta")

    def test_odd_grid(self, write_config, small_config):
        """Test odd N is rejected."""
        small_config["solver"]["N"] = 5
        self._expect(write_config, small_config, "solver.N")

    def test_unknown_cap(self, write_config, small_config):
        """Test grids beyond max_unknowns are rejected."""
        small_config["max_unknowns"] = 8
        self._expect(write_config, small_config, "solver.N")

    def test_low_order_at_wood(self, write_config, small_config):
        """Test p=0 at k = 2 pi points at green.p."""
        small_config["k"] = TWO_PI
        self._expect(write_config, small_config, "green.p")

    def test_resonant_shift(self, write_config, small_config):
        """Test d=1 at k = 2 pi points at green.d."""
        small_config["k"] = TWO_PI
        small_config["green"] = {"p": 3, "d": 1.0, "A": 4.0}
        self._expect(write_config, small_config, "green.d")

    def test_small_window(self, write_config, small_config):
        """Test a smooth window below one cell points at green.A."""
        small_config["green"]["A"] = 1.0
        self._expect(write_config, small_config, "green.A")

    def test_sweep_points_checked(self, write_config, small_config):
        """Test each sweep wavenumber is validated."""
        small_config["mode"] = "sweep_k"
        small_config["sweep"] = {"k_values": [1.0, TWO_PI]}
        self._expect(write_config, small_config, "green.p")

    def test_polar_radius(self, write_config, small_config):
        """Test a local disc wider than two cells points at quadrature."""
        small_config["quadrature"]["delta"] = 2.5
        self._expect(write_config, small_config, "quadrature")
