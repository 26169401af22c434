"""Regression runs of the cosine-grating convergence studies."""

import os

import pytest

from qpgreen import load_config, solve_scattering
from qpgreen.config import build_solve_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

pytestmark = [
    pytest.mark.slow,
    pytest.mark.filterwarnings("ignore::qpgreen.QuadratureResolutionWarning"),
]


def _run(name, tmp_path, solver=None, **point):
    config = load_config(
        os.path.join(CONFIG_DIR, name), output=str(tmp_path), reference="", solver=solver
    )
    _, _, report = solve_scattering(build_solve_config(config, **point))
    return report


def _within_factor(value, expected, factor):
    return expected / factor <= value <= expected * factor


class TestCosineNonWood:
    """Cosine grating at k=1, p=0, 16x16."""

    def test_energy_defect_and_iterations(self, tmp_path):
        """Test eps tracks the reference column and GMRES stays under 25 iterations."""
        expected = {30.0: 1.8e-1, 60.0: 6.6e-3, 120.0: 4.3e-4}
        eps = []
        for A, target in expected.items():
            report = _run("cosine_k1_p0.json", tmp_path, A=A)
            assert _within_factor(report.eps, target, 5), (A, report.eps)
            assert report.iterations <= 25
            eps.append(report.eps)
        assert eps == sorted(eps, reverse=True)

    def test_grid_self_convergence(self, tmp_path):
        """Test eps grows by no more than a factor of 3 along 12x12, 16x16, 24x24 at A=120."""
        eps = [
            _run("cosine_k1_p0.json", tmp_path, solver={"N": n, "M": n}, A=120.0).eps
            for n in (12, 16, 24)
        ]
        assert all(later <= 3 * earlier for earlier, later in zip(eps, eps[1:])), eps


class TestCosineShifted:
    """Cosine grating at k=6 with the p=3, d=2.4 shifted kernel, 16x16."""

    def test_energy_defect(self, tmp_path):
        """Test eps within a factor of 5 of the reference column."""
        for A, target in {30.0: 1.2e-2, 60.0: 1.5e-5, 80.0: 2.3e-6}.items():
            report = _run("cosine_k6_p3.json", tmp_path, A=A)
            assert (report.p, report.d) == (3, 2.4)
            assert _within_factor(report.eps, target, 5), (A, report.eps)


class TestWoodDirichlet:
    """Dirichlet problem at the Wood wavenumber k = 2 pi."""

    def test_energy_defect(self, tmp_path):
        """Test eps within a factor of 5 of the reference column."""
        for A, target in {20.0: 1.7e-2, 30.0: 4.7e-3, 40.0: 4.0e-4}.items():
            report = _run("wood_dirichlet.json", tmp_path, A=A)
            assert _within_factor(report.eps, target, 5), (A, report.eps)
            assert report.iterations <= 40

    def test_near_wood_rows(self, tmp_path):
        """Test k = 2 pi +- 1e-6 match the at-Wood defect within a factor of 2."""
        config = load_config(os.path.join(CONFIG_DIR, "wood_near_dirichlet.json"), output=str(tmp_path))
        ks = config["sweep"]["k_values"]
        eps = [_run("wood_near_dirichlet.json", tmp_path, k=k).eps for k in ks]
        centre = eps[1]
        assert all(_within_factor(e, centre, 2) for e in eps)


class TestWoodNeumann:
    """Neumann problem at the Wood wavenumber k = 2 pi."""

    def test_energy_defect(self, tmp_path):
        """Test eps within a factor of 5 of the reference column."""
        for A, target in {20.0: 7.4e-3, 30.0: 1.7e-3, 40.0: 3.7e-4}.items():
            report = _run("wood_neumann.json", tmp_path, A=A)
            assert _within_factor(report.eps, target, 5), (A, report.eps)
