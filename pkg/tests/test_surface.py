"""Tests for surfaces and Nystrom grids."""

import math

import numpy as np
import pytest

from qpgreen import ResolutionError, SurfaceSpec, build_grid, dual_basis
from qpgreen.surface import harmonics_from_table


@pytest.mark.unit
class TestSurfaceSpec:
    """Test height functions and their geometry."""

    def test_cosine_crest(self):
        """Test f(0, 0) = 0.5 with an upward normal."""
        pts, normals, jac = SurfaceSpec().evaluate(0.0, 0.0)
        assert pts[2] == pytest.approx(0.5)
        assert np.allclose(normals, [0.0, 0.0, 1.0])
        assert jac == pytest.approx(1.0)

    def test_cosine_slope(self):
        """Test slope and area element at (1/8, 0)."""
        pts, normals, jac = SurfaceSpec().evaluate(0.125, 0.0)
        assert pts[2] == pytest.approx(0.5 * math.cos(math.pi / 4))
        fx = -normals[0] / normals[2]
        assert fx == pytest.approx(-2.2214, abs=1e-4)
        assert jac == pytest.approx(2.4362, abs=1e-4)

    def test_normals_match_finite_differences(self):
        """Test normals are orthogonal to FD tangent vectors."""
        spec = SurfaceSpec(kind="custom_harmonic", harmonics=((1, 2, 0.1, 0.05), (0, 1, 0.0, 0.2)))
        a, b, h = 0.31, 0.77, 1e-6
        _, normal, _ = spec.evaluate(a, b)
        ta = (spec.evaluate(a + h, b)[0] - spec.evaluate(a - h, b)[0]) / (2 * h)
        tb = (spec.evaluate(a, b + h)[0] - spec.evaluate(a, b - h)[0]) / (2 * h)
        assert abs(np.dot(normal, ta)) < 1e-7
        assert abs(np.dot(normal, tb)) < 1e-7
        assert np.linalg.norm(normal) == pytest.approx(1.0, rel=1e-14)

    def test_height_bound(self):
        """Test bounds for each surface kind."""
        assert SurfaceSpec(kind="flat").height_bound() == 0.0
        assert SurfaceSpec(amplitude=0.3).height_bound() == 0.3
        spec = SurfaceSpec(kind="custom_harmonic", harmonics=((1, 0, 0.1, -0.2),))
        assert spec.height_bound() == pytest.approx(0.3)

    def test_unknown_kind(self):
        """Test an unknown kind raises."""
        with pytest.raises(ValueError):
            SurfaceSpec(kind="sawtooth")

    def test_negative_amplitude(self):
        """Test amplitude < 0 raises."""
        with pytest.raises(ValueError):
            SurfaceSpec(amplitude=-0.1)

    def test_harmonics_from_table(self):
        """Test config rows are parsed to typed tuples."""
        assert harmonics_from_table([[1, 0, 0.5, 0]]) == ((1, 0, 0.5, 0.0),)
        with pytest.raises(ValueError):
            harmonics_from_table([[1, 0, 0.5]])


@pytest.mark.unit
class TestBuildGrid:
    """Test Nystrom grid construction."""

    def test_flat_grid(self, flat_grid):
        """Test normals are (0, 0, 1) and jacobians equal D."""
        assert np.allclose(flat_grid.flat_normals(), [0.0, 0.0, 1.0])
        assert np.allclose(flat_grid.jacobians, 1.0)
        assert flat_grid.z_plus == flat_grid.z_minus == 0.0

    def test_cosine_grid_geometry(self, cosine_grid):
        """Test upward normals, jac >= D and heights within [z_minus, z_plus]."""
        assert cosine_grid.size == 64
        assert np.all(cosine_grid.flat_normals()[:, 2] > 0)
        assert np.all(cosine_grid.jacobians >= 1.0 - 1e-15)
        z = cosine_grid.flat_nodes()[:, 2]
        assert cosine_grid.z_minus == pytest.approx(-0.5)
        assert cosine_grid.z_plus == pytest.approx(0.5)
        assert np.all((z >= cosine_grid.z_minus) & (z <= cosine_grid.z_plus))

    def test_weights_sum_to_area(self, cosine_grid):
        """Test trapezoid weights add up to the area estimate."""
        assert cosine_grid.weights.sum() == pytest.approx(cosine_grid.area(), rel=1e-14)

    def test_area_converges(self):
        """Test the periodic trapezoid area converges spectrally."""
        areas = [build_grid(SurfaceSpec(), n, n).area() for n in (16, 32, 64)]
        assert abs(areas[1] - areas[2]) < 1e-8
        assert areas[2] > 1.0

    def test_non_unit_lattice(self):
        """Test nodes follow the lattice vectors and jacobians scale with D."""
        lat = dual_basis((2.0, 0.0), (0.5, 1.0))
        grid = build_grid(SurfaceSpec(kind="flat", lat=lat), 4, 4)
        assert np.allclose(grid.nodes[1, 1, :2], [0.25 * 2.0 + 0.25 * 0.5, 0.25])
        assert np.allclose(grid.jacobians, 2.0)

    @pytest.mark.parametrize("N,M", [(2, 8), (8, 2), (5, 8), (8, 7)])
    def test_resolution_errors(self, N, M):
        """Test N, M < 4 or odd raise ResolutionError."""
        with pytest.raises(ResolutionError):
            build_grid(SurfaceSpec(), N, M)
