"""Tests for trapezoid interpolation and the local polar rule."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import j0

from qpgreen import PolarSettings
from qpgreen.greens import bump
from qpgreen.quadrature import (
    interpolation_matrix,
    polar_rule,
    pou,
    top_mode_energy,
    trig_cardinal,
)


@pytest.mark.unit
class TestTrigCardinal:
    """Test the periodic cardinal functions."""

    def test_node_values(self):
        """Test L(i/N) = delta_i0."""
        values = trig_cardinal(np.arange(8) / 8, 8)
        assert np.allclose(values, np.eye(8)[0], atol=1e-14)

    def test_periodic(self):
        """Test L(t + 1) = L(t)."""
        t = np.linspace(0.01, 0.99, 13)
        assert np.allclose(trig_cardinal(t + 1.0, 8), trig_cardinal(t, 8), atol=1e-13)

    def test_partition_of_unity(self):
        """Test the shifted cardinals sum to one."""
        mat = interpolation_matrix(np.linspace(0.0, 1.0, 17), 8)
        assert np.allclose(mat.sum(axis=1), 1.0, atol=1e-13)

    def test_exact_for_resolved_modes(self):
        """Test cos(2 pi 3 t) is reproduced exactly from 8 nodes."""
        nodes = np.arange(8) / 8
        t = np.linspace(0.0, 1.0, 23)
        interp = interpolation_matrix(t, 8) @ np.cos(2 * math.pi * 3 * nodes)
        assert np.allclose(interp, np.cos(2 * math.pi * 3 * t), atol=1e-13)

    def test_odd_n(self):
        """Test odd N raises."""
        with pytest.raises(ValueError):
            trig_cardinal(0.1, 7)


@pytest.mark.unit
class TestPolarRule:
    """Test the partition-of-unity polar rule."""

    def test_pou_endpoints(self):
        """Test pou = 1 at 0 and vanishes at delta."""
        assert pou(0.0, 0.25) == pytest.approx(1.0)
        assert pou(0.25, 0.25) == pytest.approx(0.0, abs=1e-15)
        assert pou(0.4, 0.25) == 0.0

    def test_weights_integrate_pou(self):
        """Test sum of weights equals 2 pi int bump(rho/delta) rho drho."""
        delta = 0.25
        rule = polar_rule(delta, 48, 16)
        exact, _ = quad(lambda r: 2 * math.pi * float(bump(r / delta)) * r, 0.0, delta)
        assert rule.weights.sum() == pytest.approx(exact, rel=1e-6)

    def test_offsets_inside_disc(self):
        """Test every node lies inside the disc of radius delta."""
        rule = polar_rule(0.3, 8, 12)
        assert rule.weights.shape == (96,)
        assert np.all(np.hypot(rule.da, rule.db) < 0.3)
        assert np.allclose(np.hypot(rule.da, rule.db), rule.rho)

    def test_smooth_moment(self):
        """Test a smooth integrand against adaptive quadrature."""
        delta = 0.2
        rule = polar_rule(delta, 48, 32)
        values = np.cos(3.0 * rule.da) * np.exp(rule.db)
        # angular average of cos(3 r cos t) e^{r sin t} times the radial profile
        exact, _ = quad(
            lambda r: quad(
                lambda t: math.cos(3 * r * math.cos(t)) * math.exp(r * math.sin(t)),
                0.0,
                2 * math.pi,
            )[0]
            * float(bump(r / delta))
            * r,
            0.0,
            delta,
        )
        assert np.sum(rule.weights * values) == pytest.approx(exact, rel=1e-6)

    def test_wide_disc_resolves_top_mode(self):
        """Test grid-sized rule counts integrate the highest 8-point mode over a 1.5-cell disc."""
        delta = 1.5
        n_r, n_theta = PolarSettings(delta=delta).rule_sizes(8, 8)
        rule = polar_rule(delta, n_r, n_theta)
        values = np.cos(2 * math.pi * 4 * rule.da)
        # angular average of cos(a cos t) is J0(a)
        exact, _ = quad(
            lambda r: 2 * math.pi * j0(8 * math.pi * r) * float(bump(r / delta)) * r,
            0.0,
            delta,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        assert np.sum(rule.weights * values) == pytest.approx(exact, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.0, -0.1, 2.5])
    def test_delta_range(self, delta):
        """Test delta outside (0, 2] raises."""
        with pytest.raises(ValueError):
            polar_rule(delta, 8, 8)


@pytest.mark.unit
class TestTopModeEnergy:
    """Test the resolution indicator."""

    def test_constant(self):
        """Test a constant grid has no top-mode energy."""
        assert top_mode_energy(np.ones((8, 8))) == 0.0

    def test_checkerboard(self):
        """Test a checkerboard is entirely top-mode."""
        idx = np.add.outer(np.arange(8), np.arange(8))
        assert top_mode_energy((-1.0) ** idx) == pytest.approx(1.0)

    def test_zero(self):
        """Test a zero grid reports zero."""
        assert top_mode_energy(np.zeros((4, 4))) == 0.0
