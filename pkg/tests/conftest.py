"""Pytest fixtures for qpgreen tests."""

import json
import math

import pytest

from qpgreen import (
    GreenParams,
    IncidentWave,
    SurfaceSpec,
    build_grid,
    unit_lattice,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture
def unit_lat():
    """Return the square unit lattice."""
    return unit_lattice()


@pytest.fixture
def inc_k1():
    """Normal incidence at k=1 (no Wood anomaly)."""
    return IncidentWave(k=1.0)


@pytest.fixture
def inc_wood():
    """Normal incidence at the first Wood wavenumber k=2 pi."""
    return IncidentWave(k=TWO_PI)


@pytest.fixture
def inc_wood2():
    """Normal incidence at the second Wood wavenumber k=2 sqrt(2) pi."""
    return IncidentWave(k=2.0 * math.sqrt(2.0) * math.pi)


@pytest.fixture
def gp_k1(inc_k1, unit_lat):
    """p=0 smooth-window parameters at k=1 with a small window."""
    return GreenParams(inc=inc_k1, lat=unit_lat, p=0, A=10.0)


@pytest.fixture
def gp_wood(inc_wood, unit_lat):
    """p=3, d=1.4 parameters at k=2 pi with grazing-mode completion."""
    return GreenParams(inc=inc_wood, lat=unit_lat, p=3, d=1.4, A=20.0)


@pytest.fixture
def flat_grid():
    """8x8 grid on the flat surface z=0."""
    return build_grid(SurfaceSpec(kind="flat", amplitude=0.0), 8, 8)


@pytest.fixture
def cosine_grid():
    """8x8 grid on the surface 0.5 cos(2 pi x) cos(2 pi y)."""
    return build_grid(SurfaceSpec(), 8, 8)


@pytest.fixture
def write_config(tmp_path):
    """Return a helper that writes a JSON config and returns its path."""

    def _write(content, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(content))
        return str(path)

    return _write


@pytest.fixture
def small_config(tmp_path):
    """Return a cheap, valid run configuration dict."""
    return {
        "mode": "solve",
        "k": 1.0,
        "green": {"p": 0, "A": 4.0},
        "solver": {"N": 4, "M": 4, "gmres_maxit": 50},
        "quadrature": {"n_r": 8, "n_theta": 8},
        "output": str(tmp_path / "out"),
    }
