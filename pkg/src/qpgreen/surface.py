"""Biperiodic scattering surfaces z = f(x~) and their Nystrom grids."""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .errors import ResolutionError
from .lattice import Lattice, unit_lattice

logger = logging.getLogger(__name__)

SURFACE_KINDS = ("cosine_product", "flat", "custom_harmonic")
MIN_NODES = 4

Harmonic = Tuple[int, int, float, float]


@dataclass(frozen=True)
class SurfaceSpec:
    """Height function over one period, written in unit-cell coordinates (a, b).

    ``cosine_product`` is amplitude*cos(2 pi a)*cos(2 pi b), which on the unit
    lattice is the grating amplitude*cos(2 pi x)*cos(2 pi y). ``custom_harmonic``
    sums c*cos(2 pi (m a + n b)) + s*sin(2 pi (m a + n b)) over ``harmonics``.
    """

    kind: str = "cosine_product"
    amplitude: float = 0.5
    lat: Lattice = field(default_factory=unit_lattice)
    harmonics: Tuple[Harmonic, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        object.__setattr__(
            self,
            "harmonics",
            tuple((int(m), int(n), float(c), float(s)) for m, n, c, s in self.harmonics),
        )

    def height_bound(self) -> float:
        """Upper bound on |f| over the whole surface."""
        if self.kind == "flat":
            return 0.0
        if self.kind == "cosine_product":
            return self.amplitude
        return float(sum(abs(c) + abs(s) for _, _, c, s in self.harmonics))

    def _height(
        self, a: np.ndarray, b: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """f and its (a, b) derivatives."""
        two_pi = 2.0 * math.pi
        if self.kind == "flat":
            zero = np.zeros(np.broadcast(a, b).shape)
            return zero, zero, zero
        if self.kind == "cosine_product":
            ca, sa = np.cos(two_pi * a), np.sin(two_pi * a)
            cb, sb = np.cos(two_pi * b), np.sin(two_pi * b)
            amp = self.amplitude
            return amp * ca * cb, -two_pi * amp * sa * cb, -two_pi * amp * ca * sb
        f = np.zeros(np.broadcast(a, b).shape)
        fa = np.zeros_like(f)
        fb = np.zeros_like(f)
        for m, n, c, s in self.harmonics:
            arg = two_pi * (m * a + n * b)
            f = f + c * np.cos(arg) + s * np.sin(arg)
            slope = two_pi * (-c * np.sin(arg) + s * np.cos(arg))
            fa = fa + m * slope
            fb = fb + n * slope
        return f, fa, fb

    def evaluate(self, a: ArrayLike, b: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Points, upward unit normals and area elements at unit-cell coordinates."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        f, fa, fb = self._height(a, b)
        lat = self.lat
        # grad_x~ f = f_a v1* + f_b v2*
        fx = fa * lat.v1s[0] + fb * lat.v2s[0]
        fy = fa * lat.v1s[1] + fb * lat.v2s[1]
        x = a * lat.v1[0] + b * lat.v2[0]
        y = a * lat.v1[1] + b * lat.v2[1]
        stretch = np.sqrt(1.0 + fx * fx + fy * fy)
        points = np.stack([x, y, f], axis=-1)
        normals = np.stack([-fx, -fy, np.ones_like(f)], axis=-1) / stretch[..., None]
        return points, normals, stretch * lat.D


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Uniform tensor Nystrom grid a_i = i/N, b_j = j/M over one period."""

    spec: SurfaceSpec
    N: int
    M: int
    a: np.ndarray
    b: np.ndarray
    nodes: np.ndarray
    normals: np.ndarray
    jacobians: np.ndarray
    z_plus: float
    z_minus: float

    @property
    def size(self) -> int:
        return self.N * self.M

    @property
    def weights(self) -> np.ndarray:
        """Periodic trapezoid weights jacobian/(N M), flattened row-major."""
        return (self.jacobians / self.size).ravel()

    def flat_nodes(self) -> np.ndarray:
        return self.nodes.reshape(-1, 3)

    def flat_normals(self) -> np.ndarray:
        return self.normals.reshape(-1, 3)

    def area(self) -> float:
        """Trapezoid approximation of the surface area of one period."""
        return float(np.sum(self.jacobians) / self.size)


def build_grid(spec: SurfaceSpec, N: int, M: int) -> SurfaceGrid:
    """Nodes, normals and area elements on the N x M unit-cell grid."""
    if N < MIN_NODES or M < MIN_NODES:
        raise ResolutionError(f"grid {N}x{M} is below the minimum {MIN_NODES} per direction")
    if N % 2 or M % 2:
        raise ResolutionError(f"grid {N}x{M} must have an even number of nodes per direction")
    a = np.arange(N) / N
    b = np.arange(M) / M
    aa, bb = np.meshgrid(a, b, indexing="ij")
    nodes, normals, jac = spec.evaluate(aa, bb)
    logger.debug(f"Built {N}x{M} grid for {spec.kind} surface (amplitude {spec.amplitude})")
    return SurfaceGrid(
        spec=spec,
        N=N,
        M=M,
        a=a,
        b=b,
        nodes=nodes,
        normals=normals,
        jacobians=jac,
        z_plus=float(nodes[..., 2].max()),
        z_minus=float(nodes[..., 2].min()),
    )


def harmonics_from_table(rows: Sequence[Sequence[float]]) -> Tuple[Harmonic, ...]:
    """Parse [[m, n, cos_coeff, sin_coeff], ...] rows from a config file."""
    parsed = []
    for row in rows:
        if len(row) != 4:
            raise ValueError(f"harmonic rows need [m, n, c, s], got {row!r}")
        m, n, c, s = row
        parsed.append((int(m), int(n), float(c), float(s)))
    return tuple(parsed)
