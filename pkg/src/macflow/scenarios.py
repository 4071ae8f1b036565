"""Initial conditions: random unit vectors, a petal inclusion, Voronoi grains."""
from dataclasses import dataclass

import numpy as np

from .matfield import MatrixField, PreconditionError, grid_coords

KINDS = ("random_vector", "petal", "voronoi")
DEFAULT_GRAINS = 8


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    m1: int
    m2: int
    nx: int
    ny: int
    seed: int = 0
    K: int = DEFAULT_GRAINS
    metric: str = "torus"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown initial condition {self.kind!r}; choose from {KINDS}")
        shape = (self.m1, self.m2)
        if self.kind == "random_vector" and shape != (2, 1):
            raise PreconditionError(f"random_vector needs (m1, m2) = (2, 1), got {shape}")
        if self.kind == "petal" and shape != (2, 2):
            raise PreconditionError(f"petal needs (m1, m2) = (2, 2), got {shape}")
        if self.kind == "voronoi" and (self.m2 != 2 or self.m1 not in (2, 3)):
            raise PreconditionError(f"voronoi needs m2 = 2 and m1 in {{2, 3}}, got {shape}")
        if self.metric not in ("torus", "euclidean"):
            raise PreconditionError(f"unknown Voronoi metric {self.metric!r}")

    def build(self):
        grid = (self.nx, self.ny)
        if self.kind == "random_vector":
            return ic_random_vector(grid, self.seed)
        if self.kind == "petal":
            return ic_petal(grid)
        return ic_voronoi(grid, self.seed, self.K, self.m1, metric=self.metric)


def ic_random_vector(grid, seed):
    """Unit vectors ``(cos a^2, sin a^2)`` with ``a ~ U[0, 2 pi)`` i.i.d. per node."""
    nx, ny = grid
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 2.0 * np.pi, size=(nx, ny))
    data = np.empty((nx, ny, 2, 1))
    data[:, :, 0, 0] = np.cos(a * a)
    data[:, :, 1, 0] = np.sin(a * a)
    return MatrixField(data)


def petal_inside(X, Y):
    rho = np.hypot(X, Y)
    theta = np.arctan2(Y, X)
    return rho < 0.18 + 0.2 * np.sin(6.0 * theta)


def ic_petal(grid):
    """Rotations inside a six-petal curve, reflections outside."""
    nx, ny = grid
    X, Y = grid_coords(nx, ny)
    a = 0.5 * np.pi * np.sin(2.0 * np.pi * (X + Y))
    ca, sa = np.cos(a), np.sin(a)
    inside = petal_inside(X, Y)
    data = np.empty((nx, ny, 2, 2))
    data[..., 0, 0] = ca
    data[..., 1, 0] = sa
    data[..., 0, 1] = np.where(inside, -sa, sa)
    data[..., 1, 1] = np.where(inside, ca, -ca)
    return MatrixField(data)


def voronoi_labels(X, Y, seeds, metric="torus"):
    """Index of the nearest seed per node; ties go to the lowest index."""
    dx = X[..., None] - seeds[:, 0]
    dy = Y[..., None] - seeds[:, 1]
    if metric == "torus":
        dx = dx - np.round(dx)
        dy = dy - np.round(dy)
    # argmin returns the first minimum, which gives the tie-breaking rule
    return np.argmin(dx * dx + dy * dy, axis=-1)


def ic_voronoi(grid, seed, K=DEFAULT_GRAINS, m1=3, metric="torus"):
    """Polycrystal of ``K`` grains with random in-plane angle and handedness.

    For ``m1 = 3`` the first column tilts out of plane by
    ``beta = pi/20 sin(2 pi (x - y))``.  For ``m1 = 2`` there is no third
    row to tilt into, so ``beta = 0`` and every grain is exactly orthogonal.
    """
    nx, ny = grid
    if K < 2:
        raise PreconditionError(f"need at least 2 grains, got K={K}")
    if K > nx * ny:
        raise PreconditionError(f"K={K} exceeds the {nx * ny} grid points")
    if m1 not in (2, 3):
        raise PreconditionError(f"voronoi needs m1 in {{2, 3}}, got {m1}")
    rng = np.random.default_rng(seed)
    seeds = rng.uniform(-0.5, 0.5, size=(K, 2))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=K)
    signs = np.where(rng.random(K) < 0.5, -1.0, 1.0)

    X, Y = grid_coords(nx, ny)
    lab = voronoi_labels(X, Y, seeds, metric)
    a = angles[lab]
    s = signs[lab]
    if m1 == 3:
        beta = (np.pi / 20.0) * np.sin(2.0 * np.pi * (X - Y))
    else:
        beta = np.zeros_like(X)
    data = np.zeros((nx, ny, m1, 2))
    data[..., 0, 0] = np.cos(a) * np.cos(beta)
    data[..., 1, 0] = np.sin(a) * np.cos(beta)
    data[..., 0, 1] = -s * np.sin(a)
    data[..., 1, 1] = s * np.cos(a)
    if m1 == 3:
        data[..., 2, 0] = np.sin(beta)
    return MatrixField(data)
