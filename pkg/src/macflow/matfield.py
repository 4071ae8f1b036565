"""Matrix-valued fields and the pointwise algebra of the model.

A field stores one real ``m1 x m2`` matrix per node of a periodic
``nx x ny`` grid on the unit square ``[-1/2, 1/2)^2``.  Storage is a single
C-ordered array of shape ``(nx, ny, m1, m2)`` so the per-point matrices are
contiguous.

All pointwise functions accept any array whose two trailing axes are the
matrix axes, so they work equally on a single matrix and on a whole field.
"""
from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit


class PreconditionError(ValueError):
    """Input violates a documented precondition (shape, finiteness, bound)."""


@dataclass(frozen=True)
class ModelParams:
    """Model constants: matrix shape, interfacial width and stabilization.

    ``kappa`` defaults to ``3*m2 + 1``, the smallest value for which every
    stability and dissipation estimate of the scheme applies.
    """

    m1: int
    m2: int
    epsilon: float
    kappa: float = None

    def __post_init__(self):
        if self.kappa is None:
            object.__setattr__(self, "kappa", float(3 * self.m2 + 1))
        if not (self.m2 >= 1 and self.m1 >= self.m2):
            raise PreconditionError(
                f"need m1 >= m2 >= 1, got m1={self.m1}, m2={self.m2}")
        if not self.epsilon > 0:
            raise PreconditionError(f"epsilon must be positive, got {self.epsilon}")
        if self.kappa < 3 * self.m2 + 1:
            raise PreconditionError(
                f"kappa={self.kappa} below 3*m2+1={3 * self.m2 + 1}")

    @property
    def bound(self):
        """Pointwise Frobenius bound ``sqrt(m2)`` of the solution."""
        return float(np.sqrt(self.m2))

    @property
    def n_bound(self):
        """Pointwise bound ``kappa*sqrt(m2)`` of the stabilized nonlinearity."""
        return float(self.kappa * np.sqrt(self.m2))


@dataclass
class MatrixField:
    """Real ``m1 x m2`` matrix at every node of a periodic 2-D grid."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 4:
            raise PreconditionError(
                f"field data must have shape (nx, ny, m1, m2), got {data.shape}")
        nx, ny, m1, m2 = data.shape
        if nx < 4 or ny < 4 or nx % 2 or ny % 2:
            raise PreconditionError(f"grid counts must be even and >= 4, got {nx}x{ny}")
        if not (m1 >= m2 >= 1):
            raise PreconditionError(f"need m1 >= m2 >= 1, got {m1}x{m2}")
        if not np.all(np.isfinite(data)):
            raise PreconditionError("field contains non-finite entries")
        self.data = data

    @classmethod
    def zeros(cls, nx, ny, m1, m2):
        return cls(np.zeros((nx, ny, m1, m2)))

    @classmethod
    def constant(cls, nx, ny, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        return cls(np.broadcast_to(matrix, (nx, ny) + matrix.shape).copy())

    @property
    def nx(self):
        return self.data.shape[0]

    @property
    def ny(self):
        return self.data.shape[1]

    @property
    def m1(self):
        return self.data.shape[2]

    @property
    def m2(self):
        return self.data.shape[3]

    @property
    def grid(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return 1.0 / self.nx

    @property
    def dy(self):
        return 1.0 / self.ny

    def coords(self):
        """Node coordinates ``(X, Y)`` on ``[-1/2, 1/2)^2``, ``indexing='ij'``."""
        return grid_coords(self.nx, self.ny)

    def copy(self):
        return MatrixField(self.data.copy())

    def with_data(self, data):
        """New field on the same grid; skips revalidation of the grid shape."""
        out = object.__new__(MatrixField)
        out.data = np.ascontiguousarray(data, dtype=np.float64)
        return out


def grid_coords(nx, ny):
    x = -0.5 + np.arange(nx) / nx
    y = -0.5 + np.arange(ny) / ny
    return np.meshgrid(x, y, indexing="ij")


def as_array(U):
    """The raw ``(nx, ny, m1, m2)`` array behind a field or array-like."""
    return U.data if isinstance(U, MatrixField) else np.asarray(U, dtype=np.float64)


def _mT(U):
    return np.swapaxes(U, -1, -2)


def nonlinear_f(U):
    """``f(U) = U - U U^T U`` applied pointwise."""
    U = as_array(U)
    return U - U @ (_mT(U) @ U)


def potential_trace(U):
    """``trace((U^T U - I)^2) / 4`` pointwise (the potential density)."""
    U = as_array(U)
    G = _mT(U) @ U
    G = G - np.eye(U.shape[-1])
    return 0.25 * np.sum(G * G, axis=(-2, -1))


@njit
def _stabilized_n_kernel(U, kappa, out):
    npts, m1, m2 = U.shape
    G = np.empty((m2, m2))
    for p in range(npts):
        for a in range(m2):
            for b in range(m2):
                s = 0.0
                for i in range(m1):
                    s += U[p, i, a] * U[p, i, b]
                G[a, b] = s
        for i in range(m1):
            for b in range(m2):
                s = 0.0
                for a in range(m2):
                    s += U[p, i, a] * G[a, b]
                out[p, i, b] = (kappa + 1.0) * U[p, i, b] - s


def stabilized_n_numpy(U, kappa):
    U = as_array(U)
    return (kappa + 1.0) * U - U @ (_mT(U) @ U)


def stabilized_n_numba(U, kappa):
    U = as_array(U)
    shape = U.shape
    flat = np.ascontiguousarray(U).reshape((-1,) + shape[-2:])
    out = np.empty_like(flat)
    _stabilized_n_kernel(flat, float(kappa), out)
    return out.reshape(shape)


def stabilized_N(U, kappa):
    """``N[U] = kappa*U + f(U)`` pointwise."""
    if USE_NUMBA:
        return stabilized_n_numba(U, kappa)
    return stabilized_n_numpy(U, kappa)


def frob_norm(U):
    """Frobenius norm of every matrix (reduces the two trailing axes)."""
    U = as_array(U)
    return np.sqrt(np.sum(U * U, axis=(-2, -1)))


def sup_frob(field):
    """Maximum pointwise Frobenius norm over the grid."""
    return float(np.max(frob_norm(field)))


def check_mbp(field, m2, rtol=1e-12):
    """Raise ``PreconditionError`` unless the field is finite and inside the ball."""
    data = as_array(field)
    if not np.all(np.isfinite(data)):
        raise PreconditionError("field contains non-finite entries")
    s = sup_frob(data)
    limit = np.sqrt(m2) * (1.0 + rtol)
    if s > limit:
        raise PreconditionError(
            f"sup Frobenius norm {s:.17g} exceeds sqrt(m2)={np.sqrt(m2):.17g}")
    return s
