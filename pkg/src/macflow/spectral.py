"""Periodic Fourier backend: transforms, operator symbols and phi-functions.

The linear operator ``L_kappa = eps^2 * Lap - kappa`` is diagonal in the
discrete Fourier basis of the periodic unit square.  Two Laplacian symbols
are available:

``"fd"`` (default)
    The 5-point central-difference Laplacian, ``-(4/h^2) sin^2(pi k h)`` per
    axis.  Its heat semigroup is a convex averaging operator, so the
    pointwise bound of the solution survives the discretization exactly.
``"spectral"``
    The Fourier symbol ``-4 pi^2 |k|^2``.  Spectrally accurate in space, but
    its truncated heat kernel has negative lobes and can push the pointwise
    norm above the bound on rough data.

Transforms act on the two leading (grid) axes of ``(nx, ny, m1, m2)``
arrays using a real half-spectrum layout.
"""
from dataclasses import dataclass, field
from math import factorial

import numpy as np
import scipy.fft as sfft

from ._accel import thread_count
from .matfield import MatrixField, PreconditionError

PHI_MAX_INDEX = 8
# |z| below this uses the Taylor series; above, the upward recurrence.
_SERIES_RADIUS = 4.0
_SERIES_TERMS = 40
_INV_FACT = np.array([1.0 / factorial(k) for k in range(_SERIES_TERMS + PHI_MAX_INDEX + 2)])

SYMBOLS = ("fd", "spectral")


def phi_all(jmax, z):
    """Stack ``[phi_0(z), ..., phi_jmax(z)]`` for real ``z <= 0`` (any shape)."""
    z = np.asarray(z, dtype=np.float64)
    if jmax < 0 or jmax > PHI_MAX_INDEX:
        raise ValueError(f"phi index must be in [0, {PHI_MAX_INDEX}], got {jmax}")
    if np.any(z > 0) or not np.all(np.isfinite(z)):
        raise ValueError("phi is only supported for finite z <= 0")
    shape = z.shape
    z = z.ravel()
    out = np.empty((jmax + 1, z.size))
    out[0] = np.exp(z)
    if jmax == 0:
        return out.reshape((jmax + 1,) + shape)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    for j in range(1, jmax + 1):
        acc = np.zeros_like(zs)
        for k in range(_SERIES_TERMS, -1, -1):
            acc = acc * zs + _INV_FACT[k + j]
        out[j][small] = acc
    zl = z[~small]
    if zl.size:
        p = np.expm1(zl) / zl
        out[1][~small] = p
        for j in range(2, jmax + 1):
            p = (p - _INV_FACT[j - 1]) / zl
            out[j][~small] = p
    return out.reshape((jmax + 1,) + shape)


def phi(j, z):
    """``phi_j(z) = (e^z - sum_{k<j} z^k/k!) / z^j`` with ``phi_j(0) = 1/j!``.

    Valid for ``0 <= j <= 8`` and ``z <= 0``; relative accuracy is a few ulps
    over the whole negative axis (until ``e^z`` underflows for ``j = 0``).
    """
    if not 0 <= j <= PHI_MAX_INDEX:
        raise ValueError(f"phi index must be in [0, {PHI_MAX_INDEX}], got {j}")
    res = phi_all(j, z)[j]
    return float(res) if res.ndim == 0 else res


def laplacian_symbol(nx, ny, symbol="fd"):
    """Non-positive Laplacian eigenvalues on the ``(nx, ny//2 + 1)`` half spectrum."""
    kx = np.fft.fftfreq(nx, 1.0 / nx)
    ky = np.fft.rfftfreq(ny, 1.0 / ny)
    if symbol == "spectral":
        lx = -(2 * np.pi * kx) ** 2
        ly = -(2 * np.pi * ky) ** 2
    elif symbol == "fd":
        hx, hy = 1.0 / nx, 1.0 / ny
        lx = -(4.0 / hx ** 2) * np.sin(np.pi * kx * hx) ** 2
        ly = -(4.0 / hy ** 2) * np.sin(np.pi * ky * hy) ** 2
    else:
        raise ValueError(f"unknown Laplacian symbol {symbol!r}; choose from {SYMBOLS}")
    return lx[:, None] + ly[None, :]


def parseval_weights(nx, ny):
    """Multiplicity of each half-spectrum mode in the full spectrum."""
    w = np.full(ny // 2 + 1, 2.0)
    w[0] = 1.0
    if ny % 2 == 0:
        w[-1] = 1.0
    return np.broadcast_to(w[None, :], (nx, ny // 2 + 1))


def forward(data, workers=None):
    """Real FFT over the two grid axes of ``(nx, ny, ...)`` data."""
    return sfft.rfft2(data, axes=(0, 1), workers=workers or thread_count())


def inverse(spec, shape, workers=None):
    return sfft.irfft2(spec, s=shape, axes=(0, 1), workers=workers or thread_count())


@dataclass
class SpectralCache:
    """Operator symbols and precomputed ``phi_j(c tau lam)`` tables.

    ``phi_tables[(j, c)]`` has shape ``(nx, ny//2 + 1, 1, 1)`` so it
    broadcasts against transformed ``(nx, ny//2+1, m1, m2)`` data.
    """

    nx: int
    ny: int
    lam: np.ndarray
    tau: float
    epsilon: float
    kappa: float
    symbol: str
    jmax: int
    phi_tables: dict = field(repr=False)

    @property
    def fractions(self):
        return sorted({c for (_, c) in self.phi_tables})

    def table(self, j, c):
        try:
            return self.phi_tables[(j, c)]
        except KeyError:
            raise KeyError(f"no phi table for index {j} at stage fraction {c!r}") from None


def build_cache(grid, epsilon, kappa, tau, fractions, jmax, symbol="fd"):
    """Precompute symbols and phi tables for one uniform time step ``tau``.

    ``kappa`` may be zero here (pure heat semigroup) even though the model
    requires a positive stabilization.
    """
    nx, ny = grid
    if not tau > 0:
        raise ValueError(f"time step must be positive, got {tau}")
    if kappa < 0:
        raise ValueError(f"kappa must be non-negative, got {kappa}")
    fracs = sorted(set(float(c) for c in fractions))
    if not fracs or any(not 0 < c <= 1 for c in fracs):
        raise ValueError(f"stage fractions must lie in (0, 1], got {fracs}")
    if 1.0 not in fracs:
        raise ValueError("stage fractions must include 1")
    lam = epsilon ** 2 * laplacian_symbol(nx, ny, symbol) - kappa
    tables = {}
    for c in fracs:
        vals = phi_all(jmax, c * tau * lam)
        for j in range(jmax + 1):
            tables[(j, c)] = vals[j][:, :, None, None].copy()
    return SpectralCache(nx=nx, ny=ny, lam=lam, tau=float(tau), epsilon=float(epsilon),
                         kappa=float(kappa), symbol=symbol, jmax=jmax, phi_tables=tables)


def apply_phi_operator(field, j, c, cache):
    """``phi_j(c tau L_kappa)`` applied to every matrix component of ``field``."""
    data = field.data if isinstance(field, MatrixField) else np.asarray(field, float)
    if data.shape[:2] != (cache.nx, cache.ny):
        raise PreconditionError(
            f"field grid {data.shape[:2]} does not match cache grid {(cache.nx, cache.ny)}")
    spec = forward(data) * cache.table(j, float(c))
    out = inverse(spec, data.shape[:2])
    return MatrixField(out) if isinstance(field, MatrixField) else out
