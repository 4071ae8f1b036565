"""Per-point maxima of matrix polynomial norms on ``[0, 1]``.

For ``P(s) = B_0 + B_1 s + ... + B_q s^q`` with matrix coefficients, the
squared norm ``h(s) = ||P(s)||_F^2`` is a scalar polynomial of degree
``2q`` whose coefficients come from the Gram matrix ``<B_a, B_b>_F``.
Its maximum on ``[0, 1]`` is attained at an endpoint or at a real root of
``h'``; the roots come from the eigenvalues of the companion matrix.

Two interchangeable exact kernels exist.  The numpy path groups points by
effective degree and takes batched companion-matrix eigenvalues.  The numba
path loops over points and isolates the roots of ``h'`` on [0, 1] through
the chain of derivatives, which needs no allocation per point.
``USE_NUMBA`` picks the default.
"""
from math import comb

import numpy as np

from ._accel import USE_NUMBA, njit
from .matfield import as_array

# Relative size below which leading derivative coefficients are dropped.
DEGENERATE_TOL = 1e-14
SAMPLED_POINTS = 65


def _stack_coefficients(N0, C):
    N0 = np.asarray(N0, dtype=np.float64)
    grid = N0.shape[:-2]
    q = len(C)
    B = np.empty(grid + (q + 1, N0.shape[-2] * N0.shape[-1]))
    B[..., 0, :] = N0.reshape(grid + (-1,))
    for k, Ck in enumerate(C, start=1):
        B[..., k, :] = np.asarray(Ck, dtype=np.float64).reshape(grid + (-1,))
    return B.reshape((-1,) + B.shape[-2:]), grid


def h_coefficients_numpy(B):
    G = B @ np.swapaxes(B, -1, -2)
    q = B.shape[-2] - 1
    h = np.zeros(B.shape[:-2] + (2 * q + 1,))
    for a in range(q + 1):
        for b in range(q + 1):
            h[..., a + b] += G[..., a, b]
    return h


@njit
def _h_coef_kernel(B, h):
    npts, nq, m = B.shape
    for p in range(npts):
        for d in range(2 * nq - 1):
            h[p, d] = 0.0
        for a in range(nq):
            for b in range(a, nq):
                s = 0.0
                for i in range(m):
                    s += B[p, a, i] * B[p, b, i]
                if a == b:
                    h[p, 2 * a] += s
                else:
                    h[p, a + b] += 2.0 * s


def h_coefficients_numba(B):
    B = np.ascontiguousarray(B)
    h = np.empty(B.shape[:-2] + (2 * B.shape[-2] - 1,))
    _h_coef_kernel(B, h)
    return h


def h_coefficients(N0, C):
    """Power-basis coefficients of ``||N0 + sum_k C_k s^k||_F^2``.

    Returns an array of shape ``grid + (2q + 1,)``, lowest degree first.
    """
    B, grid = _stack_coefficients(N0, C)
    h = h_coefficients_numba(B) if USE_NUMBA else h_coefficients_numpy(B)
    return h.reshape(grid + (h.shape[-1],))


def horner(h, s):
    """Evaluate coefficient rows ``h[..., :]`` at matching points ``s``."""
    out = np.zeros(np.broadcast_shapes(h.shape[:-1], np.shape(s)))
    for d in range(h.shape[-1] - 1, -1, -1):
        out = out * s + h[..., d]
    return out


_BERN_CACHE = {}


def _bernstein_matrix(n):
    M = _BERN_CACHE.get(n)
    if M is None:
        M = np.zeros((n + 1, n + 1))
        for i in range(n + 1):
            for d in range(i + 1):
                M[i, d] = comb(i, d) / comb(n, d)
        _BERN_CACHE[n] = M
    return M


def bernstein_upper(h):
    """Largest Bernstein coefficient of ``h`` on [0, 1], an upper bound of its max."""
    n = h.shape[-1] - 1
    return np.max(h @ _bernstein_matrix(n).T, axis=-1)


def sampled_max(h, samples=SAMPLED_POINTS):
    """Max of ``h`` over Chebyshev-Lobatto points of [0, 1] (endpoints included)."""
    s = 0.5 * (1.0 - np.cos(np.pi * np.arange(samples) / (samples - 1)))
    vals = horner(h[..., None, :], s)
    return np.max(vals, axis=-1)


def _derivative(h):
    n = h.shape[-1] - 1
    return h[..., 1:] * np.arange(1, n + 1)


def exact_max_numpy(h):
    """Exact ``max_{s in [0,1]} h(s)`` for rows of ``h`` (shape ``(npts, n+1)``)."""
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    best = np.maximum(h[:, 0], h.sum(axis=1))
    if h.shape[1] <= 3:
        # h'' = 2*||B_1||^2 >= 0 for linear P: the max sits at an endpoint.
        return best
    g = _derivative(h)
    scale = np.max(np.abs(g), axis=1)
    live = np.abs(g) > DEGENERATE_TOL * scale[:, None]
    # effective degree = index of highest surviving coefficient
    deg = np.where(live.any(axis=1), g.shape[1] - 1 - np.argmax(live[:, ::-1], axis=1), 0)
    for d in np.unique(deg):
        if d < 1:
            continue
        idx = np.nonzero(deg == d)[0]
        gd = g[idx, : d + 1]
        monic = gd[:, :d] / gd[:, d:d + 1]
        comp = np.zeros((idx.size, d, d))
        comp[:, 0, :] = -monic[:, ::-1]
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        roots = np.linalg.eigvals(comp).real
        s = np.clip(roots, 0.0, 1.0)
        gp = _derivative(gd)
        s_pol = s.copy()
        for _ in range(2):
            num = horner(gd[:, None, :], s_pol)
            den = horner(gp[:, None, :], s_pol)
            step = np.divide(num, den, out=np.zeros_like(num), where=den != 0)
            s_pol = np.clip(s_pol - step, 0.0, 1.0)
        hv = np.maximum(horner(h[idx, None, :], s), horner(h[idx, None, :], s_pol))
        best[idx] = np.maximum(best[idx], hv.max(axis=1))
    return best


@njit
def _horner1(c, n, s):
    v = 0.0
    for d in range(n, -1, -1):
        v = v * s + c[d]
    return v


@njit
def _bracketed_root(c, n, lo, hi, flo):
    """Root of the degree-``n`` row ``c`` in ``[lo, hi]`` given a sign change."""
    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = 0.0
        fp = 0.0
        for d in range(n, -1, -1):
            fp = fp * x + f
            f = f * x + c[d]
        if f == 0.0:
            return x
        if (f < 0.0) == (flo < 0.0):
            lo, flo = x, f
        else:
            hi = x
        xn = x - f / fp if fp != 0.0 else lo - 1.0
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2e-16 * max(abs(x), 1e-300) or hi - lo <= 4e-16:
            return xn
        x = xn
    return x


@njit
def _exact_max_kernel(h, out):
    # Roots of h' come from a derivative chain: between consecutive roots of
    # h^(k+1), h^(k) is monotone, so each sign change brackets one root.
    npts, m = h.shape
    n = m - 1
    der = np.zeros((m, m))
    pts = np.empty(m + 1)
    new = np.empty(m + 1)
    for p in range(npts):
        best = h[p, 0]
        total = 0.0
        for d in range(m):
            total += h[p, d]
        if total > best:
            best = total
        if n >= 3:
            for d in range(m):
                der[0, d] = h[p, d]
            for k in range(1, n):
                for d in range(n - k + 1):
                    der[k, d] = der[k - 1, d + 1] * (d + 1)
            npt = 0
            a, b = der[n - 1, 0], der[n - 1, 1]
            if b != 0.0 and 0.0 < -a / b < 1.0:
                pts[0] = -a / b
                npt = 1
            for k in range(n - 2, 0, -1):
                deg = n - k
                nn = 0
                left = 0.0
                fl = _horner1(der[k], deg, 0.0)
                for i in range(npt + 1):
                    right = pts[i] if i < npt else 1.0
                    fr = _horner1(der[k], deg, right)
                    if fl * fr < 0.0:
                        new[nn] = _bracketed_root(der[k], deg, left, right, fl)
                        nn += 1
                    elif fr == 0.0 and right < 1.0:
                        new[nn] = right
                        nn += 1
                    left, fl = right, fr
                for i in range(nn):
                    pts[i] = new[i]
                npt = nn
            for i in range(npt):
                v = _horner1(h[p], n, pts[i])
                if v > best:
                    best = v
        out[p] = best


def exact_max_numba(h):
    h = np.ascontiguousarray(np.atleast_2d(np.asarray(h, dtype=np.float64)))
    out = np.empty(h.shape[0])
    _exact_max_kernel(h, out)
    return out


def exact_max(h):
    if USE_NUMBA:
        return exact_max_numba(h)
    return exact_max_numpy(h)


def poly_sup_norm(N0, C, mode="exact", samples=SAMPLED_POINTS):
    """Per-point ``max_{s in [0,1]} ||N0 + sum_k C_k s^k||_F``.

    ``mode="sampled"`` replaces the root search by Chebyshev sampling; the
    result may then underestimate the true maximum by the sampling error.
    """
    N0 = as_array(N0)
    C = [as_array(c) for c in C]
    grid = N0.shape[:-2]
    if len(C) == 0:
        return np.sqrt(np.sum(N0 * N0, axis=(-2, -1)))
    h = h_coefficients(N0, C).reshape(-1, 2 * len(C) + 1)
    if mode == "exact":
        hmax = exact_max(h)
    elif mode == "sampled":
        hmax = sampled_max(h, samples)
    else:
        raise ValueError(f"unknown rescale mode {mode!r}")
    return np.sqrt(np.maximum(hmax, 0.0)).reshape(grid)


def bounded_sup_norm(N0, C, limit, mode="exact", samples=SAMPLED_POINTS):
    """Like :func:`poly_sup_norm`, exact only where the max may exceed ``limit``.

    Points whose Bernstein hull already certifies ``max <= limit`` report the
    certified upper bound instead of the exact maximum; callers that only
    compare against ``limit`` get identical decisions at a fraction of the
    root-finding cost.
    """
    N0 = np.asarray(N0, dtype=np.float64)
    grid = N0.shape[:-2]
    if len(C) == 0:
        return np.sqrt(np.sum(N0 * N0, axis=(-2, -1)))
    h = h_coefficients(N0, C).reshape(-1, 2 * len(C) + 1)
    upper = bernstein_upper(h)
    out = upper.copy()
    need = np.nonzero(upper > limit * limit)[0]
    if need.size:
        sub = h[need]
        out[need] = exact_max(sub) if mode == "exact" else sampled_max(sub, samples)
    return np.sqrt(np.maximum(out, 0.0)).reshape(grid)
