"""Independent reference implementations used only by the tests."""
import mpmath
import numpy as np


def phi_mp(j, z, terms=200, dps=60):
    """High-precision ``phi_j(z)``: truncated series near 0, direct formula beyond."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        if abs(z) <= 20:
            return sum(z ** k / mpmath.factorial(k + j) for k in range(terms))
        s = sum(z ** k / mpmath.factorial(k) for k in range(j))
        return (mpmath.exp(z) - s) / z ** j


def brute_poly_max(N0, C, samples):
    """``max_s ||N0 + sum_k C_k s^k||_F`` by dense sampling, per leading index."""
    s = np.linspace(0.0, 1.0, samples)
    P = np.broadcast_to(N0[:, None], (N0.shape[0], samples) + N0.shape[1:]).copy()
    for k, Ck in enumerate(C, start=1):
        P += Ck[:, None] * (s ** k)[None, :, None, None]
    return np.sqrt(np.sum(P * P, axis=(-2, -1))).max(axis=1)
