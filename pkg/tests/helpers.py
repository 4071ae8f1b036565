import numpy as np
from scipy.stats import ortho_group


def _orth(m, rng):
    if m == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(m, random_state=rng)


def ball_samples(m1, m2, n, rng, radius=None):
    """Matrices ``P diag(s) Q^T`` with ``sum s^2 <= radius^2`` (default ``m2``).

    Singular values are drawn so a fraction of samples sit on the boundary
    sphere, where the bounds are tight.
    """
    radius = np.sqrt(m2) if radius is None else radius
    out = np.empty((n, m1, m2))
    for k in range(n):
        s = rng.random(m2)
        s *= radius / np.linalg.norm(s)
        if k % 4:
            s *= rng.random() ** (1.0 / (m1 * m2))
        P = _orth(m1, rng)[:, :m2]
        Q = _orth(m2, rng)
        out[k] = (P * s) @ Q.T
    return out


def orthonormal_columns(m1, m2, rng):
    return _orth(m1, rng)[:, :m2]
