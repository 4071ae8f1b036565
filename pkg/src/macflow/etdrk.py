"""Rescaled exponential time differencing Runge-Kutta schemes of order 1..5.

One step of order ``r`` climbs a ladder of levels.  Level 0 approximates the
nonlinearity on ``[t_n, t_n + tau]`` by the constant ``N[U^n]``.  Level ``q``
evaluates the order-``q`` solution ``W_q`` at the nodes ``k/q`` using the
level ``q-1`` polynomial, fits a degree-``q`` polynomial through
``N[W_q]`` at those nodes, and damps it pointwise by ``alpha`` so that its
norm never exceeds ``kappa*sqrt(m2)``.  The order-``r`` update is ``W_r``
at the end of the step, built from the level ``r-1`` polynomial.

In the interval variable ``sigma = s/tau``::

    P_q(sigma) = N0 + sum_k C_k sigma^k,   Ptilde_q = alpha * P_q
    W(c tau) = phi_0(c tau L) U + alpha c tau phi_1(c tau L) N0
               + alpha c tau sum_k k! c^k phi_{k+1}(c tau L) C_k
"""
from dataclasses import dataclass, field

import numpy as np

from .matfield import MatrixField, PreconditionError, as_array, check_mbp, stabilized_N, sup_frob
from .polymax import bounded_sup_norm, poly_sup_norm
from .spectral import build_cache, forward, inverse

MAX_ORDER = 5
_FACT = [1, 1, 2, 6, 24, 120, 720, 5040]


@dataclass
class LadderLevel:
    q: int
    nodes: np.ndarray  # a_{q,1..q} = k/q
    V: np.ndarray
    Vinv: np.ndarray
    sigma_min: float


@dataclass
class SchemeLadder:
    """Interpolation data for every level ``q = 1..r-1`` of an order-``r`` step."""

    r: int
    levels: dict

    def level(self, q):
        try:
            return self.levels[q]
        except KeyError:
            raise ValueError(f"ladder of order {self.r} has no level {q}") from None

    def fractions(self):
        """Stage fractions needed by a step: ``{k/q : 1 <= k <= q <= r-1} | {1}``."""
        fr = {1.0}
        for lv in self.levels.values():
            fr.update(float(a) for a in lv.nodes)
        return sorted(fr)


def vandermonde(nodes):
    """``V[i, k] = nodes[i] ** (k+1)`` (no constant column)."""
    nodes = np.asarray(nodes, dtype=np.float64)
    return nodes[:, None] ** np.arange(1, nodes.size + 1)[None, :]


def build_ladder(r):
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_ORDER:
        raise ValueError(f"scheme order must be an integer in [1, {MAX_ORDER}], got {r!r}")
    levels = {}
    for q in range(1, r):
        nodes = np.array([k / q for k in range(1, q + 1)])
        V = vandermonde(nodes)
        levels[q] = LadderLevel(q=q, nodes=nodes, V=V, Vinv=np.linalg.inv(V),
                                sigma_min=float(np.linalg.svd(V, compute_uv=False).min()))
    return SchemeLadder(r=int(r), levels=levels)


def tau_max(r, kappa, ladder=None):
    """Sufficient step size for discrete energy decay (``inf`` for r <= 2)."""
    if r < 1:
        raise ValueError(f"order must be >= 1, got {r}")
    if r <= 2:
        return float("inf")
    ladder = ladder if ladder is not None and ladder.r >= r else build_ladder(r)
    worst = min(ladder.level(j).sigma_min / j for j in range(1, r))
    return worst / (10.0 * kappa)


def stage_coefficients(stage_values, N0, ladder, q):
    """Monomial coefficients ``C_1..C_q`` interpolating ``stage_values`` at the level-q nodes."""
    lv = ladder.level(q)
    if len(stage_values) != q:
        raise ValueError(f"level {q} needs {q} stage values, got {len(stage_values)}")
    N0 = as_array(N0)
    D = [as_array(s) - N0 for s in stage_values]
    C = []
    for i in range(q):
        acc = lv.Vinv[i, 0] * D[0]
        for k in range(1, q):
            acc = acc + lv.Vinv[i, k] * D[k]
        C.append(acc)
    return C


def rescale_alpha(maxP, kappa, m2):
    """``min(kappa*sqrt(m2) / maxP, 1)`` pointwise, with ``alpha = 1`` where maxP = 0."""
    maxP = np.asarray(maxP, dtype=np.float64)
    limit = kappa * np.sqrt(m2)
    alpha = np.ones_like(maxP)
    over = maxP > limit
    alpha[over] = limit / maxP[over]
    return alpha


@dataclass
class StagePolynomial:
    """Rescaled interpolant ``alpha * (N0 + sum_k C_k sigma^k)``."""

    q: int
    N0: np.ndarray
    C: list
    alpha: np.ndarray

    def __call__(self, sigma):
        """Pointwise value at a scalar ``sigma`` in [0, 1]."""
        P = self.N0.copy()
        for k, Ck in enumerate(self.C, start=1):
            P = P + Ck * sigma ** k
        return self.alpha[..., None, None] * P

    def scaled_terms(self):
        a = self.alpha[..., None, None]
        return [a * self.N0] + [a * Ck for Ck in self.C]


@dataclass
class StepStats:
    alpha_min: list = field(default_factory=list)  # per level q = 1..r-1
    alpha_mean: list = field(default_factory=list)
    sup_frob: float = float("nan")
    polys: list = None

    @property
    def overall_alpha_min(self):
        return min(self.alpha_min) if self.alpha_min else 1.0


def _physical(x):
    return x.data if isinstance(x, MatrixField) else np.asarray(x, dtype=np.float64)


def evaluate_stage(Un, poly, c, cache, Un_hat=None, terms_hat=None):
    """Solution of the linear-plus-polynomial problem at time ``c*tau``.

    ``Un_hat`` and ``terms_hat`` (transforms of ``Un`` and of
    ``poly.scaled_terms()``) may be passed in to avoid recomputing them
    across the nodes of one level.
    """
    U = _physical(Un)
    shape = U.shape[:2]
    c = float(c)
    if Un_hat is None:
        Un_hat = forward(U)
    if terms_hat is None:
        terms_hat = [forward(t) for t in poly.scaled_terms()]
    ct = c * cache.tau
    acc = cache.table(0, c) * Un_hat
    acc += ct * cache.table(1, c) * terms_hat[0]
    for k in range(1, len(terms_hat)):
        acc += (ct * _FACT[k] * c ** k) * cache.table(k + 1, c) * terms_hat[k]
    out = inverse(acc, shape)
    return MatrixField(out) if isinstance(Un, MatrixField) else out


class RescaledETDRK:
    """Order-``r`` rescaled ETDRK stepper with precomputed symbols.

    ``rescale_mode`` is ``"exact"`` (root-based polynomial maxima, the
    bound then holds to round-off) or ``"sampled"`` (Chebyshev sampling,
    bound holds only up to the sampling error).
    """

    def __init__(self, params, grid, r, tau, rescale_mode="exact", samples=65, symbol="fd"):
        if rescale_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown rescale mode {rescale_mode!r}")
        self.params = params
        self.grid = tuple(grid)
        self.r = r
        self.tau = float(tau)
        self.rescale_mode = rescale_mode
        self.samples = samples
        self.ladder = build_ladder(r)
        self.cache = build_cache(self.grid, params.epsilon, params.kappa, tau,
                                 self.ladder.fractions(), jmax=r, symbol=symbol)

    def step(self, Un, keep_polys=False):
        return step(Un, self.r, self.ladder, self.cache, self.params,
                    rescale_mode=self.rescale_mode, samples=self.samples,
                    keep_polys=keep_polys)


def step(Un, r, ladder, cache, params, rescale_mode="exact", samples=65, keep_polys=False):
    """Advance one step; returns ``(U_next, StepStats)``.

    Raises ``PreconditionError`` if ``Un`` is non-finite or outside the
    ball ``||U||_F <= sqrt(m2)``.
    """
    if ladder.r != r:
        raise ValueError(f"ladder order {ladder.r} does not match scheme order {r}")
    U = _physical(Un)
    m2 = U.shape[-1]
    check_mbp(U, m2)
    kappa = params.kappa
    limit = kappa * np.sqrt(m2)

    stats = StepStats(polys=[] if keep_polys else None)
    Uh = forward(U)
    N0 = stabilized_N(U, kappa)
    N0h = forward(N0)
    grid_scalar = U.shape[:2]
    poly = StagePolynomial(q=0, N0=N0, C=[], alpha=np.ones(grid_scalar))
    terms_hat = [N0h]

    for q in range(1, r):
        lv = ladder.level(q)
        stage_N = []
        for c in lv.nodes:
            W = evaluate_stage(U, poly, c, cache, Un_hat=Uh, terms_hat=terms_hat)
            stage_N.append(stabilized_N(W, kappa))
        C = stage_coefficients(stage_N, N0, ladder, q)
        if rescale_mode == "exact":
            maxP = bounded_sup_norm(N0, C, limit)
        else:
            maxP = poly_sup_norm(N0, C, mode="sampled", samples=samples)
        alpha = rescale_alpha(maxP, kappa, m2)
        poly = StagePolynomial(q=q, N0=N0, C=C, alpha=alpha)
        stats.alpha_min.append(float(alpha.min()))
        stats.alpha_mean.append(float(alpha.mean()))
        if keep_polys:
            stats.polys.append(poly)
        if np.all(alpha == 1.0):
            terms_hat = [N0h] + [forward(Ck) for Ck in C]
        else:
            terms_hat = [forward(t) for t in poly.scaled_terms()]

    U_next = evaluate_stage(U, poly, 1.0, cache, Un_hat=Uh, terms_hat=terms_hat)
    stats.sup_frob = sup_frob(U_next)
    if isinstance(Un, MatrixField):
        U_next = Un.with_data(U_next)
    return U_next, stats


def etdrk1_closed_form(Un, cache, params):
    """First-order update ``e^{tau L} U + (e^{tau L} - I) L^{-1} N[U]`` via ``L^{-1}``.

    Used as an independent reference; requires every symbol to be nonzero.
    """
    if np.any(cache.lam == 0):
        raise PreconditionError("closed form needs an invertible operator")
    U = _physical(Un)
    lam = cache.lam[:, :, None, None]
    E = np.exp(cache.tau * lam)
    Uh = forward(U)
    Nh = forward(stabilized_N(U, params.kappa))
    return inverse(E * Uh + (E - 1.0) / lam * Nh, U.shape[:2])
