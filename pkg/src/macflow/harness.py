"""Experiment orchestration: full runs, convergence tables, step-size bounds."""
import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import record
from .energy import discrete_energy
from .etdrk import RescaledETDRK, build_ladder, tau_max
from .matfield import MatrixField, ModelParams, PreconditionError, frob_norm
from .scenarios import ScenarioSpec

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    params: ModelParams
    nx: int
    ny: int
    order: int
    tau: float
    T: float
    scenario: ScenarioSpec
    snapshot_times: tuple = ()
    rescale_mode: str = "exact"
    samples: int = 65
    symbol: str = "fd"
    output_dir: str = None
    series_stride: int = 1

    def __post_init__(self):
        if not self.tau > 0:
            raise PreconditionError(f"tau must be positive, got {self.tau}")
        if not self.T >= self.tau * (1 - 1e-12):
            raise PreconditionError(f"T={self.T} must be at least tau={self.tau}")
        if self.rescale_mode not in ("exact", "sampled"):
            raise PreconditionError(f"unknown rescale mode {self.rescale_mode!r}")
        if self.series_stride < 1:
            raise PreconditionError("series_stride must be >= 1")
        for ts in self.snapshot_times:
            if ts < 0 or ts > self.T * (1 + 1e-12):
                raise PreconditionError(f"snapshot time {ts} outside [0, T={self.T}]")

    @property
    def n_steps(self):
        return steps_for(self.T, self.tau)


def steps_for(T, tau):
    n = T / tau
    steps = round(n)
    if steps < 1 or abs(n - steps) > 1e-9 * max(1.0, n):
        raise PreconditionError(f"tau={tau} does not divide T={T}")
    return int(steps)


@dataclass
class RunDiagnostics:
    series: list = field(default_factory=list)
    step_alpha_mean: list = field(default_factory=list)
    snapshot_steps: dict = field(default_factory=dict)
    config: RunConfig = None


def run_simulation(config, initial=None, callback=None):
    """Time-step ``config`` from 0 to T; returns ``(RunDiagnostics, snapshots)``.

    ``snapshots`` maps each configured time (rounded to the nearest step) to a
    ``MatrixField``.  ``callback(n, field, stats)`` is invoked after each step.
    """
    p = config.params
    stepper = RescaledETDRK(p, (config.nx, config.ny), config.order, config.tau,
                            rescale_mode=config.rescale_mode, samples=config.samples,
                            symbol=config.symbol)
    U = initial if initial is not None else config.scenario.build()
    if (U.nx, U.ny, U.m1, U.m2) != (config.nx, config.ny, p.m1, p.m2):
        raise PreconditionError(
            f"initial field {U.data.shape} does not match config grid/shape")
    n_steps = config.n_steps
    snap_at = {}
    for ts in config.snapshot_times:
        snap_at.setdefault(int(round(ts / config.tau)), []).append(float(ts))

    diag = RunDiagnostics(config=config)
    snapshots = {}

    def observe(n, field, stats):
        t = n * config.tau
        rep = discrete_energy(field, p, t=t, symbol=config.symbol)
        diag.series.append(record(n, t, field, rep, stats))
        if stats is not None:
            diag.step_alpha_mean.append(list(stats.alpha_mean))
        for ts in snap_at.get(n, ()):
            snapshots[ts] = field.copy()
            diag.snapshot_steps[ts] = n

    observe(0, U, None)
    for n in range(1, n_steps + 1):
        U, stats = stepper.step(U)
        observe(n, U, stats)
        if callback is not None:
            callback(n, U, stats)
    return diag, snapshots


def final_state(config, initial=None):
    """Solution at ``T`` without per-step diagnostics."""
    p = config.params
    stepper = RescaledETDRK(p, (config.nx, config.ny), config.order, config.tau,
                            rescale_mode=config.rescale_mode, samples=config.samples,
                            symbol=config.symbol)
    U = initial if initial is not None else config.scenario.build()
    for _ in range(config.n_steps):
        U, _ = stepper.step(U)
    return U


def field_error(A, B, norm="L2"):
    """Difference norms: ``"Linf"``, grid-weighted ``"L2"``, or raw ``"L2_raw"``."""
    a = A.data if isinstance(A, MatrixField) else np.asarray(A, float)
    b = B.data if isinstance(B, MatrixField) else np.asarray(B, float)
    if a.shape != b.shape:
        raise PreconditionError(f"shape mismatch {a.shape} vs {b.shape}")
    d = frob_norm(a - b)
    if norm == "Linf":
        return float(d.max())
    if norm == "L2":
        return float(np.sqrt(np.sum(d * d) / (a.shape[0] * a.shape[1])))
    if norm == "L2_raw":
        return float(np.sqrt(np.sum(d * d)))
    raise ValueError(f"unknown norm {norm!r}")


def rate_from_errors(e_coarse, e_fine):
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError(f"errors must be positive, got {e_coarse}, {e_fine}")
    return math.log2(e_coarse / e_fine)


@dataclass
class ConvergenceRow:
    r: int
    tau: float
    l2: float
    l2_rate: float
    linf: float
    linf_rate: float
    l2_raw: float
    l2_raw_rate: float


@dataclass
class ConvergenceTable:
    rows: list
    reference_tau: float
    reference_order: int
    T: float

    def for_order(self, r):
        return [row for row in self.rows if row.r == r]

    def to_csv(self, path):
        cols = ["r", "tau", "l2_error", "l2_rate", "linf_error", "linf_rate",
                "l2_raw_error", "l2_raw_rate"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in self.rows:
                w.writerow([row.r, repr(row.tau), repr(row.l2), _fmt_rate(row.l2_rate),
                            repr(row.linf), _fmt_rate(row.linf_rate), repr(row.l2_raw),
                            _fmt_rate(row.l2_raw_rate)])

    def metadata(self):
        return {"reference_tau": self.reference_tau, "reference_order": self.reference_order,
                "T": self.T}


def _fmt_rate(x):
    return "" if x is None else repr(x)


def convergence_study(base_config, r_list, tau_list, reference_tau=None, progress=None):
    """Errors at ``T`` against a fine reference, with rates per halving.

    The reference uses the highest order in ``r_list`` at ``reference_tau``
    (default ``min(tau_list) / 64``).
    """
    tau_list = sorted(tau_list, reverse=True)
    if reference_tau is None:
        reference_tau = min(tau_list) / 64.0
    if not reference_tau < min(tau_list) / 4.0:
        raise PreconditionError("reference_tau must be below min(tau_list)/4")
    T = base_config.T
    for tau in tau_list + [reference_tau]:
        steps_for(T, tau)
    U0 = base_config.scenario.build()
    ref_order = max(r_list)
    ref_cfg = replace(base_config, order=ref_order, tau=reference_tau, snapshot_times=())
    if progress:
        progress(f"reference r={ref_order} tau={reference_tau:g}")
    ref = final_state(ref_cfg, U0)
    rows = []
    for r in sorted(r_list):
        prev = None
        for tau in tau_list:
            cfg = replace(base_config, order=r, tau=tau, snapshot_times=())
            if progress:
                progress(f"r={r} tau={tau:g}")
            U = final_state(cfg, U0)
            errs = (field_error(U, ref, "L2"), field_error(U, ref, "Linf"),
                    field_error(U, ref, "L2_raw"))
            rates = (None, None, None) if prev is None else tuple(
                rate_from_errors(p_, e_) for p_, e_ in zip(prev, errs))
            rows.append(ConvergenceRow(r=r, tau=tau, l2=errs[0], l2_rate=rates[0],
                                       linf=errs[1], linf_rate=rates[1],
                                       l2_raw=errs[2], l2_raw_rate=rates[2]))
            prev = errs
    return ConvergenceTable(rows=rows, reference_tau=reference_tau,
                            reference_order=ref_order, T=T)


def tau_max_report(r_list, kappa, tau_used=None):
    """Rows ``{r, tau_max, tau, exceeds}``; the bound is sufficient, not necessary."""
    rows = []
    ladder = build_ladder(max(r_list))
    for r in r_list:
        tm = tau_max(r, kappa, ladder)
        rows.append({"r": r, "tau_max": tm, "tau": tau_used,
                     "exceeds": None if tau_used is None else bool(tau_used > tm)})
    return rows
