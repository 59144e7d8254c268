"""Theoretical bound evaluators, iteration schedules, and the RMSE-vs-cost
experiment harness.

The error bound implemented here is, for level n, base m, on a problem
with horizon T, Lipschitz constant L and second moment M2 = E[||F(xi,Z)||^2],

    bound(n, m) = T * sqrt(M2) * (1 + 2LT)^n * exp(LT + m/2) / m^(n/2),

valid for the root-mean-square error of the level-(n, m) estimator at the
horizon.  With the two indices coupled (m = n) the bound eventually decays
faster than any polynomial, which is what drives the iteration schedule:
``n_epsilon`` returns the smallest n whose whole coupled tail
sup_{m >= n} C e^{m/2} (1+2LT)^m m^{-m/2} sits below a target eps, where
C = T sqrt(M2) e^{LT}.  The tail supremum is computed exactly: the summand
is increasing in m up to (1+2LT)^2 and decreasing afterwards (compare the
sign of d/dm log: log(1+2LT) - log(m)/2), so a finite scan up to that
threshold suffices.

``rmse_experiment`` measures empirical root-mean-square errors against the
deterministic reference solution, so the only statistical noise in a row
is the estimator's own.  Replication j always runs on the stream
``root(seed).spawn(j)``; results are therefore reproducible bit for bit
for a fixed seed, independent of how replications are chunked across
worker threads.  Wall-clock times are kept on the in-memory report but
never written to the CSV/JSON artifacts, which must be byte-identical
across reruns.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .baseline import BaselineParams, mc_euler, mc_euler_batch, reference_solve
from .mlp import CostLedger, mlp_estimate_batch, _estimate_scalar, rv_bound, rv_exact
from .problems import ExpectationOdeProblem
from .rng import GAUSSIAN_ALGORITHM, RNG_ALGORITHM, SplittableStream, StreamBundle

__all__ = [
    "BoundInputs",
    "CSV_HEADER",
    "InsufficientDataError",
    "RmseReport",
    "RmseRow",
    "Schedule",
    "complexity_fit",
    "error_bound",
    "fit_power_law",
    "n_epsilon",
    "rmse_experiment",
    "tail_bound_max",
]

CSV_HEADER = "scheme,n,m,R,rmse,bound,rv_exact,rv_bound,wall_ms,seed"


class InsufficientDataError(ValueError):
    """Raised when a fit is requested on fewer than three usable rows."""


@dataclass(frozen=True)
class BoundInputs:
    """The constants (T, L, M2) every bound evaluator needs."""

    horizon: float
    lipschitz: float
    f_xi_second_moment: float

    def __post_init__(self):
        for name in ("horizon", "lipschitz", "f_xi_second_moment"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    @classmethod
    def from_problem(cls, problem: ExpectationOdeProblem) -> "BoundInputs":
        return cls(problem.horizon, problem.lipschitz, problem.f_xi_second_moment)

    @property
    def big_c(self) -> float:
        """C = T sqrt(M2) e^{LT}, the leading constant of every bound."""
        return (
            self.horizon
            * math.sqrt(self.f_xi_second_moment)
            * math.exp(self.lipschitz * self.horizon)
        )


def error_bound(inputs: BoundInputs, n: int, m: int) -> float:
    """Root-mean-square error bound for the level-(n, m) estimator at T.

    Evaluated in log space so huge (n, L, T) overflow cleanly to +inf
    instead of raising.
    """
    if n < 0:
        raise ValueError("level n must be nonnegative")
    if m < 1:
        raise ValueError("base m must be a positive integer")
    lead = inputs.horizon * math.sqrt(inputs.f_xi_second_moment)
    if lead == 0.0:
        return 0.0
    logv = (
        math.log(lead)
        + n * math.log1p(2.0 * inputs.lipschitz * inputs.horizon)
        + inputs.lipschitz * inputs.horizon
        + 0.5 * m
        - 0.5 * n * math.log(m)
    )
    try:
        return math.exp(logv)
    except OverflowError:
        return math.inf


def tail_bound_max(inputs: BoundInputs, n: int) -> float:
    """sup over integer m >= n of C e^{m/2} (1+2LT)^m m^{-m/2}.

    Exact by monotonicity: the summand decreases once m >= (1+2LT)^2, so
    the supremum is attained on the finite scan [n, ceil((1+2LT)^2) + 1].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if inputs.big_c == 0.0:
        return 0.0
    log_a = math.log1p(2.0 * inputs.lipschitz * inputs.horizon)
    m_hi = max(n, math.ceil(math.exp(2.0 * log_a)) + 1)
    log_c = math.log(inputs.big_c)
    best = -math.inf
    for m in range(n, m_hi + 1):
        best = max(best, log_c + 0.5 * m + m * log_a - 0.5 * m * math.log(m))
    try:
        return math.exp(best)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Schedule:
    """Iteration count and total cost prescribed for a target accuracy.

    ``total_cost`` is the exact number of Z draws needed to run every
    coupled estimator up to level ``n_epsilon + mathfrak_n`` once,
    i.e. sum_{n=1}^{N+offset} rv_exact(n, n); ``tail_bound`` is the
    computed tail supremum at ``n_epsilon`` (always <= epsilon).
    """

    epsilon: float
    n_epsilon: int
    mathfrak_n: int
    total_cost: int
    tail_bound: float


def n_epsilon(inputs: BoundInputs, epsilon: float, mathfrak_n: int = 0) -> Schedule:
    """Smallest n whose coupled tail bound is below ``epsilon``.

    Finite for every epsilon in (0, 1] because the coupled bound decays to
    zero; monotonically nondecreasing as epsilon shrinks.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if mathfrak_n < 0:
        raise ValueError("mathfrak_n must be nonnegative")
    n = 1
    while True:
        tail = tail_bound_max(inputs, n)
        if tail <= epsilon:
            break
        n += 1
    total = sum(rv_exact(j, j) for j in range(1, n + mathfrak_n + 1))
    return Schedule(epsilon, n, mathfrak_n, total, tail)


@dataclass
class RmseRow:
    """One grid point of an experiment.

    For the ``mlp`` scheme (n, m) are the estimator indices; for
    ``mc_euler`` they carry (K, M).  ``rv`` is the exact Z-draw count of
    one realization, ``cum_z_draws`` the running total down the report.
    ``wall_ms`` is measured but excluded from the serialized artifacts.
    """

    scheme: str
    n: int
    m: int
    replications: int
    rmse: float
    bound: float | None
    rv: int
    rv_bound: int | None
    cum_z_draws: int
    wall_ms: float
    valid: bool


@dataclass
class RmseReport:
    """Rows plus the metadata needed to reproduce them."""

    problem: str
    scheme: str
    seed: int
    eval_time: float
    rows: list[RmseRow] = field(default_factory=list)
    config: dict | None = None

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    (
                        r.scheme,
                        str(r.n),
                        str(r.m),
                        str(r.replications),
                        repr(r.rmse),
                        "" if r.bound is None else repr(r.bound),
                        str(r.rv),
                        "" if r.rv_bound is None else str(r.rv_bound),
                        "",  # wall_ms: measured, but artifacts stay deterministic
                        str(self.seed),
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def json_doc(self) -> dict:
        rows = [
            {
                "scheme": r.scheme,
                "n": r.n,
                "m": r.m,
                "R": r.replications,
                "rmse": None if math.isnan(r.rmse) else r.rmse,
                "bound": r.bound,
                "rv_exact": r.rv,
                "rv_bound": r.rv_bound,
                "cum_z_draws": r.cum_z_draws,
                "wall_ms": None,
                "valid": r.valid,
            }
            for r in self.rows
        ]
        return {
            "config": self.config,
            "rows": rows,
            "version": __version__,
            "seed": self.seed,
            "problem": self.problem,
            "scheme": self.scheme,
            "eval_time": self.eval_time,
            "rng": {"algorithm": RNG_ALGORITHM, "gaussian": GAUSSIAN_ALGORITHM},
        }

    def json_text(self) -> str:
        return json.dumps(self.json_doc(), indent=2) + "\n"

    def write(self, path: str, fmt: str = "csv") -> None:
        if fmt == "csv":
            _atomic_write_text(path, self.csv_text())
        elif fmt == "json":
            _atomic_write_text(path, self.json_text())
        else:
            raise ValueError(f"unknown format {fmt!r}")


def _atomic_write_text(path: str, text: str) -> None:
    """Write via temp file + rename so no partial file is ever visible."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lane_chunks(replications: int, threads: int) -> list[range]:
    """Contiguous chunks of the lane indices 1..R (chunking never affects
    per-lane values, only scheduling)."""
    threads = max(1, min(threads, replications))
    bounds = np.linspace(1, replications + 1, threads + 1).astype(int)
    return [range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _mlp_chunk(problem, n, m, t, seed, lanes):
    ledger = CostLedger()
    if problem.has_batch:
        bundle = StreamBundle.root_children(seed, np.arange(lanes.start, lanes.stop))
        out = mlp_estimate_batch(problem, n, m, t, bundle, ledger)
    else:
        root = SplittableStream.root(seed)
        out = np.empty((len(lanes), problem.dim))
        for i, j in enumerate(lanes):
            out[i] = _estimate_scalar(problem, n, m, t, root.spawn(j), ledger)
    return out, ledger


def _euler_chunk(problem, params, seed, lanes):
    ledger = CostLedger()
    if problem.has_batch:
        bundle = StreamBundle.root_children(seed, np.arange(lanes.start, lanes.stop))
        out = mc_euler_batch(problem, params, bundle, ledger)
    else:
        root = SplittableStream.root(seed)
        out = np.empty((len(lanes), problem.dim))
        for i, j in enumerate(lanes):
            out[i] = mc_euler(problem, params, root.spawn(j), ledger)
    return out, ledger


def rmse_experiment(
    problem: ExpectationOdeProblem,
    scheme: str,
    grid: Sequence[tuple[int, int]],
    replications: int,
    seed: int,
    *,
    eval_time: float | None = None,
    threads: int = 1,
    reference_step: float = 1e-4,
) -> RmseReport:
    """Empirical RMSE, theoretical bound, and exact cost per grid point.

    Each grid point runs ``replications`` independent realizations on the
    streams ``root(seed).spawn(j)``, j = 1..R, and measures the RMSE
    against the deterministic reference solution at ``eval_time`` (the
    horizon by default).  A realization containing NaN/inf marks its row
    invalid (rmse = nan) rather than being dropped.
    """
    if scheme not in ("mlp", "mc_euler"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if replications < 2:
        raise ValueError("replications must be >= 2")
    if not grid:
        raise ValueError("grid must be nonempty")
    t = problem.horizon if eval_time is None else float(eval_time)
    if not 0.0 <= t <= problem.horizon:
        raise ValueError(f"eval_time {t} outside [0, {problem.horizon}]")
    if scheme == "mc_euler" and t != problem.horizon:
        raise ValueError("the Euler baseline only evaluates at the horizon")

    ref = reference_solve(problem, t, step=reference_step)
    inputs = BoundInputs.from_problem(problem)
    chunks = _lane_chunks(replications, threads)
    report = RmseReport(problem.name, scheme, seed, t)

    cum = 0
    for a, b in grid:
        t0 = time.perf_counter()
        if scheme == "mlp":
            run = lambda lanes: _mlp_chunk(problem, a, b, t, seed, lanes)
            per_real = rv_exact(a, b)
            bound = error_bound(inputs, a, b)
            bound_rv = rv_bound(a, b) if a >= 1 else None
        else:
            params = BaselineParams(a, b)
            run = lambda lanes: _euler_chunk(problem, params, seed, lanes)
            per_real = a * b
            bound = None
            bound_rv = None

        if len(chunks) == 1:
            parts = [run(chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                parts = list(pool.map(run, chunks))
        estimates = np.concatenate([p[0] for p in parts], axis=0)
        ledger = CostLedger()
        for p in parts:
            ledger = ledger.merge(p[1])
        if scheme == "mlp" and ledger.z_draws != per_real * replications:
            raise RuntimeError(
                "cost accounting violated: "
                f"{ledger.z_draws} z draws != {per_real} * {replications}"
            )

        wall_ms = (time.perf_counter() - t0) * 1e3
        finite = bool(np.isfinite(estimates).all())
        if finite:
            sq = np.add.reduce((estimates - ref) ** 2, axis=-1)
            rmse = math.sqrt(float(np.add.reduce(sq, axis=0)) / replications)
        else:
            rmse = math.nan
        cum += per_real
        report.rows.append(
            RmseRow(
                scheme=scheme,
                n=a,
                m=b,
                replications=replications,
                rmse=rmse,
                bound=bound,
                rv=per_real,
                rv_bound=bound_rv,
                cum_z_draws=cum,
                wall_ms=wall_ms,
                valid=finite,
            )
        )
    return report


def fit_power_law(costs: Sequence, rmses: Sequence[float]) -> tuple[float, float]:
    """OLS of log(cost) on log(1/rmse); returns (slope, intercept).

    On rows following cost = rmse^-p exactly the slope is p to rounding.
    """
    if len(costs) != len(rmses):
        raise ValueError("costs and rmses must have equal length")
    if len(costs) < 3:
        raise InsufficientDataError("insufficient data: need at least 3 rows")
    x = np.array([-math.log(r) for r in rmses])
    y = np.array([math.log(c) for c in costs])
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("costs and rmses must be positive and finite")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def complexity_fit(report: RmseReport) -> tuple[float, float]:
    """Cost exponent from a report: OLS of log(cumulative z draws) against
    log(1 / empirical rmse) over the valid rows with positive rmse."""
    rows = [
        r
        for r in report.rows
        if r.valid and math.isfinite(r.rmse) and r.rmse > 0.0 and r.cum_z_draws > 0
    ]
    if len(rows) < 3:
        raise InsufficientDataError(
            "insufficient data: need >= 3 valid rows with positive rmse"
        )
    return fit_power_law([r.cum_z_draws for r in rows], [r.rmse for r in rows])
