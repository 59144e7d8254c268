"""Recursive multilevel Picard estimator with exact cost accounting.

One realization of the level-``n`` estimator at time ``t`` is built from

* a base term: the average of ``m**n`` fresh drift evaluations at the
  initial value, scaled by ``t``, and
* for each level ``l = 1..n-1``, an average of ``m**(n-l)`` coupled
  differences ``F(A, Z) - F(B, Z)``, where ``A`` and ``B`` are recursive
  level-``l`` and level-``(l-1)`` realizations evaluated at the *same*
  uniformly drawn random time ``s = r*t`` and against the *same* draw
  ``Z``, but with independent recursion randomness.

The coupling (shared ``r`` and ``Z``, independent inner streams) is what
makes the level differences small; it is realised through the stream tree:
the level-(l, k) node stream supplies ``r`` and ``Z`` and is itself handed
to the A-recursion, while the B-recursion gets the sibling stream with
index ``-k``.  Concretely, a call on stream theta touches these children::

    theta -> (0, k)   k = 1..m**n        base-term Z draws
    theta -> (l, k)   k = 1..m**(n-l)    r, Z, and the A-recursion subtree
    theta -> (l, -k)                     the B-recursion subtree

This two-integers-per-level path encoding is frozen; reproducibility of
every experiment rests on it.

Cost accounting is exact, not an estimate: ``rv_exact`` evaluates the draw
count recursion with equality, and the ledger recorded by one estimator
call matches it draw for draw.  Summation order is fixed (base term first,
then levels ascending, k ascending) so floating-point results are
reproducible.

``mlp_estimate`` is the scalar reference implementation.
``mlp_estimate_batch`` runs many independent realizations in lockstep on a
:class:`~mlpicard.rng.StreamBundle`; per lane it draws the identical
(seed, path, counter) values, and its sum orders match the scalar engine
(base-term averages are chunked at a fixed size, so for ``m**n`` beyond
the chunk size the grouping of additions differs - values then agree to
rounding rather than bit for bit).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .problems import ExpectationOdeProblem
from .rng import SplittableStream, StreamBundle, _child_keys_np

__all__ = [
    "CostLedger",
    "MlpParams",
    "mlp_estimate",
    "mlp_estimate_batch",
    "rv_bound",
    "rv_exact",
]

# Base-term draws are vectorised over k in blocks of this many indices.
# Fixed (never derived from batch width or thread count) so that chunk
# boundaries, and with them every rounding decision, depend only on (n, m).
_BASE_CHUNK = 512


@dataclass
class CostLedger:
    """Exact draw counts accumulated by estimator calls.

    ``z_draws`` counts Z realizations (one per ``sample_z`` call),
    ``uniform_draws`` counts the random evaluation times r, and ``f_evals``
    counts drift evaluations.  Every Z is consumed by one base evaluation
    or by one coupled difference (two evaluations, one time draw), so
    ``f_evals == z_draws + uniform_draws`` always holds.
    """

    z_draws: int = 0
    uniform_draws: int = 0
    f_evals: int = 0

    def merge(self, other: "CostLedger") -> "CostLedger":
        """Componentwise sum; associative and commutative."""
        return CostLedger(
            self.z_draws + other.z_draws,
            self.uniform_draws + other.uniform_draws,
            self.f_evals + other.f_evals,
        )

    __add__ = merge


@dataclass(frozen=True)
class MlpParams:
    """Picard level ``n >= 0``, Monte Carlo base ``m >= 1``, time ``t``."""

    n: int
    m: int
    t: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("level n must be nonnegative")
        if self.m < 1:
            raise ValueError("base m must be a positive integer")
        if not self.t >= 0.0:
            raise ValueError("time t must be nonnegative")

    def validate_for(self, problem: ExpectationOdeProblem) -> None:
        if self.t > problem.horizon:
            raise ValueError(
                f"time t={self.t} exceeds problem horizon {problem.horizon}"
            )


@lru_cache(maxsize=None)
def rv_exact(n: int, m: int) -> int:
    """Exact number of Z draws consumed by one level-``n`` realization.

    Satisfies rv(0, m) = 0 and, for n >= 1,

        rv(n, m) = m**n + sum_{l=1}^{n-1} m**(n-l) * (1 + rv(l, m) + rv(l-1, m)).

    Computed with Python's arbitrary-precision integers, so there is no
    overflow regime; results are exact for any (n, m).
    """
    if n < 0:
        raise ValueError("level n must be nonnegative")
    if m < 1:
        raise ValueError("base m must be a positive integer")
    if n == 0:
        return 0
    total = m**n
    for l in range(1, n):
        total += m ** (n - l) * (1 + rv_exact(l, m) + rv_exact(l - 1, m))
    return total


def rv_bound(n: int, m: int) -> int:
    """Closed-form draw-count bound ``(3m)**n``; requires ``n >= 1``."""
    if n < 1:
        raise ValueError("rv_bound requires n >= 1")
    if m < 1:
        raise ValueError("base m must be a positive integer")
    return (3 * m) ** n


def mlp_estimate(
    problem: ExpectationOdeProblem,
    params: MlpParams,
    stream: SplittableStream,
    ledger: CostLedger,
) -> np.ndarray:
    """One realization of the level-(n, m) estimator at time ``params.t``.

    Pure function of (problem, params, stream state); the ledger is
    accumulated in place.  Returns a fresh vector of shape (dim,).
    """
    params.validate_for(problem)
    return _estimate_scalar(problem, params.n, params.m, params.t, stream, ledger)


def _estimate_scalar(problem, n, m, t, stream, ledger):
    xi = problem.xi
    if n == 0:
        return xi.copy()

    drift = problem.drift
    sample_z = problem.sample_z

    base = stream.spawn(0)
    acc = np.zeros(problem.dim)
    for k in range(1, m**n + 1):
        z = sample_z(base.spawn(k))
        acc = acc + drift(xi, z)
    count = m**n
    ledger.z_draws += count
    ledger.f_evals += count
    out = xi + (t / count) * acc

    for l in range(1, n):
        level = stream.spawn(l)
        width = m ** (n - l)
        acc = np.zeros(problem.dim)
        for k in range(1, width + 1):
            node = level.spawn(k)
            r = node.next_uniform()
            z = sample_z(node)
            s = r * t
            a = _estimate_scalar(problem, l, m, s, node, ledger)
            b = _estimate_scalar(problem, l - 1, m, s, level.spawn(-k), ledger)
            acc = acc + (drift(a, z) - drift(b, z))
        ledger.uniform_draws += width
        ledger.z_draws += width
        ledger.f_evals += 2 * width
        out = out + (t / width) * acc
    return out


def mlp_estimate_batch(
    problem: ExpectationOdeProblem,
    n: int,
    m: int,
    t,
    bundle: StreamBundle,
    ledger: CostLedger,
) -> np.ndarray:
    """Independent estimator realizations for every lane of ``bundle``.

    ``t`` may be a scalar (broadcast to all lanes) or an array matching the
    bundle's lane shape.  Requires the problem's batch hooks.  Lane ``i``
    uses exactly the draws that ``mlp_estimate`` would use on a scalar
    stream with the same (seed, path).  Returns shape ``(*lanes, dim)``.
    """
    if not problem.has_batch:
        raise ValueError(f"problem {problem.name!r} has no batch hooks")
    if n < 0:
        raise ValueError("level n must be nonnegative")
    if m < 1:
        raise ValueError("base m must be a positive integer")
    keys = bundle.keys
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), keys.shape)
    return _estimate_batch(problem, n, m, t, keys, ledger)


def _estimate_batch(problem, n, m, t, keys, ledger):
    xi = problem.xi
    lanes = keys.shape
    nlanes = keys.size
    if n == 0:
        return np.broadcast_to(xi, lanes + (problem.dim,)).copy()

    drift = problem.drift_batch
    sample_z = problem.sample_z_batch

    base_keys = _child_keys_np(keys, 0)
    count = m**n
    acc = np.zeros(lanes + (problem.dim,))
    for k0 in range(1, count + 1, _BASE_CHUNK):
        ks = np.arange(k0, min(k0 + _BASE_CHUNK, count + 1), dtype=np.int64)
        chunk = StreamBundle(
            _child_keys_np(base_keys[None, ...], ks.reshape((-1,) + (1,) * keys.ndim))
        )
        z = sample_z(chunk)
        acc += np.add.reduce(drift(xi, z), axis=0)
    ledger.z_draws += count * nlanes
    ledger.f_evals += count * nlanes
    out = xi + (t / count)[..., None] * acc

    for l in range(1, n):
        level_keys = _child_keys_np(keys, l)
        width = m ** (n - l)
        acc = np.zeros(lanes + (problem.dim,))
        for k in range(1, width + 1):
            node = StreamBundle(_child_keys_np(level_keys, k))
            r = node.next_uniform()
            z = sample_z(node)
            s = r * t
            a = _estimate_batch(problem, l, m, s, node.keys, ledger)
            b = _estimate_batch(
                problem, l - 1, m, s, _child_keys_np(level_keys, -k), ledger
            )
            acc += drift(a, z) - drift(b, z)
        ledger.uniform_draws += width * nlanes
        ledger.z_draws += width * nlanes
        ledger.f_evals += 2 * width * nlanes
        out = out + (t / width)[..., None] * acc
    return out
