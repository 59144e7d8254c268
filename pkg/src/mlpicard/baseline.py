"""Plain Monte Carlo Euler baseline and the deterministic reference solver.

``mc_euler`` is the comparator scheme for the cost/accuracy experiments:
explicit Euler on a uniform grid of ``K`` steps, the mean drift at each
node estimated from ``M`` fresh, independent draws of Z.  Its error has a
discretisation part of order 1/K and a sampling part of order
1/sqrt(K*M); balancing them at target accuracy eps with K ~ 1/eps and
M ~ 1/eps^2 (the schedule the experiments use) makes the total cost K*M
scale like eps^-3.  The scheme itself is a choice of ours; nothing in the
estimator depends on it.

Stream layout (frozen): node j (0-based) uses the child stream
``stream.spawn(j)``, and its i-th draw comes from ``spawn(j).spawn(i)``,
i = 1..M.  Fresh draws per node keep node errors independent.

``reference_solve`` provides the "truth" for RMSE measurements without
statistical error: the closed form when the problem has one, otherwise
classical fixed-step RK4 on ``x' = exact_mean_drift(x)`` with a final
partial step to land on the requested time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import CostLedger
from .problems import ExpectationOdeProblem
from .rng import SplittableStream, StreamBundle, _child_keys_np

__all__ = ["BaselineParams", "NoReferenceError", "mc_euler", "mc_euler_batch", "reference_solve"]

_DRAW_CHUNK = 4096  # per-node Z draws vectorised in fixed blocks


class NoReferenceError(ValueError):
    """Raised when a problem has neither closed form nor exact mean drift."""


@dataclass(frozen=True)
class BaselineParams:
    """Euler grid size ``steps`` (K) and Z draws per grid node ``samples`` (M)."""

    steps: int
    samples: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.samples < 1:
            raise ValueError("samples must be a positive integer")


def mc_euler(
    problem: ExpectationOdeProblem,
    params: BaselineParams,
    stream: SplittableStream,
    ledger: CostLedger | None = None,
) -> np.ndarray:
    """One realization of the Euler baseline at the horizon.

    Y_0 = xi;  Y_{j+1} = Y_j + (T/K) * mean_i F(Y_j, Z_{j,i});  returns Y_K.
    Records K*M Z draws and drift evaluations in the ledger.
    """
    K, M = params.steps, params.samples
    h = problem.horizon / K
    y = problem.xi.copy()
    for j in range(K):
        node = stream.spawn(j)
        acc = np.zeros(problem.dim)
        for i in range(1, M + 1):
            z = problem.sample_z(node.spawn(i))
            acc = acc + problem.drift(y, z)
        y = y + (h / M) * acc
    if ledger is not None:
        ledger.z_draws += K * M
        ledger.f_evals += K * M
    return y


def mc_euler_batch(
    problem: ExpectationOdeProblem,
    params: BaselineParams,
    bundle: StreamBundle,
    ledger: CostLedger | None = None,
) -> np.ndarray:
    """Independent Euler-baseline realizations for every lane of ``bundle``.

    Lane ``i`` consumes exactly the draws of :func:`mc_euler` on the scalar
    stream with the same (seed, path).  Returns shape ``(*lanes, dim)``.
    """
    if not problem.has_batch:
        raise ValueError(f"problem {problem.name!r} has no batch hooks")
    K, M = params.steps, params.samples
    keys = bundle.keys
    h = problem.horizon / K
    y = np.broadcast_to(problem.xi, keys.shape + (problem.dim,)).copy()
    for j in range(K):
        node_keys = _child_keys_np(keys, j)
        acc = np.zeros(keys.shape + (problem.dim,))
        for i0 in range(1, M + 1, _DRAW_CHUNK):
            idx = np.arange(i0, min(i0 + _DRAW_CHUNK, M + 1), dtype=np.int64)
            chunk = StreamBundle(
                _child_keys_np(node_keys[None, ...], idx.reshape((-1,) + (1,) * keys.ndim))
            )
            z = problem.sample_z_batch(chunk)
            acc += np.add.reduce(problem.drift_batch(y, z), axis=0)
        y = y + (h / M) * acc
    if ledger is not None:
        ledger.z_draws += K * M * keys.size
        ledger.f_evals += K * M * keys.size
    return y


def reference_solve(
    problem: ExpectationOdeProblem, t: float, step: float = 1e-4
) -> np.ndarray:
    """Deterministic solution value X(t).

    The closed form takes precedence when registered; otherwise classical
    4th-order Runge-Kutta with fixed step on ``x' = exact_mean_drift(x)``,
    with one final shortened step to land exactly on ``t``.
    """
    if not 0.0 <= t <= problem.horizon:
        raise ValueError(f"t={t} outside [0, {problem.horizon}]")
    if problem.closed_form is not None:
        return np.asarray(problem.closed_form(t), dtype=np.float64).copy()
    if problem.exact_mean_drift is None:
        raise NoReferenceError(
            f"no reference available for problem {problem.name!r}: "
            "neither closed_form nor exact_mean_drift is defined"
        )
    if step <= 0.0:
        raise ValueError("step must be positive")

    g = problem.exact_mean_drift
    x = problem.xi.copy()
    nfull, rem = divmod(t, step)
    for _ in range(int(nfull)):
        x = _rk4_step(g, x, step)
    if rem > 0.0:
        x = _rk4_step(g, x, rem)
    return x


def _rk4_step(g, x, h):
    k1 = g(x)
    k2 = g(x + 0.5 * h * k1)
    k3 = g(x + 0.5 * h * k2)
    k4 = g(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
