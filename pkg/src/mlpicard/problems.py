"""Expectation-ODE problem definitions and the built-in registry.

A problem is the data of the integral equation

    X(t) = xi + int_0^t E[F(X(r), Z)] dr,        t in [0, horizon],

given by the state dimension, the initial value, the horizon, a Lipschitz
constant for ``F`` in its first argument (uniform in the second), a sampler
for Z, and the drift map F itself.  ``exact_mean_drift`` (x -> E[F(x, Z)])
and ``closed_form`` (t -> X(t)) are optional analytic extras used by the
reference solver and the error harness; ``f_xi_second_moment`` is the
declared value of E[||F(xi, Z)||^2], which the bound evaluators need as a
deterministic input (the test suite cross-validates it statistically).

Problems are immutable after construction and safe to share across
workers: ``sample_z`` and ``drift`` must be pure given their inputs, with
all randomness flowing through the stream argument.

The optional ``*_batch`` callables are the vectorised counterparts used by
the fast estimator path.  They must consume draws from their
:class:`~mlpicard.rng.StreamBundle` in exactly the pattern the scalar
``sample_z`` uses on a :class:`~mlpicard.rng.SplittableStream`; the batch
drift receives states shaped (..., dim) and the batch Z payload and must
broadcast to (..., dim).  Problems without batch hooks still work
everywhere, just slower.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .rng import SplittableStream, StreamBundle

__all__ = [
    "BUILTIN_NAMES",
    "ExpectationOdeProblem",
    "UnknownProblemError",
    "builtin",
    "problem_names",
    "register_problem",
]


class UnknownProblemError(KeyError):
    """Raised when a problem name is not in the registry."""


@dataclass(frozen=True)
class ExpectationOdeProblem:
    """The tuple (d, xi, T, L, Z-sampler, F) plus optional analytic extras."""

    name: str
    dim: int
    xi: np.ndarray
    horizon: float
    lipschitz: float
    sample_z: Callable[[SplittableStream], Any]
    drift: Callable[[np.ndarray, Any], np.ndarray]
    f_xi_second_moment: float
    exact_mean_drift: Callable[[np.ndarray], np.ndarray] | None = None
    closed_form: Callable[[float], np.ndarray] | None = None
    sample_z_batch: Callable[[StreamBundle], Any] | None = None
    drift_batch: Callable[[np.ndarray, Any], np.ndarray] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.horizon >= 0.0:
            raise ValueError("horizon must be nonnegative")
        if not self.lipschitz >= 0.0:
            raise ValueError("lipschitz must be nonnegative")
        if not self.f_xi_second_moment >= 0.0:
            raise ValueError("f_xi_second_moment must be nonnegative")
        xi = np.asarray(self.xi, dtype=np.float64)
        if xi.shape != (self.dim,):
            raise ValueError(f"xi must have shape ({self.dim},), got {xi.shape}")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def has_reference(self) -> bool:
        return self.closed_form is not None or self.exact_mean_drift is not None

    @property
    def has_batch(self) -> bool:
        return self.sample_z_batch is not None and self.drift_batch is not None


_REGISTRY: dict[str, ExpectationOdeProblem] = {}


def register_problem(problem: ExpectationOdeProblem, replace: bool = False) -> None:
    """Add a problem to the registry (library API; the CLI only sees names)."""
    if problem.name in _REGISTRY and not replace:
        raise ValueError(f"problem {problem.name!r} already registered")
    _REGISTRY[problem.name] = problem


def builtin(name: str) -> ExpectationOdeProblem:
    """Look up a registered problem by name."""
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise UnknownProblemError(f"unknown problem {name!r} (known: {known})") from None


def problem_names() -> list[str]:
    """Registered problem names, sorted."""
    return sorted(_REGISTRY)


# ---------------------------------------------------------------------------
# Built-in problems.  All are one-dimensional with xi = 0 and T = 1; each
# satisfies the standing assumptions (F Lipschitz in x uniformly in z,
# E[||F(xi, Z)||^2] finite) and has enough analytic structure to serve as a
# test oracle.
# ---------------------------------------------------------------------------

_ZERO = np.zeros(1)
_ONE = np.ones(1)


def _z_shaped_drift(value: np.ndarray, z) -> np.ndarray:
    # Broadcast a per-draw scalar payload against (..., dim) states.
    return np.asarray(z)[..., None] + value


def _pure_noise() -> ExpectationOdeProblem:
    # F(x, z) = z with Z ~ N(0, 1): zero mean drift, X(t) = 0.
    return ExpectationOdeProblem(
        name="pure_noise",
        dim=1,
        xi=_ZERO,
        horizon=1.0,
        lipschitz=0.0,
        sample_z=lambda stream: stream.next_gaussian(),
        drift=lambda x, z: np.array([z]),
        f_xi_second_moment=1.0,
        exact_mean_drift=lambda x: np.zeros(1),
        closed_form=lambda t: np.zeros(1),
        sample_z_batch=lambda bundle: bundle.next_gaussian(),
        drift_batch=lambda x, z: _z_shaped_drift(np.zeros(1), z),
    )


def _const_drift() -> ExpectationOdeProblem:
    # F(x, z) = 1 with degenerate Z: X(t) = t, every estimator is exact.
    return ExpectationOdeProblem(
        name="const_drift",
        dim=1,
        xi=_ZERO,
        horizon=1.0,
        lipschitz=0.0,
        sample_z=lambda stream: 0.0,
        drift=lambda x, z: np.ones(1),
        f_xi_second_moment=1.0,
        exact_mean_drift=lambda x: np.ones(1),
        closed_form=lambda t: np.array([float(t)]),
        sample_z_batch=lambda bundle: np.zeros(bundle.shape),
        drift_batch=lambda x, z: np.broadcast_to(
            _ONE, np.broadcast_shapes(np.shape(x), np.shape(z) + (1,))
        ),
    )


def _linear_meanfield() -> ExpectationOdeProblem:
    # F(x, z) = z - x with Z ~ N(1, 1): X' = 1 - X, X(t) = 1 - exp(-t),
    # E[Z^2] = 2.  The Lipschitz constant 1 is attained for every z.
    return ExpectationOdeProblem(
        name="linear_meanfield",
        dim=1,
        xi=_ZERO,
        horizon=1.0,
        lipschitz=1.0,
        sample_z=lambda stream: 1.0 + stream.next_gaussian(),
        drift=lambda x, z: z - x,
        f_xi_second_moment=2.0,
        exact_mean_drift=lambda x: 1.0 - x,
        closed_form=lambda t: np.array([-np.expm1(-float(t))]),
        sample_z_batch=lambda bundle: 1.0 + bundle.next_gaussian(),
        drift_batch=lambda x, z: np.asarray(z)[..., None] - x,
    )


def _sine_meanfield() -> ExpectationOdeProblem:
    # F(x, z) = sin(x) + z with Z ~ N(0, 1): X' = sin(X).  Starting from
    # xi = 0 the mean path is identically zero, but the estimator still has
    # to discover that through genuinely nonlinear drift evaluations; no
    # closed form is registered, so the RK4 reference solver is exercised.
    return ExpectationOdeProblem(
        name="sine_meanfield",
        dim=1,
        xi=_ZERO,
        horizon=1.0,
        lipschitz=1.0,
        sample_z=lambda stream: stream.next_gaussian(),
        drift=lambda x, z: np.sin(x) + z,
        f_xi_second_moment=1.0,
        exact_mean_drift=lambda x: np.sin(x),
        sample_z_batch=lambda bundle: bundle.next_gaussian(),
        drift_batch=lambda x, z: np.sin(x) + np.asarray(z)[..., None],
    )


BUILTIN_NAMES = ("const_drift", "linear_meanfield", "pure_noise", "sine_meanfield")

for _factory in (_pure_noise, _const_drift, _linear_meanfield, _sine_meanfield):
    register_problem(_factory())
