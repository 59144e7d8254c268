"""Bound evaluators, schedules, the RMSE harness, and the complexity fit."""

import json
import math
import os

import numpy as np
import pytest

from mlpicard.analysis import (
    BoundInputs,
    CSV_HEADER,
    InsufficientDataError,
    RmseReport,
    RmseRow,
    complexity_fit,
    error_bound,
    fit_power_law,
    n_epsilon,
    rmse_experiment,
    tail_bound_max,
)
from mlpicard.baseline import NoReferenceError
from mlpicard.mlp import rv_exact
from mlpicard.problems import ExpectationOdeProblem, builtin

SEED = 12345
UNIT = BoundInputs(horizon=1.0, lipschitz=0.0, f_xi_second_moment=1.0)


def test_bound_inputs_from_problem():
    b = BoundInputs.from_problem(builtin("linear_meanfield"))
    assert (b.horizon, b.lipschitz, b.f_xi_second_moment) == (1.0, 1.0, 2.0)
    assert b.big_c == pytest.approx(math.sqrt(2.0) * math.e, rel=1e-15)
    with pytest.raises(ValueError):
        BoundInputs(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        BoundInputs(1.0, math.inf, 1.0)


def test_error_bound_values():
    assert error_bound(UNIT, 1, 1) == pytest.approx(math.exp(0.5), rel=1e-14)
    # n = 0: the estimator is the constant xi, bound T sqrt(M2) e^{LT} e^{m/2}.
    assert error_bound(UNIT, 0, 1) == pytest.approx(math.exp(0.5), rel=1e-14)
    assert error_bound(UNIT, 0, 4) == pytest.approx(math.exp(2.0), rel=1e-14)
    zero_t = BoundInputs(0.0, 3.0, 5.0)
    for n in range(4):
        for m in range(1, 4):
            assert error_bound(zero_t, n, m) == 0.0


def test_error_bound_monotonicity_ratio():
    # For fixed m the bound scales by exactly (1+2LT)/sqrt(m) per level.
    inputs = BoundInputs(1.0, 1.0, 2.0)
    for m in (25, 36, 100):
        expected = 3.0 / math.sqrt(m)
        for n in range(0, 8):
            ratio = error_bound(inputs, n + 1, m) / error_bound(inputs, n, m)
            assert ratio == pytest.approx(expected, rel=1e-12)


def test_error_bound_overflows_to_inf():
    big = BoundInputs(50.0, 50.0, 4.0)
    assert error_bound(big, 10**6, 1) == math.inf


def test_error_bound_validation():
    with pytest.raises(ValueError):
        error_bound(UNIT, -1, 1)
    with pytest.raises(ValueError):
        error_bound(UNIT, 1, 0)


def test_tail_bound_is_exact_supremum():
    # Brute-force comparison over a long scan window.
    inputs = BoundInputs(1.0, 1.0, 2.0)
    c = inputs.big_c
    for n in (1, 5, 9, 20, 40):
        brute = max(
            c * math.exp(0.5 * m + m * math.log(3.0) - 0.5 * m * math.log(m))
            for m in range(n, n + 400)
        )
        assert tail_bound_max(inputs, n) == pytest.approx(brute, rel=1e-12)


def test_n_epsilon_small_constant():
    # C = 0.1, L = 0: the m = 1 term is 0.1 e^{0.5} ~ 0.165 <= 0.5 and the
    # tail only decreases, so one level suffices.
    inputs = BoundInputs(1.0, 0.0, 0.01)
    sched = n_epsilon(inputs, 0.5)
    assert sched.n_epsilon == 1
    assert sched.tail_bound == pytest.approx(0.1 * math.exp(0.5), rel=1e-12)
    assert sched.total_cost == rv_exact(1, 1) == 1


def test_n_epsilon_zero_constant():
    sched = n_epsilon(BoundInputs(1.0, 0.0, 0.0), 1.0)
    assert sched.n_epsilon == 1
    assert sched.tail_bound == 0.0


def test_n_epsilon_monotone_and_consistent():
    inputs = BoundInputs.from_problem(builtin("linear_meanfield"))
    expected_n = {1: 29, 2: 30, 3: 31, 4: 32, 5: 33, 6: 34}
    prev = 0
    for k in range(1, 7):
        eps = 2.0**-k
        sched = n_epsilon(inputs, eps)
        assert sched.n_epsilon == expected_n[k]
        assert sched.tail_bound <= eps
        # the diagonal bound at N is dominated by the tail supremum
        assert error_bound(inputs, sched.n_epsilon, sched.n_epsilon) <= eps
        assert sched.n_epsilon >= prev
        prev = sched.n_epsilon
    assert n_epsilon(inputs, 0.01).n_epsilon >= n_epsilon(inputs, 0.1).n_epsilon


def test_n_epsilon_total_cost_and_offset():
    inputs = BoundInputs(1.0, 0.0, 1.0)  # pure-noise constants, C = 1
    sched = n_epsilon(inputs, 0.5)
    assert sched.n_epsilon == 4
    assert sched.total_cost == sum(rv_exact(j, j) for j in range(1, 5))
    shifted = n_epsilon(inputs, 0.5, mathfrak_n=2)
    assert shifted.n_epsilon == 4
    assert shifted.total_cost == sum(rv_exact(j, j) for j in range(1, 7))


def test_n_epsilon_validation():
    with pytest.raises(ValueError):
        n_epsilon(UNIT, 0.0)
    with pytest.raises(ValueError):
        n_epsilon(UNIT, 1.5)
    with pytest.raises(ValueError):
        n_epsilon(UNIT, 0.5, mathfrak_n=-1)


def test_fit_power_law_exact():
    rmses = [0.5, 0.25, 0.125, 0.0625]
    slope, _ = fit_power_law([r**-2 for r in rmses], rmses)
    assert abs(slope - 2.0) <= 1e-12
    slope, _ = fit_power_law([r**-3 for r in rmses], rmses)
    assert abs(slope - 3.0) <= 1e-9


def test_fit_power_law_validation():
    with pytest.raises(InsufficientDataError):
        fit_power_law([1.0, 2.0], [0.5, 0.25])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0, 3.0], [0.5, 0.25])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0, 0.0], [0.5, 0.25, 0.125])


def _synthetic_report(rmses, costs, valid=None):
    rep = RmseReport("synthetic", "mlp", 0, 1.0)
    for i, (r, c) in enumerate(zip(rmses, costs)):
        rep.rows.append(
            RmseRow(
                scheme="mlp",
                n=i + 1,
                m=i + 1,
                replications=10,
                rmse=r,
                bound=None,
                rv=c,
                rv_bound=None,
                cum_z_draws=c,
                wall_ms=0.0,
                valid=True if valid is None else valid[i],
            )
        )
    return rep


def test_complexity_fit_on_synthetic_rows():
    rmses = [0.5, 0.25, 0.125, 0.0625]
    slope, _ = complexity_fit(_synthetic_report(rmses, [r**-2 for r in rmses]))
    assert abs(slope - 2.0) <= 1e-12


def test_complexity_fit_skips_invalid_rows():
    rmses = [0.5, 0.25, math.nan, 0.125, 0.0625]
    costs = [4.0, 16.0, 1.0, 64.0, 256.0]
    rep = _synthetic_report(rmses, costs, valid=[True, True, False, True, True])
    slope, _ = complexity_fit(rep)
    assert abs(slope - 2.0) <= 1e-12
    with pytest.raises(InsufficientDataError, match="insufficient data"):
        complexity_fit(_synthetic_report([0.5, 0.25], [4.0, 16.0]))


def test_rmse_experiment_pure_noise_matches_exact_variance():
    # The estimator is exactly Gaussian with variance t^2/m^n here, so the
    # mean squared error over R draws sits in a 5-sigma chi-square band.
    reps = 10**4
    rep = rmse_experiment(builtin("pure_noise"), "mlp", [(1, 4)], reps, SEED)
    msq = rep.rows[0].rmse ** 2
    target = 0.25
    assert abs(msq - target) <= 5.0 * target * math.sqrt(2.0 / reps)


def test_rmse_experiment_honors_eval_time():
    # At t = 0.5 the pure-noise estimator has variance t^2/m^n = 1/16.
    reps = 10**4
    rep = rmse_experiment(
        builtin("pure_noise"), "mlp", [(1, 4)], reps, SEED, eval_time=0.5
    )
    msq = rep.rows[0].rmse ** 2
    target = 0.25 * 0.25
    assert abs(msq - target) <= 5.0 * target * math.sqrt(2.0 / reps)
    with pytest.raises(ValueError):
        rmse_experiment(builtin("pure_noise"), "mlp", [(1, 2)], 10, SEED, eval_time=2.0)
    with pytest.raises(ValueError, match="horizon"):
        rmse_experiment(
            builtin("linear_meanfield"), "mc_euler", [(2, 2)], 10, SEED, eval_time=0.5
        )


def test_rmse_experiment_const_drift_is_exact():
    rep = rmse_experiment(builtin("const_drift"), "mlp", [(1, 1), (2, 2)], 2, SEED)
    for row in rep.rows:
        assert row.rmse == 0.0
        assert row.valid


def test_rmse_experiment_is_bound_dominated():
    rep = rmse_experiment(builtin("linear_meanfield"), "mlp", [(3, 3)], 1000, SEED)
    row = rep.rows[0]
    assert row.rmse <= row.bound * 1.1
    assert row.rv == rv_exact(3, 3)
    assert row.cum_z_draws == rv_exact(3, 3)


def test_rmse_experiment_validation():
    p = builtin("linear_meanfield")
    with pytest.raises(ValueError):
        rmse_experiment(p, "bogus", [(1, 1)], 10, SEED)
    with pytest.raises(ValueError):
        rmse_experiment(p, "mlp", [(1, 1)], 1, SEED)
    with pytest.raises(ValueError):
        rmse_experiment(p, "mlp", [], 10, SEED)
    no_ref = ExpectationOdeProblem(
        name="no_ref2",
        dim=1,
        xi=np.zeros(1),
        horizon=1.0,
        lipschitz=0.0,
        sample_z=lambda s: 0.0,
        drift=lambda x, z: np.zeros(1),
        f_xi_second_moment=0.0,
    )
    with pytest.raises(NoReferenceError):
        rmse_experiment(no_ref, "mlp", [(1, 1)], 10, SEED)


def test_rmse_experiment_flags_nan_rows():
    bad = ExpectationOdeProblem(
        name="nan_drift",
        dim=1,
        xi=np.zeros(1),
        horizon=1.0,
        lipschitz=0.0,
        sample_z=lambda s: s.next_uniform(),
        drift=lambda x, z: np.array([math.nan]),
        f_xi_second_moment=0.0,
        exact_mean_drift=lambda x: np.zeros(1),
    )
    rep = rmse_experiment(bad, "mlp", [(1, 2), (0, 2)], 5, SEED)
    assert len(rep.rows) == 2  # flagged, not dropped
    assert not rep.rows[0].valid and math.isnan(rep.rows[0].rmse)
    assert rep.rows[1].valid and rep.rows[1].rmse == 0.0  # level 0 never draws


def test_rmse_experiment_scalar_fallback_matches_batch():
    p = builtin("linear_meanfield")
    bare = ExpectationOdeProblem(
        name="linear_scalar_only",
        dim=1,
        xi=np.zeros(1),
        horizon=1.0,
        lipschitz=1.0,
        sample_z=p.sample_z,
        drift=p.drift,
        f_xi_second_moment=2.0,
        exact_mean_drift=p.exact_mean_drift,
        closed_form=p.closed_form,
    )
    fast = rmse_experiment(p, "mlp", [(3, 2)], 50, SEED)
    slow = rmse_experiment(bare, "mlp", [(3, 2)], 50, SEED)
    assert fast.rows[0].rmse == slow.rows[0].rmse


def test_rmse_experiment_thread_count_does_not_change_results():
    p = builtin("linear_meanfield")
    one = rmse_experiment(p, "mlp", [(2, 2), (3, 3)], 200, SEED, threads=1)
    many = rmse_experiment(p, "mlp", [(2, 2), (3, 3)], 200, SEED, threads=8)
    assert [r.rmse for r in one.rows] == [r.rmse for r in many.rows]
    assert one.csv_text() == many.csv_text()


def test_mc_euler_rows_carry_grid_and_cost():
    rep = rmse_experiment(builtin("linear_meanfield"), "mc_euler", [(5, 4), (10, 8)], 20, SEED)
    assert (rep.rows[0].n, rep.rows[0].m) == (5, 4)
    assert rep.rows[0].rv == 20 and rep.rows[1].rv == 80
    assert rep.rows[1].cum_z_draws == 100
    assert rep.rows[0].bound is None and rep.rows[0].rv_bound is None


def test_report_serialization(tmp_path):
    rep = rmse_experiment(builtin("const_drift"), "mlp", [(1, 1)], 2, SEED)
    rep.config = {"problem": "const_drift"}

    csv_path = str(tmp_path / "out.csv")
    rep.write(csv_path, "csv")
    text = open(csv_path).read()
    assert text.splitlines()[0] == CSV_HEADER
    assert text.splitlines()[1] == f"mlp,1,1,2,0.0,{error_bound(UNIT, 1, 1)!r},1,3,,{SEED}"

    json_path = str(tmp_path / "out.json")
    rep.write(json_path, "json")
    doc = json.loads(open(json_path).read())
    assert doc["seed"] == SEED
    assert doc["config"] == {"problem": "const_drift"}
    assert doc["rows"][0]["rmse"] == 0.0
    assert doc["rows"][0]["wall_ms"] is None
    assert doc["rng"]["gaussian"] == "box-muller-cosine"

    # rewriting produces identical bytes, and no temp files are left behind
    before = open(csv_path, "rb").read()
    rep.write(csv_path, "csv")
    assert open(csv_path, "rb").read() == before
    assert [f for f in os.listdir(tmp_path) if f.endswith(".part")] == []

    with pytest.raises(ValueError):
        rep.write(str(tmp_path / "x"), "xml")


def test_wall_time_is_measured_but_not_serialized():
    rep = rmse_experiment(builtin("const_drift"), "mlp", [(1, 1)], 2, SEED)
    assert rep.rows[0].wall_ms >= 0.0
    assert ",,12345" in rep.csv_text().splitlines()[1]
