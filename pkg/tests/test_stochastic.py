import math

import numpy as np
import pytest

from bootperc import combinatorics as cb
from bootperc.dynamics import Rule, percolation_time, uninfected_count
from bootperc.stochastic import (
    BLOCK,
    SummaryStats,
    TrialPlan,
    exact_rho1,
    poisson_comparison,
    protecting_counts,
    rho1_asymptotic,
    run_time_distribution,
    run_trials,
    sample_configuration,
    solve_q,
    stein_chen_bound,
    tbound_check,
    trial_rng,
    tv_to_poisson,
)

import oracles

R2 = Rule("standard", 2)


def test_plan_validation():
    with pytest.raises(ValueError):
        TrialPlan(2, 10, R2, q=1.5)
    with pytest.raises(ValueError):
        TrialPlan(2, 10, R2, q=0.1, trials=0)
    with pytest.raises(ValueError):
        TrialPlan(2, 10, Rule("standard", 5), q=0.1)
    with pytest.raises(ValueError):
        TrialPlan(2, 2, R2, q=0.1)


def test_sample_extremes():
    assert sample_configuration(TrialPlan(2, 8, R2, 0.0), 0).num_uninfected == 0
    assert sample_configuration(TrialPlan(2, 8, R2, 1.0), 3).num_uninfected == 64


def test_sample_density():
    plan = TrialPlan(2, 10, R2, 0.3, trials=10_000, seed=5)
    total = sum(sample_configuration(plan, i).num_uninfected for i in range(2000))
    frac = total / (2000 * 100)
    sigma = math.sqrt(0.3 * 0.7 / (2000 * 100))
    assert abs(frac - 0.3) < 3 * sigma


def test_trial_streams_are_independent_of_order():
    a = trial_rng(9, 17).random(5)
    trial_rng(9, 3).random(100)
    assert np.array_equal(a, trial_rng(9, 17).random(5))
    assert not np.array_equal(a, trial_rng(9, 18).random(5))


def test_batched_trials_match_single_configurations():
    plan = TrialPlan(2, 12, R2, 0.25, t=2, trials=30, seed=4)
    block = run_trials(plan)
    for i in range(plan.trials):
        c = sample_configuration(plan, i)
        assert block.T[i] == percolation_time(c)
        assert block.F[i] == uninfected_count(c, 2)


def test_trials_do_not_depend_on_jobs_or_blocks():
    plan = TrialPlan(2, 16, R2, 0.1, trials=BLOCK + 37, seed=2)
    a = run_trials(plan, jobs=1)
    b = run_trials(plan, jobs=2)
    assert np.array_equal(a.T, b.T) and np.array_equal(a.F, b.F)
    shorter = run_trials(TrialPlan(2, 16, R2, 0.1, trials=40, seed=2))
    assert np.array_equal(shorter.T, a.T[:40])


def test_q_zero_gives_time_zero():
    s = run_time_distribution(TrialPlan(2, 10, R2, 0.0, trials=20))
    assert s.empirical_T == {"0": 20}
    assert s.fraction_T(0) == 1.0


def test_exact_rho1_hand_formula():
    for q in (0.1, 0.3, 0.7):
        p = 1 - q
        assert exact_rho1(2, R2, 1, q) == pytest.approx(q * (q**4 + 4 * q**3 * p), rel=1e-12)
    assert exact_rho1(2, R2, 1, 0.1) == pytest.approx(3.7e-4, rel=1e-12)
    assert exact_rho1(3, R2, 0, 0.37) == pytest.approx(0.37)


def test_protecting_counts_match_enumeration():
    sets = oracles.protecting_sets(2, 2, 2)
    expected = [0] * 14
    for S in sets:
        expected[len(S)] += 1
    assert list(protecting_counts(2, R2, 2)) == expected
    counts = protecting_counts(2, R2, 2)
    assert counts[cb.m(2, 2, 2)] == cb.g(2, 2)


def test_rho1_asymptotic():
    assert rho1_asymptotic(2, 2, 2, 1e-3) == pytest.approx(16e-24)
    ratios = [exact_rho1(2, R2, 2, q) / rho1_asymptotic(2, 2, 2, q) for q in (1e-2, 1e-3, 1e-4)]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1) < 1e-2


def test_solve_q():
    q = solve_q(2, R2, 1, 64, math.log(2))
    assert 64**2 * exact_rho1(2, R2, 1, q) == pytest.approx(math.log(2), rel=1e-9)


def test_stein_chen_bound():
    assert stein_chen_bound(1.0, 100, 13, 0.0, 0.0) == 0.0
    assert stein_chen_bound(2.0, 10**4, 13, 1e-4, 0.0) == pytest.approx(6.5e-4)
    base = stein_chen_bound(0.5, 1000, 13, 1e-3, 1e-5)
    assert stein_chen_bound(0.5, 2000, 13, 1e-3, 1e-5) > base
    assert stein_chen_bound(0.5, 1000, 25, 1e-3, 1e-5) > base
    assert stein_chen_bound(0.5, 1000, 13, 2e-3, 1e-5) > base
    assert stein_chen_bound(0.5, 1000, 13, 1e-3, 2e-5) > base


def test_tv_to_poisson():
    rng = np.random.default_rng(0)
    assert tv_to_poisson(rng.poisson(1.3, 20_000), 1.3) < 0.02
    assert tv_to_poisson(np.zeros(100, dtype=int), 3.0) == pytest.approx(1 - math.exp(-3.0))


def test_tbound_check_warns(caplog):
    assert tbound_check(2, 1, 0.01) == pytest.approx(0.01)
    with caplog.at_level("WARNING"):
        tbound_check(2, 3, 0.05)
    assert "loose" in caplog.text


def test_summary_rows_and_ci():
    plan = TrialPlan(2, 8, R2, 0.1, trials=3)
    s = SummaryStats(plan, np.array([1.0, math.inf, 0.0]), np.array([0, 2, 0]))
    assert list(s.rows()) == [(0, 1, 0), (1, "inf", 2), (2, 0, 0)]
    assert s.empirical_T == {"0": 1, "1": 1, "inf": 1}
    assert s.ci_radius_F > 0


def test_poisson_comparison_small():
    plan = TrialPlan(2, 24, R2, 0.12, t=1, trials=500, seed=1)
    rep = poisson_comparison(plan)
    assert rep["identity_violations"] == 0
    assert rep["mean_error"] <= rep["mean_tolerance"]
    assert rep["fraction_F0"] == rep["fraction_T_le_t"]
    assert 0 <= rep["stein_chen_bound"]
    with pytest.raises(ValueError):
        poisson_comparison(TrialPlan(2, 4, R2, 0.1, t=2))
