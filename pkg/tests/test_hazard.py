import math

import numpy as np
import pytest

import oracles
from conftest import random_trial
from covlogrank import (
    NoRoot,
    RankDeficient,
    TrialData,
    derived_outcomes,
    logrank_components,
    solve_theta_adjusted,
    solve_theta_adjusted_stratified,
    solve_theta_stratified,
    solve_theta_unadjusted,
    stratified_logrank_components,
)
from covlogrank.hazard import derived_outcomes_at, find_root, score_derivative, score_unadjusted
from covlogrank.simulation import ScenarioConfig, generate_trial

# Large-sample limit of the adjusted stratified estimator in Case I with
# theta = 0.3 (simple randomization), from five independent 10^6-subject
# trials: mean -0.23622, standard error 0.00038.
THETA_CSL_TARGET = -0.2362


class TestScore:
    def test_reduces_to_logrank_at_zero(self, rng):
        d = random_trial(rng, ties=True)
        U, var = logrank_components(d)
        assert score_unadjusted(d, 0.0) == U
        assert score_derivative(d, 0.0) == var
        assert np.array_equal(derived_outcomes_at(d, 0.0).values, derived_outcomes(d).values)
        U, var = stratified_logrank_components(d)
        assert abs(score_unadjusted(d, 0.0, stratified=True) - U) < 1e-14
        assert abs(score_derivative(d, 0.0, stratified=True) - var) < 1e-14

    def test_hand_values(self, two_subjects):
        assert score_unadjusted(two_subjects, 0.0) == 0.25
        assert score_derivative(two_subjects, 0.0) == 0.125
        # theta = log 2: S0 = 2 * 1/2 + 1/2 = 3/2
        o = derived_outcomes_at(two_subjects, math.log(2.0)).values
        np.testing.assert_allclose(o, [1 / 9, -2 / 9], atol=1e-15)
        assert score_unadjusted(two_subjects, math.log(2.0)) == pytest.approx(1 / 6, abs=1e-15)

    def test_oracle(self, rng):
        for theta in (-0.8, 0.0, 0.45):
            d = random_trial(rng, ties=True)
            u, g = oracles.score_and_info(d.time, d.event, d.arm, theta)
            assert score_unadjusted(d, theta) == pytest.approx(u, abs=1e-12)
            assert score_derivative(d, theta) == pytest.approx(g, abs=1e-12)
            ref = oracles.derived_outcomes(d.time, d.event, d.arm, theta, d.stratum)
            np.testing.assert_allclose(derived_outcomes_at(d, theta, True).values, ref, atol=1e-12)

    def test_identity_at_theta(self, rng):
        for _ in range(20):
            d = random_trial(rng, ties=True)
            theta = float(rng.normal())
            for strat in (False, True):
                o = derived_outcomes_at(d, theta, strat)
                assert abs(score_unadjusted(d, theta, strat) - o.signed_mean(d.arm)) < 1e-12

    def test_central_differences(self, rng):
        h = 1e-5
        for _ in range(20):
            d = random_trial(rng)
            theta = float(rng.uniform(-1, 1))
            for strat in (False, True):
                fd = (score_unadjusted(d, theta + h, strat) - score_unadjusted(d, theta - h, strat)) / (2 * h)
                g = score_derivative(d, theta, strat)
                assert abs(g + fd) < 1e-6
                assert abs(g + fd) <= 1e-5 * abs(g)

    def test_monotone(self, rng):
        d = random_trial(rng, n=40)
        grid = np.linspace(-4, 4, 41)
        s = [score_unadjusted(d, t) for t in grid]
        assert all(a >= b for a, b in zip(s, s[1:]))


class TestRootFinder:
    def test_simple_function(self):
        x, fx, gx, _ = find_root(lambda x: (math.tanh(1.5 - x), 1 - math.tanh(1.5 - x) ** 2))
        assert x == pytest.approx(1.5, abs=1e-10)

    def test_far_root_needs_bracket_growth(self):
        x, *_ = find_root(lambda x: (math.atan(20.0 - x), 1 / (1 + (20.0 - x) ** 2)))
        assert x == pytest.approx(20.0, abs=1e-9)

    def test_no_sign_change(self):
        with pytest.raises(NoRoot):
            find_root(lambda x: (1.0, 0.0))


class TestEstimators:
    def test_matches_cox_partial_likelihood(self, rng):
        sm = pytest.importorskip("statsmodels.api")
        for _ in range(5):
            d = random_trial(rng, n=60, ties=True)
            est = solve_theta_unadjusted(d)
            fit = sm.PHReg(d.time, d.arm[:, None].astype(float), status=d.event.astype(int),
                           ties="breslow").fit()
            assert est.theta == pytest.approx(fit.params[0], abs=1e-6)
            assert est.se == pytest.approx(fit.bse[0], rel=1e-5)
            est = solve_theta_stratified(d)
            fit = sm.PHReg(d.time, d.arm[:, None].astype(float), status=d.event.astype(int),
                           strata=d.stratum, ties="breslow").fit()
            assert est.theta == pytest.approx(fit.params[0], abs=1e-6)
            assert est.se == pytest.approx(fit.bse[0], rel=1e-5)

    def test_root_is_a_root(self, rng):
        d = random_trial(rng, n=50)
        est = solve_theta_unadjusted(d)
        assert abs(score_unadjusted(d, est.theta)) < 1e-10
        z = 1.959963984540054
        assert est.ci == pytest.approx((est.theta - z * est.se, est.theta + z * est.se))

    def test_balanced_data_gives_zero(self):
        d = TrialData([1.0, 1.0, 2.0, 2.0], [1, 1, 1, 1], [1, 0, 1, 0])
        assert solve_theta_unadjusted(d).theta == 0.0

    def test_separation(self, two_subjects):
        with pytest.raises(NoRoot):
            solve_theta_unadjusted(two_subjects)
        d = TrialData([1.0, 2.0, 5.0, 6.0], [1, 1, 0, 0], [1, 1, 0, 0])
        with pytest.raises(NoRoot):
            solve_theta_unadjusted(d)

    def test_constant_covariate(self):
        d = TrialData([1.0, 1.5, 2.0, 2.5, 3.0, 4.0], [1, 1, 1, 1, 1, 0], [1, 0, 1, 0, 0, 1],
                      covariates=[1.0] * 6)
        with pytest.raises(RankDeficient):
            solve_theta_adjusted(d)

    def test_single_stratum_collapse(self, rng):
        d = random_trial(rng, n=50, n_strata=1, p=2)
        a, b = solve_theta_unadjusted(d), solve_theta_stratified(d)
        assert a.theta == pytest.approx(b.theta, abs=1e-12)
        a, b = solve_theta_adjusted(d, 0.5), solve_theta_adjusted_stratified(d, 0.5)
        assert a.theta == pytest.approx(b.theta, abs=1e-10)
        assert a.se == pytest.approx(b.se, rel=1e-10)

    def test_adjusted_se_smaller_in_simulation(self):
        cfg = ScenarioConfig(case="I", theta=0.3, n=500, seed=11)
        for r in range(20):
            d = generate_trial(cfg, r)
            assert solve_theta_adjusted(d, 0.5).se <= solve_theta_unadjusted(d).se
            assert solve_theta_adjusted_stratified(d, 0.5).se <= solve_theta_stratified(d).se

    def test_bias_case_one(self):
        cfg = ScenarioConfig(case="I", theta=0.3, n=500, seed=31)
        est = np.array([solve_theta_adjusted_stratified(generate_trial(cfg, r), pi=0.5).theta
                        for r in range(1000)])
        mc_se = est.std(ddof=1) / math.sqrt(est.size)
        assert abs(est.mean() - THETA_CSL_TARGET) < 3 * math.hypot(mc_se, 0.0004)
