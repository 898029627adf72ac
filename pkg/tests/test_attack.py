import math

import numpy as np
import pytest

from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import pld_build
from py_fdp_audit.core.attack.optimal_threshold import (
    ThresholdBracketError,
    ThresholdDomainError,
    gdp_plugin_threshold_invariance,
    max_eps_lower_analytic,
    optimal_threshold_dp,
    plugin_log_ratio,
)
from py_fdp_audit.core.attack.thresholding import (
    MAX_THRESHOLDS,
    ObservationSizeMismatchError,
    ThresholdPolicy,
    candidate_thresholds,
    compute_error_counts,
    holdout_split,
    sweep_thresholds,
)
from py_fdp_audit.core.estimators.clopper_pearson import clopper_pearson_upper, eps_lower_dp_cp, eps_lower_fdp_cp
from py_fdp_audit.core.mechanisms.simulators import simulate_gaussian_pair, simulate_subsampled_gaussian_pair
from py_fdp_audit.core.numerics.special_functions import std_normal_cdf, std_normal_pdf
from py_fdp_audit.core.tradeoff.accountant_approximation import TradeoffCombiner, approx_tradeoff_from_accountant
from py_fdp_audit.core.tradeoff.tradeoff_curve import tradeoff_gdp


class TestComputeErrorCounts:
    def test_hand_counted_example(self):
        counts = compute_error_counts([0.1, 0.9], [0.8, 1.2], 0.5)
        assert (counts.fp, counts.fn, counts.n) == (1, 0, 2)

    def test_trivial_thresholds(self):
        d, dprime = [0.1, 0.4, 0.9], [0.3, 0.8, 1.2]
        low = compute_error_counts(d, dprime, -math.inf)
        high = compute_error_counts(d, dprime, math.inf)
        assert (low.fp, low.fn) == (3, 0)
        assert (high.fp, high.fn) == (0, 3)

    def test_ties_count_as_negatives(self):
        counts = compute_error_counts([0.5, 0.2], [0.5, 0.7], 0.5)
        assert (counts.fp, counts.fn) == (0, 1)

    def test_matches_brute_force_recount(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            d, dprime = rng.integers(0, 5, 12).astype(float), rng.integers(0, 5, 12).astype(float)
            z = float(rng.integers(-1, 6))
            counts = compute_error_counts(d, dprime, z)
            assert counts.fp == sum(score > z for score in d)
            assert counts.fn == sum(score <= z for score in dprime)

    def test_mismatched_sizes_are_rejected(self):
        with pytest.raises(ObservationSizeMismatchError, match="OBSERVATION SIZE MISMATCH"):
            compute_error_counts([0.1], [0.2, 0.3], 0.0)


class TestSweep:
    @pytest.fixture
    def pair(self):
        return simulate_gaussian_pair(1.0, 2000, seed=17).to_arrays()

    def test_endpoints_are_the_trivial_corners(self, pair):
        curve = sweep_thresholds(*pair)
        assert (curve.alphas[0], curve.betas[0]) == (1.0, 0.0)
        assert (curve.alphas[-1], curve.betas[-1]) == (0.0, 1.0)

    def test_rates_are_monotone(self, pair):
        curve = sweep_thresholds(*pair)
        assert (np.diff(curve.thresholds) > 0.0).all()
        assert (np.diff(curve.alphas) <= 0.0).all()
        assert (np.diff(curve.betas) >= 0.0).all()

    def test_counts_at_matches_direct_counting(self, pair):
        curve = sweep_thresholds(*pair)
        index = len(curve) // 3
        assert curve.counts_at(index) == compute_error_counts(*pair, float(curve.thresholds[index]))

    def test_interquartile_policy_keeps_the_central_half(self, pair):
        full = candidate_thresholds(*pair)
        central = candidate_thresholds(*pair, policy=ThresholdPolicy.Interquartile)
        assert np.isfinite(central).all()
        assert central.size == pytest.approx((full.size - 2) / 2, abs=2)

    def test_grid_policy(self, pair):
        curve = sweep_thresholds(*pair, policy=ThresholdPolicy.Grid, grid=[0.7, -0.2, 0.7])
        assert curve.thresholds.tolist() == [-0.2, 0.7]

    def test_grid_policy_needs_a_grid(self, pair):
        with pytest.raises(ValueError, match="THRESHOLD GRID MISSING"):
            candidate_thresholds(*pair, policy=ThresholdPolicy.Grid)

    def test_large_inputs_are_capped(self):
        d, dprime = simulate_gaussian_pair(1.0, 20_000, seed=1).to_arrays()
        assert candidate_thresholds(d, dprime).size <= MAX_THRESHOLDS

    def test_csv_rows_use_full_precision(self, pair):
        rows = sweep_thresholds(*pair).to_csv_rows()
        assert rows[0] == ("-inf", "1", "0")
        assert float(rows[5][0]) == float(sweep_thresholds(*pair).thresholds[5])

    def test_fdp_bound_is_stable_across_interquartile_thresholds(self):
        d, dprime = simulate_gaussian_pair(1.0, 5000, seed=23).to_arrays()
        curve = sweep_thresholds(d, dprime, policy=ThresholdPolicy.Interquartile)
        indices = np.linspace(0, len(curve) - 1, 25).astype(int)
        fdp = np.array([eps_lower_fdp_cp(curve.counts_at(int(i)), 1e-5, 0.05).eps_lower for i in indices])
        dp = np.array([eps_lower_dp_cp(curve.counts_at(int(i)), 1e-5, 0.05).eps_lower for i in indices])
        fdp_ratio = fdp.max() / fdp.min()
        dp_ratio = dp.max() / dp.min()
        assert fdp_ratio <= 1.2
        # the (eps, delta) bound falls from about 1.22 at the quartiles to 0.74 at the median
        assert dp_ratio == pytest.approx(1.65, abs=0.25)
        assert fdp_ratio < dp_ratio


class TestHoldoutSplit:
    def test_parts_are_disjoint_and_complete(self):
        d = np.arange(10, dtype=float)
        dprime = np.arange(10, 20, dtype=float)
        (select_d, select_dprime), (audit_d, audit_dprime) = holdout_split(d, dprime, 0.3, seed=2)
        assert select_d.size == 3 and audit_d.size == 7
        assert sorted([*select_d, *audit_d]) == d.tolist()
        assert sorted([*select_dprime, *audit_dprime]) == dprime.tolist()

    def test_split_is_seeded(self):
        d = np.arange(50, dtype=float)
        first = holdout_split(d, d + 100, 0.5, seed=9)
        second = holdout_split(d, d + 100, 0.5, seed=9)
        assert np.array_equal(first[0][0], second[0][0])

    def test_too_small_to_split(self):
        with pytest.raises(ObservationSizeMismatchError, match="HOLDOUT TOO SMALL"):
            holdout_split([0.1], [0.2], 0.5, seed=0)


class TestOptimalThreshold:
    def test_solves_the_defining_equation(self):
        sigma, c, delta = 1.0, 1.0, 1e-5
        w = optimal_threshold_dp(sigma, c, delta)
        ratio = float(std_normal_pdf((c - w) / sigma)) / float(std_normal_pdf(-w / sigma))
        residual = float(std_normal_cdf((c - w) / sigma)) - ratio * float(std_normal_cdf(-w / sigma)) - delta
        assert w > c / 2.0
        assert abs(residual) <= 1e-8

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_log_ratio_at_the_optimum_is_the_analytic_maximum(self, sigma: float, c: float):
        delta = 1e-5
        w = optimal_threshold_dp(sigma, c, delta)
        assert plugin_log_ratio(sigma, c, delta, w) == pytest.approx(max_eps_lower_analytic(sigma, c, w), abs=1e-6)

    def test_matches_a_dense_grid_scan(self):
        sigma, c, delta = 1.0, 1.0, 1e-5
        grid = np.linspace(0.5, 6.0, 55_001)
        scanned = grid[int(np.argmax(np.asarray(plugin_log_ratio(sigma, c, delta, grid))))]
        assert optimal_threshold_dp(sigma, c, delta) == pytest.approx(scanned, abs=2e-4)

    def test_analytic_maximum_endpoints(self):
        assert max_eps_lower_analytic(2.0, 1.0, 0.5) == 0.0
        assert max_eps_lower_analytic(2.0, 1.0, 1.0) == pytest.approx(1.0 / 8.0)

    def test_analytic_maximum_domain(self):
        with pytest.raises(ThresholdDomainError):
            max_eps_lower_analytic(1.0, 1.0, 0.2)

    def test_delta_above_the_mechanism_delta_has_no_threshold(self):
        with pytest.raises(ThresholdBracketError):
            optimal_threshold_dp(1.0, 1.0, 0.9)

    def test_empirical_dp_bound_stays_below_the_analytic_optimum(self):
        sigma, c, delta = 1.0, 1.0, 1e-5
        optimum = max_eps_lower_analytic(sigma, c, optimal_threshold_dp(sigma, c, delta))
        d, dprime = simulate_gaussian_pair(sigma, 5000, seed=31).to_arrays()
        curve = sweep_thresholds(d, dprime)
        best = max(eps_lower_dp_cp(curve.counts_at(i), delta, 0.05).eps_lower for i in range(0, len(curve), 7))
        assert best <= optimum


class TestGdpPluginThresholdInvariance:
    def test_symmetric_point(self):
        assert gdp_plugin_threshold_invariance(1.0, 0.5) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("z", [-2.0, 0.0, 0.5, 3.0])
    def test_independent_of_threshold(self, z: float):
        assert gdp_plugin_threshold_invariance(2.0, z) == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("mu", [0.25, 1.0, 4.0])
    def test_reparameterisation(self, mu: float):
        assert gdp_plugin_threshold_invariance(1.0 / mu, 0.3) == pytest.approx(mu, abs=1e-9)

    def test_holds_across_a_wide_range(self):
        values = [gdp_plugin_threshold_invariance(1.0, float(z)) for z in np.linspace(-10.0, 10.0, 201)]
        assert np.max(np.abs(np.array(values) - 1.0)) <= 1e-9


class TestSubsampledConservatism:
    def test_empirical_rates_respect_the_accountant_curve(self):
        sigma, q, n = math.sqrt(0.3), 0.25, 10_000
        accountant = pld_build(MechanismSpec(sigma=sigma, q=q))
        theory = approx_tradeoff_from_accountant(accountant.eps_of_delta, 100, 1e-5, TradeoffCombiner.Max)
        curve = sweep_thresholds(*simulate_subsampled_gaussian_pair(sigma, q, n, seed=12).to_arrays())
        confidence = 1.0 - 1e-7
        alpha_upper = np.asarray(clopper_pearson_upper(curve.fp, n, confidence))
        beta_upper = np.asarray(clopper_pearson_upper(curve.fn, n, confidence))
        assert (beta_upper >= np.asarray(theory(alpha_upper)) - 1e-3).all()

    def test_empirical_rates_respect_the_clt_gdp_curve(self):
        sigma, q, n = math.sqrt(0.3), 0.25, 10_000
        mu = q * math.sqrt(math.exp(1.0 / sigma**2) - 1.0)
        curve = sweep_thresholds(*simulate_subsampled_gaussian_pair(sigma, q, n, seed=12).to_arrays())
        confidence = 1.0 - 1e-7
        alpha_upper = np.asarray(clopper_pearson_upper(curve.fp, n, confidence))
        beta_upper = np.asarray(clopper_pearson_upper(curve.fn, n, confidence))
        assert (beta_upper >= np.asarray(tradeoff_gdp(mu)(alpha_upper)) - 1e-3).all()
