import math

import numpy as np
import pytest
from loguru import logger

from py_fdp_audit.core.attack.thresholding import compute_error_counts
from py_fdp_audit.core.auditing.auditor import (
    SWEEP_REFINE_CANDIDATES,
    AuditProtocol,
    Auditor,
    AuditReport,
    AuditRequest,
)
from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.dispatch import estimate
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.mechanisms.simulators import simulate_gaussian_pair
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_eps_of_delta, gdp_mu_of_eps


@pytest.fixture
def pair():
    return simulate_gaussian_pair(1.0, 2000, seed=13)


@pytest.fixture
def auditor():
    return Auditor()


def make_report(eps_lower: float) -> AuditReport:
    return AuditReport(
        result=AuditResult(method=AuditMethod.DP_CP, eps_lower=eps_lower, delta=1e-5, confidence=0.95),
        threshold=0.5,
        counts=ErrorCounts(fp=1, fn=1, n=10),
        protocol=AuditProtocol.Fixed,
        exploratory=False,
    )


class TestFixedProtocol:
    def test_counts_at_the_requested_threshold(self, pair, auditor):
        report = auditor.audit(pair, AuditRequest())
        assert report.threshold == 0.5
        assert report.counts == compute_error_counts(*pair.to_arrays(), 0.5)
        assert report.protocol is AuditProtocol.Fixed
        assert not report.exploratory
        assert report.thresholds_evaluated == 1

    def test_result_comes_from_the_requested_estimator(self, pair, auditor):
        request = AuditRequest(method=AuditMethod.DP_ZB, delta=1e-5, gamma=0.05)
        report = auditor.audit(pair, request)
        assert report.result == estimate(report.counts, AuditMethod.DP_ZB, 1e-5, 0.05)

    def test_request_rejects_infinite_threshold(self):
        with pytest.raises(ValueError):
            AuditRequest(threshold=float("inf"))


class TestSweepProtocol:
    def test_bound_is_flagged_exploratory(self, pair, auditor):
        report = auditor.audit(pair, AuditRequest(protocol=AuditProtocol.Sweep))
        assert report.exploratory
        assert report.protocol is AuditProtocol.Sweep
        assert report.thresholds_evaluated > 1

    def test_never_worse_than_the_fixed_threshold(self, pair, auditor):
        fixed = auditor.audit(pair, AuditRequest())
        swept = auditor.audit(pair, AuditRequest(protocol=AuditProtocol.Sweep))
        assert swept.result.mu_lower >= fixed.result.mu_lower - 1e-9

    def test_warns_about_the_exploratory_bound(self, pair, auditor):
        messages: list[str] = []
        sink_id = logger.add(messages.append, level="WARNING", format="{message}")
        try:
            auditor.audit(pair, AuditRequest(protocol=AuditProtocol.Sweep))
        finally:
            logger.remove(sink_id)
        assert any("[EXPLORATORY BOUND]" in message for message in messages)

    def test_clopper_pearson_dp_uses_the_proxy_ranking_only(self, pair, auditor, mocker):
        spy = mocker.patch("py_fdp_audit.core.auditing.auditor.estimate", wraps=estimate)
        auditor.audit(pair, AuditRequest(method=AuditMethod.DP_CP, protocol=AuditProtocol.Sweep))
        assert spy.call_count == 1

    def test_other_estimators_refine_the_best_candidates(self, pair, auditor, mocker):
        spy = mocker.patch("py_fdp_audit.core.auditing.auditor.estimate", wraps=estimate)
        auditor.audit(pair, AuditRequest(method=AuditMethod.DP_ZB, protocol=AuditProtocol.Sweep))
        assert spy.call_count == SWEEP_REFINE_CANDIDATES + 1

    def test_grid_policy_restricts_the_candidates(self, pair, auditor):
        request = AuditRequest(
            protocol=AuditProtocol.Sweep, threshold_policy="grid", threshold_grid=(0.25, 0.75)
        )
        report = auditor.audit(pair, request)
        assert report.threshold in (0.25, 0.75)
        assert report.thresholds_evaluated == 2


class TestHoldoutProtocol:
    def test_audits_only_the_held_out_trials(self, pair, auditor):
        report = auditor.audit(pair, AuditRequest(protocol=AuditProtocol.Holdout, holdout_fraction=0.25))
        assert report.counts.n == 1500
        assert not report.exploratory
        assert report.protocol is AuditProtocol.Holdout

    def test_is_reproducible_under_a_seed(self, pair, auditor):
        request = AuditRequest(protocol=AuditProtocol.Holdout, seed=4)
        assert auditor.audit(pair, request) == auditor.audit(pair, request)


class TestVerify:
    def test_lower_bound_above_the_claim_is_a_violation(self, auditor):
        verdict = auditor.judge(make_report(1.2), 1.0)
        assert verdict.violation
        assert verdict.lower == 1.2
        assert verdict.margin == pytest.approx(-0.2)

    def test_equal_bound_passes(self, auditor):
        assert not auditor.judge(make_report(1.2), 1.2).violation

    def test_generous_claim_passes(self, pair, auditor):
        verdict = auditor.verify(pair, 50.0, AuditRequest())
        assert not verdict.violation
        assert verdict.margin == pytest.approx(50.0 - verdict.report.result.eps_lower)

    def test_understated_claim_on_a_leaky_mechanism_is_caught(self, pair, auditor):
        assert auditor.verify(pair, 0.0, AuditRequest()).violation

    def test_claim_must_be_nonnegative(self, auditor):
        with pytest.raises(ValueError):
            auditor.judge(make_report(0.5), -1.0)


class TestGaussianAuditQuality:
    @pytest.mark.parametrize("eps", [4.0, 6.0])
    def test_fdp_bound_is_tight_on_average(self, auditor, eps: float):
        sigma = 1.0 / gdp_mu_of_eps(eps, 1e-5)
        fdp, dp = [], []
        for seed in range(20):
            pair = simulate_gaussian_pair(sigma, 1000, seed=seed)
            fdp.append(auditor.audit(pair, AuditRequest(method=AuditMethod.FDP_CP)).result.eps_lower)
            dp.append(auditor.audit(pair, AuditRequest(method=AuditMethod.DP_CP)).result.eps_lower)
        assert 0.7 * eps <= np.mean(fdp) <= eps
        assert np.mean(dp) < np.mean(fdp)

    @pytest.mark.parametrize("eps", [1.0, 2.0])
    def test_fdp_beats_dp_at_small_epsilon(self, auditor, eps: float):
        sigma = 1.0 / gdp_mu_of_eps(eps, 1e-5)
        pairs = [simulate_gaussian_pair(sigma, 1000, seed=seed) for seed in range(20)]
        fdp = [auditor.audit(pair, AuditRequest(method=AuditMethod.FDP_CP)).result.eps_lower for pair in pairs]
        dp = [auditor.audit(pair, AuditRequest(method=AuditMethod.DP_CP)).result.eps_lower for pair in pairs]
        assert np.mean(dp) < np.mean(fdp) <= eps

    @pytest.mark.parametrize("eps", [1.0, 4.0])
    def test_bayesian_bound_beats_clopper_pearson_on_average(self, auditor, eps: float):
        sigma = 1.0 / gdp_mu_of_eps(eps, 1e-5)
        pairs = [simulate_gaussian_pair(sigma, 1000, seed=100 + seed) for seed in range(20)]
        zb = [auditor.audit(pair, AuditRequest(method=AuditMethod.FDP_ZB)).result.eps_lower for pair in pairs]
        cp = [auditor.audit(pair, AuditRequest(method=AuditMethod.FDP_CP)).result.eps_lower for pair in pairs]
        assert np.mean(zb) >= np.mean(cp)

    @pytest.mark.parametrize("method", list(AuditMethod))
    def test_honest_mechanism_is_rarely_overestimated(self, auditor, method: AuditMethod):
        runs = 200
        true_eps = gdp_eps_of_delta(1.0, 1e-5)
        delta = 0.0 if method is AuditMethod.KATZ else 1e-5
        request = AuditRequest(method=method, delta=delta)
        exceeded = sum(
            auditor.audit(simulate_gaussian_pair(1.0, 1000, seed=1000 + seed), request).result.eps_lower > true_eps
            for seed in range(runs)
        )
        assert exceeded / runs <= 0.05 + 3.0 * math.sqrt(0.05 * 0.95 / runs)
