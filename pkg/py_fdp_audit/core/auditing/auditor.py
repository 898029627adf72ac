from enum import Enum

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from py_fdp_audit.core.attack.thresholding import (
    RateCurve,
    ThresholdPolicy,
    compute_error_counts,
    holdout_split,
    sweep_thresholds,
)
from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.clopper_pearson import (
    clopper_pearson_upper,
    eps_lower_from_rates,
    mu_lower_from_rates,
)
from py_fdp_audit.core.estimators.dispatch import estimate
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair

# midpoint between the normalised world means 0 and 1
DEFAULT_THRESHOLD = 0.5
# thresholds re-audited with the requested estimator after the Clopper-Pearson ranking
SWEEP_REFINE_CANDIDATES = 8


class AuditProtocol(str, Enum):
    Fixed = "fixed"
    Sweep = "sweep"
    Holdout = "holdout"


class AuditRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: AuditMethod = AuditMethod.FDP_CP
    delta: float = Field(default=1e-5, ge=0.0, lt=1.0)
    gamma: float = Field(default=0.05, gt=0.0, lt=1.0)
    protocol: AuditProtocol = AuditProtocol.Fixed
    threshold: float = Field(default=DEFAULT_THRESHOLD, allow_inf_nan=False)
    threshold_policy: ThresholdPolicy = ThresholdPolicy.Midpoints
    threshold_grid: tuple[float, ...] = ()
    holdout_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    q: float = Field(default=1.0, gt=0.0, le=1.0)
    steps: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)


class AuditReport(BaseModel):
    """
    Outcome of one audit. `exploratory` marks bounds whose threshold was chosen on the same
    observations it was evaluated on; such bounds are not valid confidence statements.
    """

    model_config = ConfigDict(frozen=True)

    result: AuditResult
    threshold: float
    counts: ErrorCounts
    protocol: AuditProtocol
    exploratory: bool
    thresholds_evaluated: int = 1


class VerifyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    report: AuditReport
    claimed_eps: float = Field(ge=0.0)
    lower: float
    margin: float
    violation: bool


class Auditor:
    """Turns observation pairs into audit reports under the fixed, sweep or holdout protocol."""

    def audit(self, pair: ObservationPair, request: AuditRequest) -> AuditReport:
        scores_d, scores_dprime = pair.to_arrays()
        match request.protocol:
            case AuditProtocol.Fixed:
                return self._audit_at(scores_d, scores_dprime, request.threshold, request, AuditProtocol.Fixed)
            case AuditProtocol.Sweep:
                logger.warning(
                    "[EXPLORATORY BOUND] the threshold is optimised on the audited observations; the bound is not a valid confidence statement"
                )
                threshold, evaluated = self._best_threshold(scores_d, scores_dprime, request)
                report = self._audit_at(scores_d, scores_dprime, threshold, request, AuditProtocol.Sweep)
                return report.model_copy(update={"exploratory": True, "thresholds_evaluated": evaluated})
            case AuditProtocol.Holdout:
                (select_d, select_dprime), (audit_d, audit_dprime) = holdout_split(
                    scores_d, scores_dprime, request.holdout_fraction, request.seed
                )
                threshold, evaluated = self._best_threshold(select_d, select_dprime, request)
                logger.debug(
                    f"[HOLDOUT THRESHOLD] selected z={threshold:.6g} on {select_d.size} trials; auditing {audit_d.size} held-out trials"
                )
                report = self._audit_at(audit_d, audit_dprime, threshold, request, AuditProtocol.Holdout)
                return report.model_copy(update={"thresholds_evaluated": evaluated})

    def verify(self, pair: ObservationPair, claimed_eps: float, request: AuditRequest) -> VerifyReport:
        return self.judge(self.audit(pair, request), claimed_eps)

    def judge(self, report: AuditReport, claimed_eps: float) -> VerifyReport:
        """Compares an audit's epsilon lower bound with a claimed epsilon."""
        lower = report.result.eps_lower
        violation = lower > claimed_eps
        if violation:
            logger.error(
                f"[VERIFY VIOLATION] empirical lower bound {lower:.4f} exceeds the claimed epsilon {claimed_eps:.4f}"
            )
        else:
            logger.success(f"[VERIFY PASSED] empirical lower bound {lower:.4f} <= claimed epsilon {claimed_eps:.4f}")
        return VerifyReport(
            report=report,
            claimed_eps=claimed_eps,
            lower=lower,
            margin=claimed_eps - lower,
            violation=violation,
        )

    def _audit_at(
        self,
        scores_d: NDArray[np.float64],
        scores_dprime: NDArray[np.float64],
        threshold: float,
        request: AuditRequest,
        protocol: AuditProtocol,
    ) -> AuditReport:
        counts = compute_error_counts(scores_d, scores_dprime, threshold)
        result = estimate(counts, request.method, request.delta, request.gamma, request.q, request.steps)
        logger.debug(
            f"[AUDIT] method={request.method.value}, z={threshold:.6g}, fp={counts.fp}, fn={counts.fn}, n={counts.n} -> epsilon>={result.eps_lower:.4f}"
        )
        return AuditReport(
            result=result, threshold=threshold, counts=counts, protocol=protocol, exploratory=False
        )

    def _best_threshold(
        self, scores_d: NDArray[np.float64], scores_dprime: NDArray[np.float64], request: AuditRequest
    ) -> tuple[float, int]:
        """
        Threshold with the largest bound along a sweep.

        Every threshold is scored with the vectorised Clopper-Pearson bound of the method's
        family; unless the method is that bound itself, the best few are re-audited with the
        requested estimator.
        """
        curve = sweep_thresholds(scores_d, scores_dprime, request.threshold_policy, request.threshold_grid or None)
        finite = np.isfinite(curve.thresholds)
        scores = np.where(finite, self._proxy_scores(curve, request), -np.inf)
        ranked = np.argsort(-scores, kind="stable")
        exact_proxy = request.method is AuditMethod.DP_CP or (
            request.method is AuditMethod.FDP_CP and request.q == 1.0
        )
        if exact_proxy:
            return float(curve.thresholds[ranked[0]]), len(curve)

        best_threshold, best_eps = float(curve.thresholds[ranked[0]]), -np.inf
        for index in ranked[:SWEEP_REFINE_CANDIDATES]:
            if not finite[index]:
                continue
            counts = curve.counts_at(int(index))
            eps = estimate(counts, request.method, request.delta, request.gamma, request.q, request.steps).eps_lower
            if eps > best_eps:
                best_threshold, best_eps = float(curve.thresholds[index]), eps
        return best_threshold, len(curve)

    def _proxy_scores(self, curve: RateCurve, request: AuditRequest) -> NDArray[np.float64]:
        confidence = 1.0 - request.gamma / 2.0
        alpha_bar = np.asarray(clopper_pearson_upper(curve.fp, curve.n, confidence))
        beta_bar = np.asarray(clopper_pearson_upper(curve.fn, curve.n, confidence))
        if request.method.is_fdp:
            return np.asarray(mu_lower_from_rates(alpha_bar, beta_bar))
        return np.asarray(eps_lower_from_rates(alpha_bar, beta_bar, request.delta))
