from loguru import logger

from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.bayesian import eps_lower_dp_zb, mu_lower_gdp_zb
from py_fdp_audit.core.estimators.clopper_pearson import (
    EstimatorConfigurationError,
    eps_lower_dp_cp,
    eps_lower_fdp_cp,
    mu_to_eps_lower,
)
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.estimators.katz import eps_lower_katz
from py_fdp_audit.core.estimators.multistep import sigma_lower_multistep


def estimate(
    counts: ErrorCounts,
    method: AuditMethod,
    delta: float,
    gamma: float,
    q: float = 1.0,
    steps: int = 1,
) -> AuditResult:
    """
    Runs one estimator on a set of error counts.

    f-DP methods audit against the Gaussian family; with sub-sampling (`q` < 1) they switch to
    the numerical trade-off curve of the sub-sampled mechanism composed `steps` times. Without
    sub-sampling composition stays Gaussian, so the GDP path is exact for any `steps`.
    """
    confidence = 1.0 - gamma
    match method:
        case AuditMethod.FDP_CP | AuditMethod.FDP_ZB if q < 1.0:
            return sigma_lower_multistep(counts, q, steps, gamma, delta, method=method)
        case AuditMethod.FDP_CP:
            return eps_lower_fdp_cp(counts, delta, gamma)
        case AuditMethod.FDP_ZB:
            mu = mu_lower_gdp_zb(counts, gamma)
            return AuditResult(
                method=method,
                mu_lower=mu,
                eps_lower=mu_to_eps_lower(mu, delta),
                delta=delta,
                confidence=confidence,
            )
        case AuditMethod.DP_CP:
            return eps_lower_dp_cp(counts, delta, gamma)
        case AuditMethod.DP_ZB:
            return AuditResult(
                method=method,
                eps_lower=eps_lower_dp_zb(counts, delta, gamma),
                delta=delta,
                confidence=confidence,
            )
        case AuditMethod.KATZ:
            if delta > 0.0:
                logger.error(
                    "[KATZ DELTA REFUSED] the Katz-log interval is only valid for pure epsilon-DP audits"
                )
                raise EstimatorConfigurationError(
                    f"[KATZ DELTA REFUSED] Katz-log bounds require delta = 0, got delta={delta}"
                )
            return AuditResult(
                method=method,
                eps_lower=eps_lower_katz(counts, gamma),
                delta=0.0,
                confidence=confidence,
            )
