import math
from typing import Callable

from loguru import logger

from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import (
    DEFAULT_LOSS_BOUND,
    PldResolutionError,
    pld_build,
    pld_eps_of_delta,
)
from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.bayesian import posterior_density, region_predicate
from py_fdp_audit.core.estimators.clopper_pearson import (
    EstimatorConfigurationError,
    upper_rates,
)
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.tradeoff.accountant_approximation import (
    TradeoffCombiner,
    approx_tradeoff_from_accountant,
)
from py_fdp_audit.core.tradeoff.tradeoff_curve import TradeoffCurve

SIGMA_BRACKET = (1e-3, 1e3)
LOG_SIGMA_TOLERANCE = 1e-3
SUPPORTING_LINES = 1000


def _approximate_curve(sigma: float, q: float, steps: int, delta: float, lines: int) -> TradeoffCurve:
    accountant = pld_build(MechanismSpec(sigma=sigma, q=q, steps=steps))
    return approx_tradeoff_from_accountant(
        accountant.eps_of_delta, lines, delta, combiner=TradeoffCombiner.Max
    )


def sigma_lower_multistep(
    counts: ErrorCounts,
    q: float,
    steps: int,
    gamma: float,
    delta: float,
    method: AuditMethod = AuditMethod.FDP_CP,
    lines: int = SUPPORTING_LINES,
) -> AuditResult:
    """
    Audits a sub-sampled, composed Gaussian mechanism through its numerical trade-off curve.

    A noise multiplier σ is refuted when the approximate trade-off curve of
    (σ, q, steps) passes through or above the attack's confidence point (CP) or holds at most
    γ/2 of the error-rate posterior (ZB). The smallest refuted σ̂ is found by bisection on
    log σ; its ε at `delta` is the reported lower bound.
    """
    if not method.is_fdp:
        raise EstimatorConfigurationError(
            f"[MULTISTEP METHOD ERROR] the noise-multiplier search needs an f-DP method, got {method.value}"
        )
    if not 0.0 < delta < 0.5:
        raise EstimatorConfigurationError(f"[DELTA DOMAIN ERROR] delta must lie in (0, 0.5), got {delta}")

    accepts: Callable[[TradeoffCurve], bool]
    if method is AuditMethod.FDP_CP:
        alpha_bar, beta_bar = upper_rates(counts, gamma)
        accepts = lambda curve: float(curve(alpha_bar)) >= beta_bar  # noqa: E731
    else:
        accepts = region_predicate(posterior_density(counts), gamma)

    def refuted(sigma: float) -> bool:
        try:
            return accepts(_approximate_curve(sigma, q, steps, delta, lines))
        except PldResolutionError:
            # the curve is unresolvable only when it hugs zero
            return False

    def trivial(reason: str) -> AuditResult:
        logger.warning(f"[MULTISTEP TRIVIAL BOUND] {reason}")
        return AuditResult(
            method=method, eps_lower=0.0, delta=delta, confidence=1.0 - gamma, diagnostics=(reason,)
        )

    low, high = SIGMA_BRACKET
    if not refuted(high):
        return trivial(f"no noise multiplier in [{low}, {high}] is refuted by the observed errors")

    diagnostics: list[str] = []
    if refuted(low):
        sigma_hat = low
        diagnostics.append(f"even sigma={low} is refuted; reporting the bracket edge")
    else:
        log_low, log_high = math.log(low), math.log(high)
        while log_high - log_low > LOG_SIGMA_TOLERANCE:
            mid = 0.5 * (log_low + log_high)
            if refuted(math.exp(mid)):
                log_high = mid
            else:
                log_low = mid
        sigma_hat = math.exp(log_high)

    try:
        eps = pld_eps_of_delta(pld_build(MechanismSpec(sigma=sigma_hat, q=q, steps=steps)), delta)
    except PldResolutionError:
        eps = DEFAULT_LOSS_BOUND
        diagnostics.append(f"epsilon at sigma={sigma_hat:.4g} exceeds the accountant window; reporting {eps}")

    logger.debug(f"[MULTISTEP AUDIT] q={q}, steps={steps}: sigma_hat={sigma_hat:.4f}, epsilon={eps:.4f}")
    return AuditResult(
        method=method,
        mu_lower=math.sqrt(steps) / sigma_hat if q == 1.0 else 0.0,
        eps_lower=eps,
        delta=delta,
        confidence=1.0 - gamma,
        sigma_lower=sigma_hat,
        diagnostics=tuple(diagnostics),
    )
