import numpy as np
from numpy.typing import ArrayLike

from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.numerics.special_functions import (
    FloatOrArray,
    as_float_or_array,
    beta_quantile,
    std_normal_quantile,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_eps_of_delta

# rates of exactly 0 or 1 are pulled inside (0, 1) before logs and normal quantiles
RATE_FLOOR = 1e-15


class EstimatorConfigurationError(ValueError): ...


def check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise EstimatorConfigurationError(f"[CONFIDENCE DOMAIN ERROR] gamma must lie in (0, 1), got {gamma}")


def clopper_pearson_upper(count: ArrayLike, n: ArrayLike, confidence: float) -> FloatOrArray:
    """
    One-sided Clopper-Pearson upper bound on a binomial rate; 1 when every trial erred.

    Vectorised over `count` (and `n`), so a whole threshold sweep is bounded in one call.
    """
    if not 0.0 < confidence < 1.0:
        raise EstimatorConfigurationError(
            f"[CONFIDENCE DOMAIN ERROR] confidence must lie in (0, 1), got {confidence}"
        )
    k = np.asarray(count, dtype=np.float64)
    total = np.asarray(n, dtype=np.float64)
    if (k < 0).any() or (k > total).any():
        raise EstimatorConfigurationError(f"[COUNT DOMAIN ERROR] need 0 <= count <= n, got count={count}, n={n}")
    saturated = k >= total
    upper = np.asarray(beta_quantile(confidence, k + 1.0, np.where(saturated, 1.0, total - k)))
    return as_float_or_array(np.where(saturated, 1.0, upper))


def eps_lower_from_rates(alpha: ArrayLike, beta: ArrayLike, delta: float) -> FloatOrArray:
    """max{ln((1−α−δ)/β), ln((1−β−δ)/α), 0}, elementwise."""
    a = np.maximum(np.asarray(alpha, dtype=np.float64), RATE_FLOOR)
    b = np.maximum(np.asarray(beta, dtype=np.float64), RATE_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.log(np.maximum(1.0 - a - delta, 0.0) / b)
        second = np.log(np.maximum(1.0 - b - delta, 0.0) / a)
    return as_float_or_array(np.maximum(np.maximum(first, second), 0.0))


def mu_lower_from_rates(alpha: ArrayLike, beta: ArrayLike) -> FloatOrArray:
    """max{0, Φ⁻¹(1−α) − Φ⁻¹(β)}, elementwise; a rate of 1 means no distinguishing power."""
    raw_a = np.asarray(alpha, dtype=np.float64)
    raw_b = np.asarray(beta, dtype=np.float64)
    a = np.clip(raw_a, RATE_FLOOR, 1.0 - RATE_FLOOR)
    b = np.clip(raw_b, RATE_FLOOR, 1.0 - RATE_FLOOR)
    mu = -np.asarray(std_normal_quantile(a)) - np.asarray(std_normal_quantile(b))
    mu = np.where((raw_a >= 1.0) | (raw_b >= 1.0), 0.0, mu)
    return as_float_or_array(np.maximum(mu, 0.0))


def upper_rates(counts: ErrorCounts, gamma: float) -> tuple[float, float]:
    """CP upper bounds (ᾱ, β̄), each side at confidence 1 − γ/2."""
    check_gamma(gamma)
    confidence = 1.0 - gamma / 2.0
    return (
        float(clopper_pearson_upper(counts.fp, counts.n, confidence)),
        float(clopper_pearson_upper(counts.fn, counts.n, confidence)),
    )


def eps_lower_dp_cp(counts: ErrorCounts, delta: float, gamma: float) -> AuditResult:
    alpha_bar, beta_bar = upper_rates(counts, gamma)
    return AuditResult(
        method=AuditMethod.DP_CP,
        eps_lower=float(eps_lower_from_rates(alpha_bar, beta_bar, delta)),
        delta=delta,
        confidence=1.0 - gamma,
    )


def mu_lower_gdp_cp(counts: ErrorCounts, gamma: float) -> float:
    alpha_bar, beta_bar = upper_rates(counts, gamma)
    return float(mu_lower_from_rates(alpha_bar, beta_bar))


def mu_to_eps_lower(mu: float, delta: float) -> float:
    if mu < 0.0:
        raise EstimatorConfigurationError(f"[MU DOMAIN ERROR] mu must be nonnegative, got {mu}")
    return gdp_eps_of_delta(mu, delta)


def eps_lower_fdp_cp(counts: ErrorCounts, delta: float, gamma: float) -> AuditResult:
    mu = mu_lower_gdp_cp(counts, gamma)
    return AuditResult(
        method=AuditMethod.FDP_CP,
        mu_lower=mu,
        eps_lower=mu_to_eps_lower(mu, delta),
        delta=delta,
        confidence=1.0 - gamma,
    )
