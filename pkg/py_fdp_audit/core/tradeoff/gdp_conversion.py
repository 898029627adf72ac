import math

from loguru import logger
from scipy.optimize import brentq

from py_fdp_audit.core.numerics.special_functions import (
    log_diff_exp,
    log_std_normal_cdf,
)
from py_fdp_audit.core.tradeoff.tradeoff_curve import TradeoffDomainError

MU_BRACKET_UPPER = 50.0
EPS_BRACKET_LIMIT = 1e4


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise TradeoffDomainError(f"[DELTA DOMAIN ERROR] delta must lie in (0, 1), got {delta}")


def gdp_delta_of_eps(mu: float, epsilon: float) -> float:
    """
    δ(ε) = Φ(−ε/μ + μ/2) − e^ε Φ(−ε/μ − μ/2), the (ε, δ) curve implied by μ-GDP.

    Evaluated in the log domain so that large ε does not lose the difference to cancellation.
    """
    if mu < 0.0 or epsilon < 0.0:
        raise TradeoffDomainError(
            f"[GDP DOMAIN ERROR] mu and epsilon must be nonnegative, got mu={mu}, epsilon={epsilon}"
        )
    if mu == 0.0:
        return 0.0
    log_first = float(log_std_normal_cdf(-epsilon / mu + mu / 2.0))
    log_second = epsilon + float(log_std_normal_cdf(-epsilon / mu - mu / 2.0))
    if log_second >= log_first:
        return 0.0
    return min(1.0, math.exp(float(log_diff_exp(log_first, log_second))))


def gdp_eps_of_delta(mu: float, delta: float) -> float:
    """Smallest ε ≥ 0 with gdp_delta_of_eps(mu, ε) ≤ delta."""
    _check_delta(delta)
    if mu < 0.0:
        raise TradeoffDomainError(f"[GDP DOMAIN ERROR] mu must be nonnegative, got {mu}")
    if mu == 0.0 or gdp_delta_of_eps(mu, 0.0) <= delta:
        return 0.0

    upper = 1.0
    while gdp_delta_of_eps(mu, upper) > delta:
        upper *= 2.0
        if upper > EPS_BRACKET_LIMIT:
            raise TradeoffDomainError(
                f"[GDP BRACKET ERROR] no epsilon below {EPS_BRACKET_LIMIT} reaches delta={delta} for mu={mu}"
            )
    return float(
        brentq(lambda eps: gdp_delta_of_eps(mu, eps) - delta, 0.0, upper, xtol=1e-12)
    )


def gdp_mu_of_eps(epsilon: float, delta: float) -> float:
    """Smallest μ whose GDP guarantee converts to (epsilon, delta)-DP."""
    _check_delta(delta)
    if epsilon < 0.0:
        raise TradeoffDomainError(f"[GDP DOMAIN ERROR] epsilon must be nonnegative, got {epsilon}")
    if gdp_delta_of_eps(MU_BRACKET_UPPER, epsilon) < delta:
        logger.warning(
            f"[GDP BRACKET HIT] epsilon={epsilon} at delta={delta} needs mu above {MU_BRACKET_UPPER}"
        )
        return MU_BRACKET_UPPER
    # δ(ε) is increasing in μ and vanishes at μ = 0
    return float(
        brentq(
            lambda mu: gdp_delta_of_eps(mu, epsilon) - delta,
            0.0,
            MU_BRACKET_UPPER,
            xtol=1e-12,
        )
    )
