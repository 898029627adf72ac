import math

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from py_fdp_audit.core.numerics.special_functions import (
    FloatOrArray,
    as_float_or_array,
    log_diff_exp,
    log_std_normal_cdf,
    std_normal_cdf,
    std_normal_quantile,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_delta_of_eps

THRESHOLD_TOLERANCE = 1e-9
MAX_BRACKET_DOUBLINGS = 60


class ThresholdBracketError(Exception): ...


class ThresholdDomainError(ValueError): ...


def _check_mechanism(sigma: float, c: float) -> None:
    if sigma <= 0.0 or c <= 0.0:
        raise ThresholdDomainError(f"[THRESHOLD DOMAIN ERROR] need sigma > 0 and c > 0, got sigma={sigma}, c={c}")


def _tail_delta(sigma: float, c: float, z: float) -> float:
    """Φ((c−z)/σ) − e^{c(2z−c)/(2σ²)}·Φ(−z/σ): the δ at which threshold z is the best (ε, δ) attack."""
    return gdp_delta_of_eps(c / sigma, max(c * (2.0 * z - c) / (2.0 * sigma * sigma), 0.0))


def optimal_threshold_dp(sigma: float, c: float, delta: float) -> float:
    """
    The threshold w > c/2 maximising the exact-rate (ε, δ)-DP lower bound of a Gaussian
    mechanism with sensitivity c and noise σ.
    """
    _check_mechanism(sigma, c)
    if not 0.0 < delta < 1.0:
        raise ThresholdDomainError(f"[THRESHOLD DOMAIN ERROR] delta must lie in (0, 1), got {delta}")
    low = c / 2.0
    if _tail_delta(sigma, c, low) <= delta:
        raise ThresholdBracketError(
            f"[THRESHOLD BRACKET ERROR] delta={delta} is not below the mechanism's delta at epsilon=0; no threshold above c/2 exists"
        )
    log_delta = math.log(delta)

    def residual(z: float) -> float:
        current = _tail_delta(sigma, c, z)
        return (math.log(current) if current > 0.0 else -math.inf) - log_delta

    width = sigma
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if residual(low + width) < 0.0:
            break
        width *= 2.0
    else:
        raise ThresholdBracketError(f"[THRESHOLD BRACKET ERROR] no sign change found for delta={delta}")
    return float(optimize.brentq(residual, low, low + width, xtol=THRESHOLD_TOLERANCE))


def max_eps_lower_analytic(sigma: float, c: float, w: float) -> float:
    _check_mechanism(sigma, c)
    if w < c / 2.0:
        raise ThresholdDomainError(f"[THRESHOLD DOMAIN ERROR] w must be at least c/2={c / 2.0}, got {w}")
    return c * (2.0 * w - c) / (2.0 * sigma * sigma)


def plugin_log_ratio(sigma: float, c: float, delta: float, z: ArrayLike) -> FloatOrArray:
    """ln((1 − β(z) − δ)/α(z)) at exact Gaussian rates; −inf where 1 − β(z) ≤ δ."""
    _check_mechanism(sigma, c)
    zs = np.asarray(z, dtype=np.float64)
    log_power = np.asarray(log_std_normal_cdf((c - zs) / sigma))
    log_alpha = np.asarray(log_std_normal_cdf(-zs / sigma))
    with np.errstate(invalid="ignore"):
        numerator = np.where(
            log_power > math.log(delta), np.asarray(log_diff_exp(log_power, math.log(delta))), -np.inf
        )
    return as_float_or_array(numerator - log_alpha)


def gdp_plugin_threshold_invariance(sigma: float, z: float, c: float = 1.0) -> float:
    """
    Φ⁻¹(1 − α(z)) − Φ⁻¹(β(z)) at the exact rates of threshold z; equals c/σ for every z.

    Each quantile is taken from whichever tail is small so the identity holds far from the
    means.
    """
    _check_mechanism(sigma, c)
    upper = z / sigma
    lower = (z - c) / sigma
    # Φ⁻¹(1 − α) where α = Φ(−z/σ)
    if upper >= 0.0:
        q_alpha = -float(std_normal_quantile(std_normal_cdf(-upper)))
    else:
        q_alpha = float(std_normal_quantile(std_normal_cdf(upper)))
    # Φ⁻¹(β) where β = Φ((z − c)/σ)
    if lower <= 0.0:
        q_beta = float(std_normal_quantile(std_normal_cdf(lower)))
    else:
        q_beta = -float(std_normal_quantile(std_normal_cdf(-lower)))
    return q_alpha - q_beta
