from functools import cached_property
from typing import Callable

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict
from scipy import optimize, stats

from py_fdp_audit.core.estimators.clopper_pearson import check_gamma
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.numerics.special_functions import beta_cdf, beta_quantile
from py_fdp_audit.core.tradeoff.tradeoff_curve import (
    TradeoffCurve,
    tradeoff_eps_delta,
    tradeoff_gdp,
)

QUADRATURE_NODES = 512
ROOT_TOLERANCE = 1e-4
MU_BRACKET = (0.0, 50.0)
EPS_BRACKET = (0.0, 100.0)
MAX_BRACKET_WIDENINGS = 4

JEFFREYS_OFFSET = 0.5


class JeffreysPosterior(BaseModel):
    """
    Posterior over the attack's (FPR, FNR) under independent Jeffreys priors.

    FPR ~ Beta(fp + ½, n − fp + ½) and FNR ~ Beta(fn + ½, n − fn + ½). Region masses are
    integrated in the probability space of the FPR marginal, so the quadrature stays accurate
    however concentrated the posterior is.
    """

    model_config = ConfigDict(frozen=True)

    counts: ErrorCounts

    @property
    def fpr_shape(self) -> tuple[float, float]:
        return self.counts.fp + JEFFREYS_OFFSET, self.counts.n - self.counts.fp + JEFFREYS_OFFSET

    @property
    def fnr_shape(self) -> tuple[float, float]:
        return self.counts.fn + JEFFREYS_OFFSET, self.counts.n - self.counts.fn + JEFFREYS_OFFSET

    @property
    def fpr_mean(self) -> float:
        a, b = self.fpr_shape
        return a / (a + b)

    @property
    def fnr_mean(self) -> float:
        a, b = self.fnr_shape
        return a / (a + b)

    def pdf(self, alpha: ArrayLike, beta: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(
            stats.beta.pdf(alpha, *self.fpr_shape) * stats.beta.pdf(beta, *self.fnr_shape),
            dtype=np.float64,
        )

    @cached_property
    def _nodes(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        # Gauss-Legendre on (0, 1) in u-space, mapped to FPR values through the marginal quantile
        x, w = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
        u = 0.5 * (x + 1.0)
        alphas = np.asarray(beta_quantile(u, *self.fpr_shape), dtype=np.float64)
        return alphas, 0.5 * w

    def _integrate(
        self, lower: Callable[[NDArray[np.float64]], NDArray[np.float64]],
        upper: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    ) -> float:
        alphas, weights = self._nodes
        lo = np.clip(lower(alphas), 0.0, 1.0)
        hi = np.clip(upper(alphas), 0.0, 1.0)
        a, b = self.fnr_shape
        inner = np.asarray(beta_cdf(hi, a, b)) - np.asarray(beta_cdf(lo, a, b))
        return float(np.sum(weights * np.maximum(inner, 0.0)))

    def region_mass(self, curve: TradeoffCurve) -> float:
        """Posterior mass of {(α, β): f(α) ≤ β ≤ 1 − f(1 − α)} for the trade-off curve f."""
        return self._integrate(
            lambda alphas: np.asarray(curve(alphas)),
            lambda alphas: 1.0 - np.asarray(curve(1.0 - alphas)),
        )

    def total_mass(self) -> float:
        return self._integrate(np.zeros_like, np.ones_like)


def posterior_density(counts: ErrorCounts) -> JeffreysPosterior:
    return JeffreysPosterior(counts=counts)


def _largest_parameter_within_mass(
    posterior: JeffreysPosterior,
    curve_of: Callable[[float], TradeoffCurve],
    bracket: tuple[float, float],
    mass_limit: float,
    parameter_name: str,
) -> float:
    """Largest θ in the bracket whose region holds posterior mass ≤ `mass_limit` (mass is nondecreasing in θ)."""

    def excess(theta: float) -> float:
        return posterior.region_mass(curve_of(theta)) - mass_limit

    low, high = bracket
    if excess(low) > 0.0:
        return low
    widenings = 0
    while excess(high) <= 0.0:
        if widenings == MAX_BRACKET_WIDENINGS:
            logger.warning(
                f"[BRACKET EXHAUSTED] posterior region mass stays below {mass_limit} up to {parameter_name}={high}; reporting the bracket edge"
            )
            return high
        logger.warning(f"[BRACKET WIDENED] {parameter_name} bracket upper edge {high} -> {2 * high}")
        low, high = high, 2.0 * high
        widenings += 1
    return float(optimize.brentq(excess, low, high, xtol=ROOT_TOLERANCE))


def mu_lower_gdp_zb(counts: ErrorCounts, gamma: float) -> float:
    """Largest μ whose GDP region holds at most γ/2 of the posterior: mass outside is at least 1 − γ/2."""
    check_gamma(gamma)
    return _largest_parameter_within_mass(
        posterior_density(counts), tradeoff_gdp, MU_BRACKET, gamma / 2.0, "mu"
    )


def eps_lower_dp_zb(counts: ErrorCounts, delta: float, gamma: float) -> float:
    check_gamma(gamma)
    return _largest_parameter_within_mass(
        posterior_density(counts),
        lambda eps: tradeoff_eps_delta(eps, delta),
        EPS_BRACKET,
        gamma / 2.0,
        "epsilon",
    )


def region_predicate(posterior: JeffreysPosterior, gamma: float) -> Callable[[TradeoffCurve], bool]:
    """True when the curve's region holds at most γ/2 of the posterior."""
    return lambda curve: posterior.region_mass(curve) <= gamma / 2.0
