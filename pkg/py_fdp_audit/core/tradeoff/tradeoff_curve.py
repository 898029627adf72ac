from abc import ABC, abstractmethod
from enum import Enum
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from py_fdp_audit.core.numerics.special_functions import (
    FloatOrArray,
    as_float_or_array,
    std_normal_cdf,
    std_normal_quantile,
)

ALPHA_GRID_SIZE = 2049


class TradeoffDomainError(ValueError): ...


class TradeoffKind(str, Enum):
    EpsDelta = "eps-delta"
    Gdp = "gdp"
    Piecewise = "piecewise"


class PrivacyPoint(BaseModel):
    """An attack operating point: alpha is the type I error (FPR), beta the type II error (FNR)."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.0, le=1.0)
    beta: float = Field(ge=0.0, le=1.0)


class TradeoffCurve(BaseModel, ABC):
    """
    A trade-off function alpha -> beta describing an f-DP guarantee.

    Curves are immutable values. Calling a curve evaluates it on a scalar or an array of
    type I errors in [0, 1]; results are clipped into [0, 1]. Subclasses implement
    `evaluate` on a float array already checked for the domain.
    """

    model_config = ConfigDict(frozen=True)

    @property
    @abstractmethod
    def kind(self) -> TradeoffKind: ...

    @abstractmethod
    def evaluate(self, alpha: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def __call__(self, alpha: ArrayLike) -> FloatOrArray:
        arr = np.asarray(alpha, dtype=np.float64)
        if np.isnan(arr).any() or (arr < 0.0).any() or (arr > 1.0).any():
            raise TradeoffDomainError(
                f"[TRADEOFF DOMAIN ERROR] alpha must lie in [0, 1], got {alpha}"
            )
        values = np.clip(self.evaluate(np.atleast_1d(arr)), 0.0, 1.0)
        return as_float_or_array(values.reshape(arr.shape))

    def sample(
        self, size: int = ALPHA_GRID_SIZE
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        alphas = np.linspace(0.0, 1.0, size)
        return alphas, np.asarray(self(alphas), dtype=np.float64)


class EpsDeltaCurve(TradeoffCurve):
    name: Literal["eps-delta"] = "eps-delta"
    epsilon: float = Field(ge=0.0)
    delta: float = Field(ge=0.0, le=1.0)

    @property
    def kind(self) -> TradeoffKind:
        return TradeoffKind.EpsDelta

    def evaluate(self, alpha: NDArray[np.float64]) -> NDArray[np.float64]:
        slack = 1.0 - self.delta
        # log(e^ε·α), capped at 0: past that the first branch is already negative
        with np.errstate(divide="ignore", invalid="ignore"):
            log_scaled = np.where(alpha > 0.0, np.minimum(self.epsilon + np.log(alpha), 0.0), -np.inf)
        first = slack - np.exp(log_scaled)
        second = (slack - alpha) * np.exp(-self.epsilon)
        return np.maximum(0.0, np.maximum(first, second))


class GdpCurve(TradeoffCurve):
    name: Literal["gdp"] = "gdp"
    mu: float = Field(ge=0.0)

    @property
    def kind(self) -> TradeoffKind:
        return TradeoffKind.Gdp

    def evaluate(self, alpha: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.mu == 0.0:
            return 1.0 - alpha
        beta = np.where(alpha <= 0.0, 1.0, 0.0)
        interior = (alpha > 0.0) & (alpha < 1.0)
        # Φ⁻¹(1 − α) is taken as −Φ⁻¹(α) to keep precision for small α
        upper_quantile = -np.asarray(std_normal_quantile(alpha[interior]))
        beta[interior] = std_normal_cdf(upper_quantile - self.mu)
        return beta


class PiecewiseCurve(TradeoffCurve):
    """
    Piecewise-linear trade-off curve through `(alphas[i], betas[i])`.

    The first knot sits at alpha = 0 and the last at alpha = 1; alphas are strictly increasing
    and betas nonincreasing.
    """

    name: Literal["piecewise"] = "piecewise"
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    @model_validator(mode="after")
    def _check_knots(self) -> "PiecewiseCurve":
        alphas = np.asarray(self.alphas)
        betas = np.asarray(self.betas)
        if alphas.size < 2 or alphas.size != betas.size:
            raise TradeoffDomainError(
                "[INVALID PIECEWISE CURVE] need at least two knots and matching alpha/beta lengths"
            )
        if alphas[0] != 0.0 or alphas[-1] != 1.0 or (np.diff(alphas) <= 0.0).any():
            raise TradeoffDomainError(
                "[INVALID PIECEWISE CURVE] alphas must increase strictly from 0 to 1"
            )
        if (betas < 0.0).any() or (betas > 1.0).any() or (np.diff(betas) > 1e-12).any():
            raise TradeoffDomainError(
                "[INVALID PIECEWISE CURVE] betas must lie in [0, 1] and be nonincreasing"
            )
        return self

    @classmethod
    def from_arrays(cls, alphas: ArrayLike, betas: ArrayLike) -> "PiecewiseCurve":
        return cls(
            alphas=tuple(float(a) for a in np.asarray(alphas, dtype=np.float64)),
            betas=tuple(float(b) for b in np.asarray(betas, dtype=np.float64)),
        )

    @property
    def kind(self) -> TradeoffKind:
        return TradeoffKind.Piecewise

    def evaluate(self, alpha: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.interp(alpha, np.asarray(self.alphas), np.asarray(self.betas))


def tradeoff_eps_delta(epsilon: float, delta: float) -> EpsDeltaCurve:
    return EpsDeltaCurve(epsilon=epsilon, delta=delta)


def tradeoff_gdp(mu: float) -> GdpCurve:
    return GdpCurve(mu=mu)
