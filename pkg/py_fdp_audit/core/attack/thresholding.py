import math
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from py_fdp_audit.commons.rng import derive_generator
from py_fdp_audit.core.estimators.error_counts import ErrorCounts

MAX_THRESHOLDS = 10_001


class ObservationSizeMismatchError(ValueError): ...


class ThresholdPolicy(str, Enum):
    Midpoints = "midpoints"
    Interquartile = "interquartile"
    Grid = "grid"


class ThresholdDecision(BaseModel):
    """Predict D′ when the score is strictly above `z`; ties count as D."""

    model_config = ConfigDict(frozen=True)

    z: float = Field(allow_inf_nan=False)
    direction: str = "greater"


def _sorted_pair(
    scores_d: ArrayLike, scores_dprime: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    d = np.sort(np.asarray(scores_d, dtype=np.float64))
    dprime = np.sort(np.asarray(scores_dprime, dtype=np.float64))
    if d.size != dprime.size or d.size == 0:
        raise ObservationSizeMismatchError(
            f"[OBSERVATION SIZE MISMATCH] both worlds need the same nonzero number of scores, got {d.size} and {dprime.size}"
        )
    return d, dprime


def _count_sorted(
    sorted_d: NDArray[np.float64], sorted_dprime: NDArray[np.float64], thresholds: ArrayLike
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    z = np.asarray(thresholds, dtype=np.float64)
    fp = sorted_d.size - np.searchsorted(sorted_d, z, side="right")
    fn = np.searchsorted(sorted_dprime, z, side="right")
    return fp.astype(np.int64), fn.astype(np.int64)


def compute_error_counts(scores_d: ArrayLike, scores_dprime: ArrayLike, z: float) -> ErrorCounts:
    d, dprime = _sorted_pair(scores_d, scores_dprime)
    fp, fn = _count_sorted(d, dprime, z)
    return ErrorCounts(fp=int(fp), fn=int(fn), n=d.size)


def _cap(thresholds: NDArray[np.float64]) -> NDArray[np.float64]:
    if thresholds.size <= MAX_THRESHOLDS:
        return thresholds
    keep = np.unique(np.round(np.linspace(0, thresholds.size - 1, MAX_THRESHOLDS)).astype(np.int64))
    logger.debug(f"[THRESHOLD GRID CAPPED] {thresholds.size} candidates subsampled to {keep.size}")
    return thresholds[keep]


def candidate_thresholds(
    scores_d: ArrayLike,
    scores_dprime: ArrayLike,
    policy: ThresholdPolicy = ThresholdPolicy.Midpoints,
    grid: Optional[Sequence[float]] = None,
) -> NDArray[np.float64]:
    """
    Thresholds a sweep evaluates, in increasing order.

    `Midpoints` uses the midpoints between adjacent distinct pooled scores plus ±inf, so the
    trivial corners are included; `Interquartile` keeps the central half of that grid;
    `Grid` takes an explicit list.
    """
    match policy:
        case ThresholdPolicy.Grid:
            if not grid:
                raise ValueError("[THRESHOLD GRID MISSING] the grid policy needs an explicit list of thresholds")
            return _cap(np.unique(np.asarray(grid, dtype=np.float64)))
        case ThresholdPolicy.Midpoints | ThresholdPolicy.Interquartile:
            pooled = np.unique(np.concatenate([np.asarray(scores_d, float), np.asarray(scores_dprime, float)]))
            midpoints = 0.5 * (pooled[:-1] + pooled[1:])
            if policy is ThresholdPolicy.Interquartile:
                if midpoints.size == 0:
                    return np.asarray(pooled[:1])
                low, high = midpoints.size // 4, max(3 * midpoints.size // 4, midpoints.size // 4 + 1)
                return _cap(midpoints[low:high])
            return _cap(np.concatenate([[-math.inf], midpoints, [math.inf]]))


class RateCurve(BaseModel):
    """Error counts of a threshold attack along increasing thresholds: α nonincreasing, β nondecreasing."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    thresholds: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    n: int = Field(ge=1)

    @property
    def alphas(self) -> NDArray[np.float64]:
        return self.fp / self.n

    @property
    def betas(self) -> NDArray[np.float64]:
        return self.fn / self.n

    def __len__(self) -> int:
        return int(self.thresholds.size)

    def counts_at(self, index: int) -> ErrorCounts:
        return ErrorCounts(fp=int(self.fp[index]), fn=int(self.fn[index]), n=self.n)

    def to_csv_rows(self) -> list[tuple[str, str, str]]:
        return [
            (format(float(z), ".17g"), format(float(a), ".17g"), format(float(b), ".17g"))
            for z, a, b in zip(self.thresholds, self.alphas, self.betas)
        ]


def sweep_thresholds(
    scores_d: ArrayLike,
    scores_dprime: ArrayLike,
    policy: ThresholdPolicy = ThresholdPolicy.Midpoints,
    grid: Optional[Sequence[float]] = None,
) -> RateCurve:
    d, dprime = _sorted_pair(scores_d, scores_dprime)
    thresholds = candidate_thresholds(d, dprime, policy, grid)
    fp, fn = _count_sorted(d, dprime, thresholds)
    return RateCurve(thresholds=thresholds, fp=fp, fn=fn, n=d.size)


def holdout_split(
    scores_d: ArrayLike, scores_dprime: ArrayLike, fraction: float, seed: int
) -> tuple[tuple[NDArray[np.float64], NDArray[np.float64]], tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """
    Splits both worlds into a threshold-selection part (`fraction` of the trials) and a
    disjoint audit part, after a seeded shuffle.
    """
    d = np.asarray(scores_d, dtype=np.float64)
    dprime = np.asarray(scores_dprime, dtype=np.float64)
    _sorted_pair(d, dprime)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"[HOLDOUT FRACTION ERROR] fraction must lie in (0, 1), got {fraction}")
    selected = int(round(fraction * d.size))
    if not 1 <= selected <= d.size - 1:
        raise ObservationSizeMismatchError(
            f"[HOLDOUT TOO SMALL] {d.size} trials per world cannot be split with fraction {fraction}"
        )
    d = derive_generator(seed, 2).permutation(d)
    dprime = derive_generator(seed, 3).permutation(dprime)
    return (d[:selected], dprime[:selected]), (d[selected:], dprime[selected:])
