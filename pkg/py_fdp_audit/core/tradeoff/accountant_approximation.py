from enum import Enum
from typing import Callable

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from py_fdp_audit.core.tradeoff.tradeoff_curve import (
    ALPHA_GRID_SIZE,
    PiecewiseCurve,
    TradeoffDomainError,
)

EpsOfDelta = Callable[[float], float]

# keeps e^ε finite when an accountant reports an unbounded loss
MAX_SUPPORTING_EPSILON = 700.0


class TradeoffCombiner(str, Enum):
    """
    How the family of supporting (ε̂, δ′) curves is merged into one trade-off curve.

    `Min` takes the pointwise minimum, the looser combination. `Max` takes the pointwise
    maximum, which is still a valid lower bound since every supporting curve is one, and is
    the one to audit with.
    """

    Min = "min"
    Max = "max"


def supporting_curves(
    epsilons: NDArray[np.float64],
    deltas: NDArray[np.float64],
    alphas: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Rows are f_{ε̂_i, δ′_i} evaluated on `alphas`."""
    e_eps = np.exp(epsilons)[:, None]
    d = deltas[:, None]
    x = alphas[None, :]
    first = 1.0 - d - x * e_eps
    second = (1.0 - d - x) / e_eps
    return np.maximum(0.0, np.maximum(first, second))


def approx_tradeoff_from_accountant(
    eps_of_delta: EpsOfDelta,
    n: int,
    delta: float,
    combiner: TradeoffCombiner = TradeoffCombiner.Min,
    grid_size: int = ALPHA_GRID_SIZE,
) -> PiecewiseCurve:
    """
    Lower-bounds a mechanism's trade-off function from its (ε, δ) accountant.

    The accountant is queried at `n` evenly spaced δ′ in [delta, 1 − delta]; each answer
    defines a supporting curve f_{ε̂, δ′}, and the supporting curves are merged by `combiner`
    on a uniform alpha grid. Accountant errors propagate.
    """
    if n < 2:
        raise TradeoffDomainError(f"[APPROXIMATION DOMAIN ERROR] need n >= 2 supporting curves, got {n}")
    if not 0.0 < delta < 0.5:
        raise TradeoffDomainError(f"[APPROXIMATION DOMAIN ERROR] delta must lie in (0, 0.5), got {delta}")

    delta_primes = np.linspace(delta, 1.0 - delta, n)
    epsilons = np.array([eps_of_delta(float(d)) for d in delta_primes], dtype=np.float64)
    if (epsilons > MAX_SUPPORTING_EPSILON).any():
        logger.debug(
            f"[SUPPORTING CURVE CAPPED] {int((epsilons > MAX_SUPPORTING_EPSILON).sum())} accountant answers capped at epsilon={MAX_SUPPORTING_EPSILON}"
        )
    epsilons = np.clip(epsilons, 0.0, MAX_SUPPORTING_EPSILON)

    alphas = np.linspace(0.0, 1.0, grid_size)
    curves = supporting_curves(epsilons, delta_primes, alphas)
    match combiner:
        case TradeoffCombiner.Min:
            betas = curves.min(axis=0)
        case TradeoffCombiner.Max:
            betas = curves.max(axis=0)
    betas[-1] = 0.0
    return PiecewiseCurve.from_arrays(alphas, np.minimum.accumulate(betas))
