import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import cachetools
import numpy as np
from cachetools.keys import hashkey
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.signal import fftconvolve

from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.numerics.special_functions import (
    FloatOrArray,
    as_float_or_array,
    std_normal_cdf,
)

DEFAULT_SPACING = 1e-4
DEFAULT_LOSS_BOUND = 30.0
NEGLIGIBLE_TAIL_MASS = 1e-15


class PldResolutionError(Exception): ...


class NeighborDirection(str, Enum):
    """
    `Remove`: losses of the with-record mixture (1−q)N(0,σ²) + qN(1,σ²) against N(0,σ²).
    `Add`: losses of N(0,σ²) against the mixture.
    """

    Remove = "remove"
    Add = "add"


@dataclass(frozen=True, eq=False)
class PrivacyLossDistribution:
    """
    Discretised privacy loss distribution for one neighbouring direction.

    `masses[i]` is the probability of the loss value `(lower_index + i) * spacing`;
    `infinity_mass` is the atom at +inf that absorbs every truncated upper tail. Losses are
    always rounded up to the grid, so every epsilon/delta answered here is pessimistic.
    """

    lower_index: int
    masses: NDArray[np.float64] = field(repr=False)
    infinity_mass: float
    spacing: float = DEFAULT_SPACING
    loss_bound: float = DEFAULT_LOSS_BOUND

    @property
    def losses(self) -> NDArray[np.float64]:
        return (self.lower_index + np.arange(self.masses.size)) * self.spacing

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum() + self.infinity_mass)

    def compose(self, other: "PrivacyLossDistribution") -> "PrivacyLossDistribution":
        if self.spacing != other.spacing or self.loss_bound != other.loss_bound:
            raise PldResolutionError(
                "[PLD GRID MISMATCH] cannot compose distributions discretised on different grids"
            )
        masses = fftconvolve(self.masses, other.masses)
        infinity_mass = 1.0 - (1.0 - self.infinity_mass) * (1.0 - other.infinity_mass)
        return truncate_distribution(
            self.lower_index + other.lower_index,
            masses,
            infinity_mass,
            self.spacing,
            self.loss_bound,
        )

    def self_compose(self, count: int) -> "PrivacyLossDistribution":
        if count < 1:
            raise PldResolutionError(f"[PLD COMPOSITION ERROR] count must be >= 1, got {count}")
        result: PrivacyLossDistribution | None = None
        base = self
        while count:
            if count & 1:
                result = base if result is None else result.compose(base)
            count >>= 1
            if count:
                base = base.compose(base)
        assert result is not None
        return result

    @cached_property
    def _suffix_sums(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        # entry k sums bins k.. end; a trailing zero stands for the empty suffix
        weighted = self.masses * np.exp(-self.losses)
        mass_suffix = np.append(np.cumsum(self.masses[::-1])[::-1], 0.0)
        weighted_suffix = np.append(np.cumsum(weighted[::-1])[::-1], 0.0)
        return mass_suffix, weighted_suffix

    @cached_property
    def _delta_at_losses(self) -> NDArray[np.float64]:
        mass_suffix, weighted_suffix = self._suffix_sums
        delta = (
            self.infinity_mass
            + mass_suffix[1:]
            - np.exp(self.losses) * weighted_suffix[1:]
        )
        # running max from the right keeps the table nonincreasing and errs upward
        return np.maximum.accumulate(np.maximum(delta, 0.0)[::-1])[::-1]

    def delta_for_epsilon(self, epsilon: ArrayLike) -> FloatOrArray:
        eps = np.asarray(epsilon, dtype=np.float64)
        mass_suffix, weighted_suffix = self._suffix_sums
        first_above = np.searchsorted(self.losses, eps, side="right")
        delta = (
            self.infinity_mass
            + mass_suffix[first_above]
            - np.exp(eps) * weighted_suffix[first_above]
        )
        return as_float_or_array(np.clip(delta, self.infinity_mass, 1.0))

    def epsilon_for_delta(self, delta: ArrayLike) -> FloatOrArray:
        target = np.asarray(delta, dtype=np.float64)
        if (target < self.infinity_mass).any():
            raise PldResolutionError(
                f"[PLD RESOLUTION ERROR] delta={delta} is below the truncated mass {self.infinity_mass:.3e}; "
                f"raise the loss bound (currently {self.loss_bound})"
            )
        mass_suffix, weighted_suffix = self._suffix_sums
        losses = self.losses
        # first grid loss at which the hockey-stick divergence has dropped to the target
        k = np.searchsorted(-self._delta_at_losses, -target, side="left")
        numerator = self.infinity_mass + mass_suffix[k] - target
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = np.log(numerator / weighted_suffix[k])
        interval_low = np.where(k > 0, losses[np.maximum(k - 1, 0)], -np.inf)
        eps = np.where(numerator > 0.0, eps, interval_low)
        eps = np.clip(eps, interval_low, losses[np.minimum(k, losses.size - 1)])
        return as_float_or_array(np.maximum(eps, 0.0))


def truncate_distribution(
    lower_index: int,
    masses: NDArray[np.float64],
    infinity_mass: float,
    spacing: float,
    loss_bound: float,
) -> PrivacyLossDistribution:
    """
    Restricts a distribution to the loss window [-loss_bound, loss_bound].

    Mass above the window and negligible upper tails go to the +inf atom; mass below the
    window and negligible lower tails move up into the lowest kept bin.
    """
    masses = np.clip(np.asarray(masses, dtype=np.float64), 0.0, None)
    max_index = int(round(loss_bound / spacing))

    upper_index = lower_index + masses.size - 1
    if upper_index > max_index:
        keep = max(max_index - lower_index + 1, 0)
        infinity_mass += float(masses[keep:].sum())
        masses = masses[:keep]
    if masses.size == 0:
        return PrivacyLossDistribution(
            max_index, np.zeros(1), min(infinity_mass, 1.0), spacing, loss_bound
        )
    if lower_index < -max_index:
        below = -max_index - lower_index
        head = float(masses[: below + 1].sum())
        masses = masses[below:].copy()
        masses[0] = head
        lower_index = -max_index

    top = np.cumsum(masses[::-1])
    drop_top = min(int(np.searchsorted(top, NEGLIGIBLE_TAIL_MASS, side="right")), masses.size - 1)
    if drop_top > 0:
        infinity_mass += float(top[drop_top - 1])
        masses = masses[: masses.size - drop_top]

    bottom = np.cumsum(masses)
    drop_bottom = min(int(np.searchsorted(bottom, NEGLIGIBLE_TAIL_MASS, side="right")), masses.size - 1)
    if drop_bottom > 0:
        moved = float(bottom[drop_bottom - 1])
        masses = masses[drop_bottom:].copy()
        masses[0] += moved
        lower_index += drop_bottom

    return PrivacyLossDistribution(
        lower_index, masses, min(infinity_mass, 1.0), spacing, loss_bound
    )


def _loss_survival(
    losses: NDArray[np.float64], sigma: float, q: float, direction: NeighborDirection
) -> NDArray[np.float64]:
    """P(L > l) for the single-step sub-sampled Gaussian with unit shift and noise sigma."""
    variance = sigma * sigma
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        match direction:
            case NeighborDirection.Remove:
                # L > l  <=>  x > x(l), with X drawn from the mixture
                gap = np.expm1(losses) + q
                x = variance * (np.log(gap) - np.log(q)) + 0.5
                tail = (1.0 - q) * np.asarray(std_normal_cdf(np.where(gap > 0, -x / sigma, 0.0))) + q * np.asarray(
                    std_normal_cdf(np.where(gap > 0, (1.0 - x) / sigma, 0.0))
                )
                return np.where(gap > 0.0, tail, 1.0)
            case NeighborDirection.Add:
                # L is decreasing in x; L > l  <=>  x < x(l), with X drawn from N(0, σ²)
                gap = np.expm1(-losses) + q
                x = variance * (np.log(gap) - np.log(q)) + 0.5
                tail = np.asarray(std_normal_cdf(np.where(gap > 0, x / sigma, 0.0)))
                return np.where(gap > 0.0, tail, 0.0)


def single_step_distribution(
    sigma: float,
    q: float,
    direction: NeighborDirection,
    spacing: float = DEFAULT_SPACING,
    loss_bound: float = DEFAULT_LOSS_BOUND,
) -> PrivacyLossDistribution:
    max_index = int(round(loss_bound / spacing))
    losses = np.arange(-max_index, max_index + 1) * spacing
    survival = _loss_survival(losses, sigma, q, direction)
    masses = np.empty_like(survival)
    masses[0] = 1.0 - survival[0]
    masses[1:] = survival[:-1] - survival[1:]
    return truncate_distribution(-max_index, masses, float(survival[-1]), spacing, loss_bound)


@dataclass(frozen=True, eq=False)
class PldAccountant:
    """
    Numerical accountant of a (sub-sampled) Gaussian mechanism composed `spec.steps` times.

    Both neighbouring directions are tracked and every query returns the worse of the two.
    """

    spec: MechanismSpec
    remove: PrivacyLossDistribution
    add: PrivacyLossDistribution

    @property
    def distributions(self) -> tuple[PrivacyLossDistribution, PrivacyLossDistribution]:
        return self.remove, self.add

    def eps_of_delta(self, delta: float) -> float:
        return max(float(pld.epsilon_for_delta(delta)) for pld in self.distributions)

    def delta_of_eps(self, epsilon: float) -> float:
        return max(float(pld.delta_for_epsilon(epsilon)) for pld in self.distributions)


@cachetools.cached(
    cache=cachetools.LRUCache(maxsize=32),
    key=lambda spec, spacing=DEFAULT_SPACING, loss_bound=DEFAULT_LOSS_BOUND: hashkey(
        spec, spacing, loss_bound
    ),
    lock=threading.RLock(),
)
def pld_build(
    spec: MechanismSpec,
    spacing: float = DEFAULT_SPACING,
    loss_bound: float = DEFAULT_LOSS_BOUND,
) -> PldAccountant:
    logger.debug(
        f"[PLD BUILD] sigma={spec.sigma}, q={spec.q}, steps={spec.steps}, spacing={spacing}, loss_bound={loss_bound}"
    )
    composed = {
        direction: single_step_distribution(
            spec.sigma, spec.q, direction, spacing, loss_bound
        ).self_compose(spec.steps)
        for direction in NeighborDirection
    }
    return PldAccountant(
        spec, composed[NeighborDirection.Remove], composed[NeighborDirection.Add]
    )


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise PldResolutionError(f"[DELTA DOMAIN ERROR] delta must lie in (0, 1), got {delta}")


def pld_eps_of_delta(accountant: PldAccountant, delta: float) -> float:
    _check_delta(delta)
    return accountant.eps_of_delta(delta)


def pld_delta_of_eps(accountant: PldAccountant, epsilon: float) -> float:
    if epsilon < 0.0:
        raise PldResolutionError(f"[EPSILON DOMAIN ERROR] epsilon must be nonnegative, got {epsilon}")
    return accountant.delta_of_eps(epsilon)


def pld_eps_curve(
    accountant: PldAccountant, n: int, delta: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(δ′, ε̂) samples at `n` evenly spaced δ′ in [delta, 1 − delta]."""
    _check_delta(delta)
    delta_primes = np.linspace(delta, 1.0 - delta, n)
    epsilons = np.array([accountant.eps_of_delta(float(d)) for d in delta_primes])
    return delta_primes, epsilons
