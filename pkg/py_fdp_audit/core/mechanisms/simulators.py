import math

import numpy as np
from loguru import logger

from py_fdp_audit.commons.rng import derive_generator
from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair


class SimulationConfigurationError(ValueError): ...


def _check_count(n: int) -> None:
    if n < 1:
        raise SimulationConfigurationError(f"[SIMULATION SIZE ERROR] n must be >= 1, got {n}")


def simulate_subsampled_gaussian_pair(sigma: float, q: float, n: int, seed: int) -> ObservationPair:
    """
    D scores ~ N(0, σ²); each D′ score is N(1, σ²) with probability q and N(0, σ²) otherwise.

    The two worlds draw from independent child streams of `seed`.
    """
    _check_count(n)
    if sigma <= 0.0 or not 0.0 < q <= 1.0:
        raise SimulationConfigurationError(f"[SIMULATION PARAMETER ERROR] need sigma > 0 and 0 < q <= 1, got sigma={sigma}, q={q}")
    d_rng = derive_generator(seed, 0)
    dprime_rng = derive_generator(seed, 1)
    scores_d = sigma * d_rng.standard_normal(n)
    noise = sigma * dprime_rng.standard_normal(n)
    included = dprime_rng.random(n) < q
    scores_dprime = noise + included.astype(np.float64)
    logger.debug(f"[SIMULATED GAUSSIAN] sigma={sigma}, q={q}, n={n}, seed={seed}")
    return ObservationPair.from_arrays(
        scores_d, scores_dprime, seed=seed, spec=MechanismSpec(sigma=sigma, q=q)
    )


def simulate_gaussian_pair(sigma: float, n: int, seed: int) -> ObservationPair:
    return simulate_subsampled_gaussian_pair(sigma, 1.0, n, seed)


def simulate_randomized_response(epsilon: float, n: int, seed: int) -> ObservationPair:
    """D reports bit 0 and D′ bit 1, each flipped with probability 1/(1 + e^ε); scores are the reported bits."""
    _check_count(n)
    if epsilon < 0.0:
        raise SimulationConfigurationError(f"[SIMULATION PARAMETER ERROR] epsilon must be nonnegative, got {epsilon}")
    flip = 1.0 / (1.0 + math.exp(epsilon))
    flipped_d = derive_generator(seed, 0).random(n) < flip
    flipped_dprime = derive_generator(seed, 1).random(n) < flip
    logger.debug(f"[SIMULATED RANDOMIZED RESPONSE] epsilon={epsilon}, n={n}, seed={seed}")
    return ObservationPair.from_arrays(
        flipped_d.astype(np.float64), (~flipped_dprime).astype(np.float64), seed=seed
    )
