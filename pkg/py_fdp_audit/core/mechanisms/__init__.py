from py_fdp_audit.core.mechanisms.observation_set import ObservationPair, ObservationSet, World
from py_fdp_audit.core.mechanisms.simulators import (
    SimulationConfigurationError,
    simulate_gaussian_pair,
    simulate_randomized_response,
    simulate_subsampled_gaussian_pair,
)

__all__ = [
    "ObservationPair",
    "ObservationSet",
    "SimulationConfigurationError",
    "World",
    "simulate_gaussian_pair",
    "simulate_randomized_response",
    "simulate_subsampled_gaussian_pair",
]
