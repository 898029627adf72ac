from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import torch
from loguru import logger
from torch import Tensor

from py_fdp_audit.commons.rng import derive_torch_seed
from py_fdp_audit.core.dpsgd.clipping import ContributionRecorder, clip_rows, clip_vector
from py_fdp_audit.core.dpsgd.config import BugKind, DpSgdConfig
from py_fdp_audit.core.dpsgd.models import DTYPE

Aggregate = Callable[[Tensor, float, Optional[ContributionRecorder]], Tensor]

# root-seed path of the noise seed pool
NOISE_POOL_STREAM = 99


def clipped_sum(grads: Tensor, clip: float, recorder: Optional[ContributionRecorder]) -> Tensor:
    contributions = clip_rows(grads, clip)
    if recorder is not None:
        recorder.record(contributions)
    return contributions.sum(dim=0)


def clip_after_average_sum(grads: Tensor, clip: float, recorder: Optional[ContributionRecorder]) -> Tensor:
    """|B| · clip_C(mean of raw gradients): every example is scaled by one shared factor."""
    if grads.shape[0] == 0:
        return grads.sum(dim=0)
    mean = grads.mean(dim=0)
    norm = float(torch.linalg.vector_norm(mean))
    factor = 1.0 if norm <= clip else clip / norm
    contributions = grads * factor
    if recorder is not None:
        recorder.record(contributions)
    return grads.shape[0] * clip_vector(mean, clip)


class NoiseSource(ABC):
    def __init__(self, stddev: float) -> None:
        self.stddev = stddev

    @abstractmethod
    def sample(self, size: int, generator: torch.Generator) -> Tensor: ...


class GaussianNoise(NoiseSource):
    def sample(self, size: int, generator: torch.Generator) -> Tensor:
        return self.stddev * torch.randn(size, generator=generator, dtype=DTYPE)


class SeedPoolNoise(NoiseSource):
    """Gaussian noise whose generator is re-seeded from a small fixed pool before every draw."""

    def __init__(self, stddev: float, pool: list[int]) -> None:
        super().__init__(stddev)
        self.pool = pool

    def sample(self, size: int, generator: torch.Generator) -> Tensor:
        choice = int(torch.randint(len(self.pool), (1,), generator=generator))
        pooled = torch.Generator().manual_seed(self.pool[choice])
        return self.stddev * torch.randn(size, generator=pooled, dtype=DTYPE)


@dataclass(frozen=True)
class TrainerVariant:
    name: str
    aggregate: Aggregate
    noise: NoiseSource


def inject_bug(cfg: DpSgdConfig) -> TrainerVariant:
    stddev = cfg.noise_multiplier * cfg.clip
    match cfg.bug.kind:
        case BugKind.Nothing:
            return TrainerVariant("correct", clipped_sum, GaussianNoise(stddev))
        case BugKind.ClipAfterAverage:
            logger.warning("[BUG INJECTED] per-example clipping replaced by clipping the batch average")
            return TrainerVariant(BugKind.ClipAfterAverage.value, clip_after_average_sum, GaussianNoise(stddev))
        case BugKind.BiasedNoise:
            logger.warning(f"[BUG INJECTED] noise drawn from a pool of {cfg.bug.seeds} seeds")
            pool = [derive_torch_seed(cfg.seed, NOISE_POOL_STREAM, index) for index in range(cfg.bug.seeds)]
            return TrainerVariant(BugKind.BiasedNoise.value, clipped_sum, SeedPoolNoise(stddev, pool))
        case BugKind.NoiseScale:
            logger.warning(
                f"[BUG INJECTED] noise multiplier {cfg.noise_multiplier} used while {cfg.sigma} is claimed"
            )
            return TrainerVariant(BugKind.NoiseScale.value, clipped_sum, GaussianNoise(stddev))
