from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from torch import Tensor

from py_fdp_audit.commons.rng import derive_torch_seed
from py_fdp_audit.core.dpsgd.bugs import TrainerVariant, inject_bug
from py_fdp_audit.core.dpsgd.canaries import (
    CanarySpec,
    build_canary,
    canary_input,
)
from py_fdp_audit.core.dpsgd.clipping import ContributionRecorder, clip_vector
from py_fdp_audit.core.dpsgd.config import (
    BugKind,
    CanaryInjection,
    DpSgdConfig,
    InvalidTrainerConfigurationError,
)
from py_fdp_audit.core.dpsgd.models import TinyModel
from py_fdp_audit.core.dpsgd.tasks import Task
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair

PROBABILITY_FLOOR = 1e-12


class _Stream:
    """Indices of the per-run random streams; the model trajectory never reads the D′ ones."""

    INIT = 0
    BATCH = 1
    NOISE = 2
    BATCH_PRIME = 3
    NOISE_PRIME = 4
    CANARY_COIN = 5
    CANARY = 6


@dataclass
class WhiteboxRun:
    pair: ObservationPair
    params: list[Tensor] = field(default_factory=list)


def canary_scores_from_probabilities(probabilities: ArrayLike) -> NDArray[np.float64]:
    """log(p / (1 − p)) of the canary label's probability, p clipped away from 0 and 1."""
    p = np.clip(np.asarray(probabilities, dtype=np.float64), PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
    return np.log(p) - np.log1p(-p)


def _generator(seed: int, *path: int) -> torch.Generator:
    return torch.Generator().manual_seed(derive_torch_seed(seed, *path))


class DpSgdTrainer:
    """
    DP-SGD on a tiny model with the auditing hooks of a white-box adversary.

    Each step privatises the gradient sum of a Poisson batch B (which drives the model) and,
    when observations are captured, of an independent batch B′ that receives the canary with
    probability qc. Observations are projections of both privatised sums on the canary
    direction, divided by the clip norm.
    """

    def __init__(
        self,
        model: TinyModel,
        task: Task,
        cfg: DpSgdConfig,
        recorder: Optional[ContributionRecorder] = None,
    ) -> None:
        self.model = model
        self.task = task
        self.cfg = cfg
        self.recorder = recorder
        self.variant: TrainerVariant = inject_bug(cfg)

    def _check_canary(self, canary: CanarySpec) -> None:
        if self.cfg.bug.kind is BugKind.ClipAfterAverage and self.cfg.canary_injection is CanaryInjection.PostNoise:
            raise InvalidTrainerConfigurationError(
                "[INVALID BUG/CANARY COMBINATION] clip-after-avg needs pre-aggregation canary injection; a post-noise canary never reaches the aggregation under test"
            )
        if not canary.kind.is_gradient and canary.scale != 1.0:
            raise InvalidTrainerConfigurationError(
                f"[INVALID BUG/CANARY COMBINATION] scale applies to gradient canaries only, got {canary.kind.value}"
            )

    def _sample_batch(self, size: int, generator: torch.Generator) -> Tensor:
        return torch.nonzero(torch.rand(size, generator=generator) < self.cfg.q).flatten()

    def privatize(
        self,
        theta: Tensor,
        features: Tensor,
        labels: Tensor,
        batch: Tensor,
        noise_generator: torch.Generator,
        extra: Optional[Tensor] = None,
    ) -> Tensor:
        """Clipped (or buggy) gradient sum over `batch`, plus any extra raw rows, plus noise."""
        grads = self.model.per_example_gradients(theta, features[batch], labels[batch])
        if extra is not None:
            grads = torch.cat([grads, extra.unsqueeze(0)])
        total = self.variant.aggregate(grads, self.cfg.clip, self.recorder)
        return total + self.variant.noise.sample(self.model.num_params, noise_generator)

    def train_whitebox(self, canary: CanarySpec, capture: bool = True) -> WhiteboxRun:
        self._check_canary(canary)
        cfg, features, labels = self.cfg, self.task.features, self.task.labels
        observed_d: list[float] = []
        observed_dprime: list[float] = []
        params: list[Tensor] = []
        for run in range(cfg.runs):
            theta = self.model.init_params(_generator(cfg.seed, run, _Stream.INIT))
            batch_gen = _generator(cfg.seed, run, _Stream.BATCH)
            noise_gen = _generator(cfg.seed, run, _Stream.NOISE)
            batch_prime_gen = _generator(cfg.seed, run, _Stream.BATCH_PRIME)
            noise_prime_gen = _generator(cfg.seed, run, _Stream.NOISE_PRIME)
            coin_gen = _generator(cfg.seed, run, _Stream.CANARY_COIN)
            source = build_canary(
                canary, self.model, self.task, cfg.clip, derive_torch_seed(cfg.seed, run, _Stream.CANARY), theta
            ) if capture else None

            for step in range(cfg.steps):
                batch = self._sample_batch(self.task.size, batch_gen)
                noisy = self.privatize(theta, features, labels, batch, noise_gen)
                if source is not None and cfg.records(step):
                    g_canary = source.gradient(step, theta)
                    included = float(torch.rand((), generator=coin_gen)) < cfg.qc
                    pre_aggregation = included and cfg.canary_injection is CanaryInjection.PreAggregation
                    batch_prime = self._sample_batch(self.task.size, batch_prime_gen)
                    noisy_prime = self.privatize(
                        theta, features, labels, batch_prime, noise_prime_gen,
                        extra=g_canary if pre_aggregation else None,
                    )
                    if included and not pre_aggregation:
                        noisy_prime = noisy_prime + clip_vector(g_canary, cfg.clip)
                    norm = float(torch.linalg.vector_norm(g_canary))
                    scale = norm * cfg.clip
                    observed_d.append(float(g_canary @ noisy) / scale if norm > 0.0 else 0.0)
                    observed_dprime.append(float(g_canary @ noisy_prime) / scale if norm > 0.0 else 0.0)
                theta = theta - cfg.eta * noisy
            params.append(theta)
            logger.debug(f"[WHITEBOX RUN] run {run + 1}/{cfg.runs} finished after {cfg.steps} steps")

        pair = ObservationPair.from_arrays(np.asarray(observed_d), np.asarray(observed_dprime), seed=cfg.seed)
        return WhiteboxRun(pair=pair, params=params)

    def train_model(self, features: Tensor, labels: Tensor, *path: int) -> Tensor:
        """One DP-SGD run without observations, seeded by `path` under the config seed."""
        theta = self.model.init_params(_generator(self.cfg.seed, *path, _Stream.INIT))
        batch_gen = _generator(self.cfg.seed, *path, _Stream.BATCH)
        noise_gen = _generator(self.cfg.seed, *path, _Stream.NOISE)
        for _ in range(self.cfg.steps):
            batch = self._sample_batch(features.shape[0], batch_gen)
            theta = theta - self.cfg.eta * self.privatize(theta, features, labels, batch, noise_gen)
        return theta

    def canary_score(self, theta: Tensor, x: Tensor, y: Tensor) -> float:
        probability = float(self.model.predict_proba(theta, x.unsqueeze(0))[0, int(y)])
        return float(canary_scores_from_probabilities(probability))

    def train_blackbox(self, canary: CanarySpec, runs: Optional[int] = None, jobs: int = 1) -> ObservationPair:
        """
        Trains `runs` model pairs, without and with the canary input, and scores the canary on
        each. Runs use derived seeds, so the result does not depend on `jobs`.
        """
        if canary.kind.is_gradient:
            raise InvalidTrainerConfigurationError(
                f"[INVALID BUG/CANARY COMBINATION] black-box audits need an input canary, got {canary.kind.value}"
            )
        total_runs = runs or self.cfg.runs
        initial = self.model.init_params(_generator(self.cfg.seed, _Stream.CANARY, _Stream.INIT))
        x, y = canary_input(canary, self.model, self.task, initial)
        features_prime = torch.cat([self.task.features, x.unsqueeze(0)])
        labels_prime = torch.cat([self.task.labels, y.reshape(1)])

        def one_run(run: int) -> tuple[float, float]:
            theta_d = self.train_model(self.task.features, self.task.labels, run, 0)
            theta_dprime = self.train_model(features_prime, labels_prime, run, 1)
            return self.canary_score(theta_d, x, y), self.canary_score(theta_dprime, x, y)

        with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
            scores = list(pool.map(one_run, range(total_runs)))
        logger.debug(f"[BLACKBOX AUDIT] {total_runs} model pairs trained with {canary.kind.value} canary")
        return ObservationPair.from_arrays(
            np.asarray([d for d, _ in scores]), np.asarray([dp for _, dp in scores]), seed=self.cfg.seed
        )


def train_whitebox(task: Task, cfg: DpSgdConfig, canary: CanarySpec, hidden: int = 16) -> WhiteboxRun:
    return DpSgdTrainer(task.build_model(hidden), task, cfg).train_whitebox(canary)


def train_blackbox(task: Task, cfg: DpSgdConfig, canary: CanarySpec, runs: int, jobs: int = 1) -> ObservationPair:
    return DpSgdTrainer(task.build_model(), task, cfg).train_blackbox(canary, runs=runs, jobs=jobs)
