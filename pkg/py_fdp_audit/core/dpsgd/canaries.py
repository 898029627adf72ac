import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Optional

import torch
from pydantic import BaseModel, ConfigDict, Field
from torch import Tensor

from py_fdp_audit.commons.rng import derive_torch_seed
from py_fdp_audit.core.dpsgd.input_canary import craft_input_canary
from py_fdp_audit.core.dpsgd.models import DTYPE, TinyModel
from py_fdp_audit.core.dpsgd.tasks import Task

# root-seed path of the random-gradient canary stream
RANDOM_CANARY_STREAM = 7


class CanaryKind(str, Enum):
    Dirac = "dirac"
    Constant = "constant"
    Random = "random"
    Mislabeled = "mislabeled"
    Blank = "blank"
    Crafted = "crafted"

    @property
    def is_gradient(self) -> bool:
        return self in (CanaryKind.Dirac, CanaryKind.Constant, CanaryKind.Random)


class CanaryRefresh(str, Enum):
    Static = "static"
    PerStep = "per-step"


class CanarySpec(BaseModel):
    """
    The canary the adversary inserts into the D′ world.

    Gradient canaries have raw norm `scale` · C (a correct trainer clips them back to C).
    `coordinate` pins a Dirac canary; by default it sits on a dormant coordinate when the
    model has one. Input canaries start from data point `source_index`; crafted ones are then
    optimised for `craft_steps` steps of size `craft_eta`.
    """

    model_config = ConfigDict(frozen=True)

    kind: CanaryKind = CanaryKind.Dirac
    refresh: CanaryRefresh = CanaryRefresh.Static
    scale: float = Field(default=1.0, gt=0.0)
    coordinate: Optional[int] = Field(default=None, ge=0)
    source_index: int = Field(default=0, ge=0)
    craft_steps: int = Field(default=50, ge=0)
    craft_eta: float = Field(default=0.5, gt=0.0)


class CanarySource(ABC):
    """Yields the raw canary gradient g′ for a training step."""

    @abstractmethod
    def gradient(self, step: int, theta: Tensor) -> Tensor: ...


class FixedGradientCanary(CanarySource):
    def __init__(self, vector: Tensor) -> None:
        self.vector = vector

    def gradient(self, step: int, theta: Tensor) -> Tensor:
        return self.vector


class DiracCanary(CanarySource):
    def __init__(self, size: int, norm: float, coordinates: list[int], refresh: CanaryRefresh) -> None:
        self.size = size
        self.norm = norm
        self.coordinates = coordinates
        self.refresh = refresh

    def coordinate(self, step: int) -> int:
        if self.refresh is CanaryRefresh.PerStep:
            return self.coordinates[step % len(self.coordinates)]
        return self.coordinates[0]

    def gradient(self, step: int, theta: Tensor) -> Tensor:
        vector = torch.zeros(self.size, dtype=DTYPE)
        vector[self.coordinate(step)] = self.norm
        return vector


class RandomGradientCanary(CanarySource):
    def __init__(self, size: int, norm: float, seed: int, refresh: CanaryRefresh) -> None:
        self.size = size
        self.norm = norm
        self.seed = seed
        self.refresh = refresh

    def gradient(self, step: int, theta: Tensor) -> Tensor:
        draw = step if self.refresh is CanaryRefresh.PerStep else 0
        generator = torch.Generator().manual_seed(derive_torch_seed(self.seed, RANDOM_CANARY_STREAM, draw))
        vector = torch.randn(self.size, generator=generator, dtype=DTYPE)
        return vector * (self.norm / float(torch.linalg.vector_norm(vector)))


class InputCanary(CanarySource):
    """An input (x′, y′) whose gradient at the current parameters is the canary."""

    def __init__(self, model: TinyModel, x: Tensor, y: Tensor) -> None:
        self.model = model
        self.x = x
        self.y = y

    def gradient(self, step: int, theta: Tensor) -> Tensor:
        return self.model.example_gradient(theta, self.x, self.y)


def canary_input(spec: CanarySpec, model: TinyModel, task: Task, theta: Tensor) -> tuple[Tensor, Tensor]:
    """(x′, y′) for an input-space canary, crafted against `theta` when requested."""
    index = spec.source_index % task.size
    x, y = task.features[index], task.labels[index]
    match spec.kind:
        case CanaryKind.Mislabeled:
            return x.clone(), (y + 1) % task.num_classes
        case CanaryKind.Blank:
            return torch.zeros_like(x), torch.zeros_like(y)
        case CanaryKind.Crafted:
            return craft_input_canary(
                model, theta, task.features, task.labels, spec.craft_steps, spec.craft_eta, (x, y)
            )
        case _:
            raise ValueError(f"[NOT AN INPUT CANARY] {spec.kind.value} is a gradient canary")


def build_canary(
    spec: CanarySpec, model: TinyModel, task: Task, clip: float, seed: int, theta: Tensor
) -> CanarySource:
    norm = spec.scale * clip
    size = model.num_params
    match spec.kind:
        case CanaryKind.Dirac:
            if spec.coordinate is not None:
                coordinates = [spec.coordinate % size]
            else:
                coordinates = model.dormant_indices(task.padding_features) or list(range(size))
            return DiracCanary(size, norm, coordinates, spec.refresh)
        case CanaryKind.Constant:
            return FixedGradientCanary(torch.full((size,), norm / math.sqrt(size), dtype=DTYPE))
        case CanaryKind.Random:
            return RandomGradientCanary(size, norm, seed, spec.refresh)
        case _:
            x, y = canary_input(spec, model, task, theta)
            return InputCanary(model, x, y)
