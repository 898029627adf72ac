from enum import Enum

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict

from py_fdp_audit.commons.rng import derive_generator
from py_fdp_audit.core.dpsgd.models import DTYPE, Architecture, TinyModel

DEFAULT_PADDING_FEATURES = 4


class TaskKind(str, Enum):
    Logistic = "logistic"
    Mlp = "mlp"


class Task(BaseModel):
    """
    A synthetic classification dataset. The last `padding_features` input columns are all
    zero, so first-layer weights attached to them never receive a data gradient.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    features: torch.Tensor
    labels: torch.Tensor
    num_classes: int
    padding_features: int
    architecture: Architecture

    @property
    def size(self) -> int:
        return int(self.features.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.features.shape[1])

    def build_model(self, hidden: int = 16) -> TinyModel:
        return TinyModel(self.architecture, self.input_dim, self.num_classes, hidden=hidden)


def _pad(features: np.ndarray, padding_features: int) -> torch.Tensor:
    padded = np.hstack([features, np.zeros((features.shape[0], padding_features))])
    return torch.from_numpy(padded).to(DTYPE)


def make_gaussian_task(
    n: int = 2000, dim: int = 20, padding_features: int = DEFAULT_PADDING_FEATURES, seed: int = 0
) -> Task:
    """Two balanced classes drawn from unit-variance Gaussians whose means differ along every coordinate."""
    rng = derive_generator(seed, 0)
    labels = np.arange(n) % 2
    means = np.where(labels[:, None] == 1, 1.0, -1.0) / np.sqrt(dim)
    features = means + rng.standard_normal((n, dim))
    return Task(
        name="gaussian",
        features=_pad(features, padding_features),
        labels=torch.from_numpy(labels).long(),
        num_classes=2,
        padding_features=padding_features,
        architecture=Architecture.Logistic,
    )


def make_spiral_task(
    n: int = 2000, classes: int = 3, noise: float = 0.2, padding_features: int = DEFAULT_PADDING_FEATURES, seed: int = 0
) -> Task:
    rng = derive_generator(seed, 0)
    labels = np.arange(n) % classes
    radius = rng.random(n)
    angle = labels * (2.0 * np.pi / classes) + 4.0 * radius + noise * rng.standard_normal(n)
    features = np.column_stack([radius * np.sin(angle), radius * np.cos(angle)])
    return Task(
        name="spiral",
        features=_pad(features, padding_features),
        labels=torch.from_numpy(labels).long(),
        num_classes=classes,
        padding_features=padding_features,
        architecture=Architecture.Mlp,
    )


def make_task(kind: TaskKind, seed: int = 0, padding_features: int = DEFAULT_PADDING_FEATURES) -> Task:
    match kind:
        case TaskKind.Logistic:
            return make_gaussian_task(padding_features=padding_features, seed=seed)
        case TaskKind.Mlp:
            return make_spiral_task(padding_features=padding_features, seed=seed)
