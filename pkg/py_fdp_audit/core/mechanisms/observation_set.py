from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, field_validator

from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec


class World(str, Enum):
    D = "D"
    Dprime = "Dprime"

    @property
    def label(self) -> int:
        return 0 if self is World.D else 1


class ObservationSet(BaseModel):
    """Scores an adversary collected in one world, with the seed and mechanism that produced them."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    world: World
    scores: np.ndarray
    seed: int
    spec: Optional[MechanismSpec] = None

    @field_validator("scores", mode="before")
    @classmethod
    def _as_finite_array(cls, value: object) -> NDArray[np.float64]:
        scores = np.asarray(value, dtype=np.float64)
        if scores.ndim != 1:
            raise ValueError(f"[OBSERVATION SHAPE ERROR] scores must be one-dimensional, got shape {scores.shape}")
        if not np.isfinite(scores).all():
            raise ValueError("[OBSERVATION VALUE ERROR] scores must be finite")
        return scores

    @property
    def size(self) -> int:
        return int(self.scores.size)


class ObservationPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    d: ObservationSet
    dprime: ObservationSet

    @classmethod
    def from_arrays(
        cls,
        scores_d: NDArray[np.float64],
        scores_dprime: NDArray[np.float64],
        seed: int = 0,
        spec: Optional[MechanismSpec] = None,
    ) -> "ObservationPair":
        return cls(
            d=ObservationSet(world=World.D, scores=scores_d, seed=seed, spec=spec),
            dprime=ObservationSet(world=World.Dprime, scores=scores_dprime, seed=seed, spec=spec),
        )

    def to_arrays(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.d.scores, self.dprime.scores
