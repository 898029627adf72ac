from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_NOISE_SEED_POOL = 100


class InvalidTrainerConfigurationError(ValueError): ...


class BugKind(str, Enum):
    Nothing = "none"
    ClipAfterAverage = "clip-after-avg"
    BiasedNoise = "biased-noise"
    NoiseScale = "noise-scale"


class BugSpec(BaseModel):
    """
    An implementation bug injected into the trainer.

    `seeds` is the size of the noise seed pool for `biased-noise`; `actual_sigma` is the
    noise multiplier actually used by `noise-scale` while accounting still claims the
    configured one.
    """

    model_config = ConfigDict(frozen=True)

    kind: BugKind = BugKind.Nothing
    seeds: int = Field(default=DEFAULT_NOISE_SEED_POOL, ge=1)
    actual_sigma: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _check_parameters(self) -> "BugSpec":
        if self.kind is BugKind.NoiseScale and self.actual_sigma is None:
            raise ValueError("[INVALID BUG SPEC] noise-scale needs the actual noise multiplier")
        return self

    @classmethod
    def parse(cls, text: str) -> "BugSpec":
        """Reads `none`, `clip-after-avg`, `biased-noise[:k]` or `noise-scale:s`."""
        name, _, argument = text.strip().partition(":")
        match name:
            case "none" | "":
                return cls()
            case "clip-after-avg" | "clip-after-average":
                return cls(kind=BugKind.ClipAfterAverage)
            case "biased-noise":
                return cls(kind=BugKind.BiasedNoise, seeds=int(argument) if argument else DEFAULT_NOISE_SEED_POOL)
            case "noise-scale":
                if not argument:
                    raise InvalidTrainerConfigurationError("[INVALID BUG SPEC] noise-scale needs a value, e.g. noise-scale:0.5")
                return cls(kind=BugKind.NoiseScale, actual_sigma=float(argument))
            case _:
                raise InvalidTrainerConfigurationError(f"[UNKNOWN BUG] {text!r}")


class CanaryInjection(str, Enum):
    """
    Where the canary enters the privatised gradient of the D′ world.

    `PostNoise` adds the clipped canary after noising; `PreAggregation` adds it to the batch
    before clipping and aggregation, so it travels the same (possibly buggy) path as data.
    """

    PostNoise = "post-noise"
    PreAggregation = "pre-aggregation"


class DpSgdConfig(BaseModel):
    """
    DP-SGD run parameters. `sigma` is the noise multiplier; the trainer adds noise with
    standard deviation sigma * clip.
    """

    model_config = ConfigDict(frozen=True)

    q: float = Field(default=0.01, gt=0.0, le=1.0)
    eta: float = Field(default=0.05, gt=0.0)
    sigma: float = Field(default=1.0, gt=0.0)
    clip: float = Field(default=1.0, gt=0.0)
    steps: int = Field(default=1000, ge=1)
    qc: float = Field(default=1.0, gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    bug: BugSpec = BugSpec()
    runs: int = Field(default=1, ge=1)
    window: Optional[tuple[int, int]] = None
    canary_injection: CanaryInjection = CanaryInjection.PostNoise

    @model_validator(mode="after")
    def _check_window(self) -> "DpSgdConfig":
        if self.window is not None:
            start, stop = self.window
            if not 0 <= start < stop <= self.steps:
                raise ValueError(f"[INVALID STEP WINDOW] need 0 <= start < stop <= steps, got {self.window}")
        return self

    @property
    def noise_multiplier(self) -> float:
        if self.bug.kind is BugKind.NoiseScale:
            assert self.bug.actual_sigma is not None
            return self.bug.actual_sigma
        return self.sigma

    def records(self, step: int) -> bool:
        if self.window is None:
            return True
        start, stop = self.window
        return start <= step < stop
