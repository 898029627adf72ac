from enum import Enum
from typing import ClassVar, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from py_fdp_audit.core.attack.thresholding import ThresholdPolicy
from py_fdp_audit.core.auditing.auditor import DEFAULT_THRESHOLD, AuditProtocol, AuditRequest
from py_fdp_audit.core.dpsgd.canaries import CanaryKind, CanaryRefresh
from py_fdp_audit.core.dpsgd.config import CanaryInjection
from py_fdp_audit.core.dpsgd.tasks import DEFAULT_PADDING_FEATURES, TaskKind
from py_fdp_audit.core.estimators.audit_result import AuditMethod


class StageProperties(BaseModel):
    """
    One top-level section of a pipeline config.

    Subclasses set `__key__` to the section name they are loaded from.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    __key__: ClassVar[str] = ""

    @classmethod
    def get_key(cls) -> str:
        if not cls.__key__:
            raise ValueError(f"[SECTION NOT SET] {cls.__name__} does not name its config section")
        return cls.__key__

    @classmethod
    def get_name(cls) -> str:
        return cls.__name__


class PipelineProperties(StageProperties):
    __key__ = "pipeline"

    name: str = "pipeline"
    seed: int = Field(default=0, ge=0)
    repeats: int = Field(default=1, ge=1)
    jobs: int = Field(default=1, ge=1)
    keep_observations: bool = True


class MechanismKind(str, Enum):
    Gaussian = "gaussian"
    SubsampledGaussian = "subsampled"
    RandomizedResponse = "rr"


# long spellings accepted in config files
MECHANISM_ALIASES = {
    "subsampled-gaussian": MechanismKind.SubsampledGaussian,
    "randomized-response": MechanismKind.RandomizedResponse,
}


class SimulateProperties(StageProperties):
    """
    Closed-form mechanism simulation. Noise is given either directly (`sigmas`) or as the
    theoretical epsilons at `delta` it should match; every listed value is crossed with every
    size in `sizes`.
    """

    __key__ = "simulate"

    mechanism: MechanismKind = MechanismKind.Gaussian
    sigmas: list[float] = Field(default_factory=list)
    epsilons: list[float] = Field(default_factory=list)
    delta: float = Field(default=1e-5, gt=0.0, lt=1.0)
    q: float = Field(default=1.0, gt=0.0, le=1.0)
    sizes: list[int] = Field(default_factory=lambda: [1000], min_length=1)

    @field_validator("mechanism", mode="before")
    @classmethod
    def _expand_alias(cls, value: object) -> object:
        return MECHANISM_ALIASES.get(value, value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def _check_noise(self) -> "SimulateProperties":
        if bool(self.sigmas) == bool(self.epsilons):
            raise ValueError("[INVALID SIMULATE SECTION] set exactly one of sigmas or epsilons")
        if self.mechanism is MechanismKind.RandomizedResponse and not self.epsilons:
            raise ValueError("[INVALID SIMULATE SECTION] rr (randomized-response) is parameterised by epsilons")
        if any(size < 1 for size in self.sizes):
            raise ValueError(f"[INVALID SIMULATE SECTION] sizes must be >= 1, got {self.sizes}")
        return self


class TrainMode(str, Enum):
    Whitebox = "whitebox"
    Blackbox = "blackbox"


class TrainProperties(StageProperties):
    """
    DP-SGD runs on a synthetic task. With `true_epsilons` set, one cell is trained per value
    under a noise-scale bug whose actual noise multiplier has that per-step epsilon at `delta`,
    while `sigma` stays the claimed one.
    """

    __key__ = "train"

    task: TaskKind = TaskKind.Logistic
    mode: TrainMode = TrainMode.Whitebox
    padding_features: int = Field(default=DEFAULT_PADDING_FEATURES, ge=0)
    hidden: int = Field(default=16, ge=1)
    q: float = Field(default=0.01, gt=0.0, le=1.0)
    eta: float = Field(default=0.05, gt=0.0)
    sigma: float = Field(default=1.0, gt=0.0)
    clip: float = Field(default=1.0, gt=0.0)
    steps: int = Field(default=1000, ge=1)
    qc: float = Field(default=1.0, gt=0.0, le=1.0)
    runs: int = Field(default=1, ge=1)
    window: Optional[tuple[int, int]] = None
    bug: str = "none"
    true_epsilons: list[float] = Field(default_factory=list)
    delta: float = Field(default=1e-5, gt=0.0, lt=1.0)
    canary: CanaryKind = CanaryKind.Dirac
    canary_refresh: CanaryRefresh = CanaryRefresh.Static
    canary_scale: float = Field(default=1.0, gt=0.0)
    canary_injection: CanaryInjection = CanaryInjection.PostNoise


class SweepProperties(StageProperties):
    __key__ = "sweep"

    policy: ThresholdPolicy = ThresholdPolicy.Midpoints
    grid: list[float] = Field(default_factory=list)


class AuditProperties(StageProperties):
    __key__ = "audit"

    methods: list[AuditMethod] = Field(default_factory=lambda: [AuditMethod.FDP_CP], min_length=1)
    delta: float = Field(default=1e-5, ge=0.0, lt=1.0)
    gamma: float = Field(default=0.05, gt=0.0, lt=1.0)
    protocol: AuditProtocol = AuditProtocol.Fixed
    threshold: float = DEFAULT_THRESHOLD
    threshold_policy: ThresholdPolicy = ThresholdPolicy.Midpoints
    threshold_grid: list[float] = Field(default_factory=list)
    holdout_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    q: float = Field(default=1.0, gt=0.0, le=1.0)
    steps: int = Field(default=1, ge=1)

    def request(self, method: AuditMethod, seed: int) -> AuditRequest:
        # the Katz interval only bounds pure epsilon
        return AuditRequest(
            method=method,
            delta=0.0 if method is AuditMethod.KATZ else self.delta,
            gamma=self.gamma,
            protocol=self.protocol,
            threshold=self.threshold,
            threshold_policy=self.threshold_policy,
            threshold_grid=tuple(self.threshold_grid),
            holdout_fraction=self.holdout_fraction,
            q=self.q,
            steps=self.steps,
            seed=seed,
        )


class ComposeProperties(StageProperties):
    __key__ = "compose"

    steps: int = Field(ge=1)
    q: float = Field(default=1.0, gt=0.0, le=1.0)
    delta: float = Field(default=1e-5, gt=0.0, lt=1.0)


class VerifyProperties(StageProperties):
    __key__ = "verify"

    claimed_eps: float = Field(ge=0.0)
    method: Optional[AuditMethod] = None


ALL_STAGE_PROPERTIES: tuple[type[StageProperties], ...] = (
    PipelineProperties,
    SimulateProperties,
    TrainProperties,
    SweepProperties,
    AuditProperties,
    ComposeProperties,
    VerifyProperties,
)
