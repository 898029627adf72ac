from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class AuditMethod(str, Enum):
    FDP_CP = "fdp-cp"
    FDP_ZB = "fdp-zb"
    DP_CP = "dp-cp"
    DP_ZB = "dp-zb"
    KATZ = "katz"

    @property
    def is_fdp(self) -> bool:
        return self in (AuditMethod.FDP_CP, AuditMethod.FDP_ZB)


class AuditResult(BaseModel):
    """
    Lower bounds produced by one estimator.

    `mu_lower` is 0 for methods that do not go through a trade-off family; `sigma_lower` is
    set only when the bound came from the multi-step noise-multiplier search.
    """

    model_config = ConfigDict(frozen=True)

    method: AuditMethod
    mu_lower: float = Field(default=0.0, ge=0.0)
    eps_lower: float = Field(ge=0.0)
    delta: float = Field(ge=0.0, le=1.0)
    confidence: float = Field(gt=0.0, lt=1.0)
    sigma_lower: Optional[float] = None
    diagnostics: tuple[str, ...] = ()
