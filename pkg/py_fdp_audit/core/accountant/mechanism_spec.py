from pydantic import BaseModel, ConfigDict, Field


class MechanismSpec(BaseModel):
    """
    Parameters of the audited (sub-sampled) Gaussian mechanism.

    Attributes:
        sigma: noise multiplier, the noise standard deviation per unit of sensitivity.
        q: Poisson sampling rate of the record whose privacy is audited.
        steps: number of self-compositions T.
        sensitivity: the sensitivity c; in DP-SGD this is the clip norm C.
    """

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(gt=0.0)
    q: float = Field(default=1.0, gt=0.0, le=1.0)
    steps: int = Field(default=1, ge=1)
    sensitivity: float = Field(default=1.0, gt=0.0)

    @property
    def noise_stddev(self) -> float:
        return self.sigma * self.sensitivity
