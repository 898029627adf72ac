from pydantic import BaseModel, ConfigDict, Field, model_validator


class ErrorCounts(BaseModel):
    """
    Errors of a membership attack over `n` trials per world.

    `fp` counts D-world trials flagged as D′ (out of n negatives); `fn` counts D′-world trials
    missed (out of n positives).
    """

    model_config = ConfigDict(frozen=True)

    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    n: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_counts(self) -> "ErrorCounts":
        if self.fp > self.n or self.fn > self.n:
            raise ValueError(
                f"[INVALID ERROR COUNTS] fp={self.fp} and fn={self.fn} must not exceed n={self.n}"
            )
        return self

    @property
    def tp(self) -> int:
        return self.n - self.fn

    @property
    def tn(self) -> int:
        return self.n - self.fp

    @property
    def fpr(self) -> float:
        return self.fp / self.n

    @property
    def fnr(self) -> float:
        return self.fn / self.n
