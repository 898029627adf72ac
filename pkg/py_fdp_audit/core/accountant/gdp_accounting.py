from typing import Iterable

import numpy as np


class InvalidGdpParameterError(ValueError): ...


def gdp_compose(mus: Iterable[float]) -> float:
    """μ of the composition of μ_i-GDP mechanisms: sqrt(sum μ_i²)."""
    values = np.asarray(list(mus), dtype=np.float64)
    if (values < 0.0).any() or np.isnan(values).any():
        raise InvalidGdpParameterError(
            f"[GDP COMPOSITION ERROR] every mu must be a nonnegative number, got {values.tolist()}"
        )
    return float(np.sqrt(np.sum(np.square(values))))
