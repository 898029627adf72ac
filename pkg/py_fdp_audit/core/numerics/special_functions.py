from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

FloatOrArray = Union[float, NDArray[np.float64]]


class NumericDomainError(ValueError): ...


def as_float_or_array(value: NDArray[np.float64]) -> FloatOrArray:
    if value.ndim == 0:
        return float(value)
    return value


def _as_float_array(x: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise NumericDomainError(f"[NAN ARGUMENT] {name} must not contain NaN")
    return arr


def std_normal_cdf(x: ArrayLike) -> FloatOrArray:
    """
    Standard normal CDF Φ(x). Accepts scalars or arrays; ±inf map to 0 and 1.
    """
    arr = _as_float_array(x, "x")
    return as_float_or_array(special.ndtr(arr))


def log_std_normal_cdf(x: ArrayLike) -> FloatOrArray:
    arr = _as_float_array(x, "x")
    return as_float_or_array(special.log_ndtr(arr))


def std_normal_pdf(x: ArrayLike) -> FloatOrArray:
    arr = _as_float_array(x, "x")
    return as_float_or_array(stats.norm.pdf(arr))


def std_normal_quantile(p: ArrayLike) -> FloatOrArray:
    """
    Inverse of the standard normal CDF on the open interval (0, 1).

    Probabilities of exactly 0 or 1 are rejected; clamping is the caller's policy.
    """
    arr = _as_float_array(p, "p")
    if ((arr <= 0.0) | (arr >= 1.0)).any():
        raise NumericDomainError(
            f"[QUANTILE DOMAIN ERROR] p must lie strictly inside (0, 1), got {p}"
        )
    return as_float_or_array(special.ndtri(arr))


def _check_beta_shape(a: ArrayLike, b: ArrayLike) -> None:
    if (np.asarray(a) <= 0).any() or (np.asarray(b) <= 0).any():
        raise NumericDomainError(
            f"[BETA SHAPE ERROR] shape parameters must be positive, got a={a}, b={b}"
        )


def beta_cdf(x: ArrayLike, a: ArrayLike, b: ArrayLike) -> FloatOrArray:
    """Regularized incomplete beta I_x(a, b)."""
    arr = _as_float_array(x, "x")
    if ((arr < 0.0) | (arr > 1.0)).any():
        raise NumericDomainError(f"[BETA CDF DOMAIN ERROR] x must lie in [0, 1], got {x}")
    _check_beta_shape(a, b)
    return as_float_or_array(special.betainc(a, b, arr))


def beta_quantile(p: ArrayLike, a: ArrayLike, b: ArrayLike) -> FloatOrArray:
    """
    Inverse of the regularized incomplete beta in its first argument: x with I_x(a, b) = p.
    p = 0 and p = 1 map to 0 and 1.
    """
    arr = _as_float_array(p, "p")
    if ((arr < 0.0) | (arr > 1.0)).any():
        raise NumericDomainError(f"[BETA QUANTILE DOMAIN ERROR] p must lie in [0, 1], got {p}")
    _check_beta_shape(a, b)
    return as_float_or_array(special.betaincinv(a, b, arr))


def log_diff_exp(log_a: ArrayLike, log_b: ArrayLike) -> FloatOrArray:
    """log(e^a - e^b) for a >= b; returns -inf where a == b."""
    a = np.asarray(log_a, dtype=np.float64)
    b = np.asarray(log_b, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.log1p(-np.exp(b - a))
    out = np.where(np.isneginf(b), a, out)
    return as_float_or_array(np.asarray(out, dtype=np.float64))
