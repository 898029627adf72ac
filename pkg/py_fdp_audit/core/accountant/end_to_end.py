import math

from loguru import logger

from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import (
    DEFAULT_LOSS_BOUND,
    DEFAULT_SPACING,
    pld_build,
    pld_eps_of_delta,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_eps_of_delta


def steps_to_end_eps(
    mu_step: float,
    steps: int,
    q: float,
    delta: float,
    spacing: float = DEFAULT_SPACING,
    loss_bound: float = DEFAULT_LOSS_BOUND,
) -> float:
    """
    Extrapolates a per-step audit (μ̂_step-GDP) to the end-to-end ε of `steps` compositions.

    The result is an estimate, not a bound: it assumes every step leaks exactly as much as the
    audited one. Without sub-sampling GDP composes in closed form; otherwise the step is read
    as a Gaussian mechanism with noise multiplier 1/μ̂_step and sampling rate `q`, then
    composed through the numerical accountant.
    """
    if mu_step < 0.0 or steps < 1 or not 0.0 < q <= 1.0:
        raise ValueError(
            f"[END TO END DOMAIN ERROR] invalid mu_step={mu_step}, steps={steps}, q={q}"
        )
    if mu_step == 0.0:
        return 0.0
    if q == 1.0:
        eps = gdp_eps_of_delta(math.sqrt(steps) * mu_step, delta)
    else:
        spec = MechanismSpec(sigma=1.0 / mu_step, q=q, steps=steps)
        eps = pld_eps_of_delta(pld_build(spec, spacing, loss_bound), delta)
    logger.info(
        f"[END TO END ESTIMATE] mu_step={mu_step:.4f}, steps={steps}, q={q} -> epsilon~{eps:.4f} (estimate, not a bound)"
    )
    return eps
