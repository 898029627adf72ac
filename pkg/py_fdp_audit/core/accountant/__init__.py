from py_fdp_audit.core.accountant.end_to_end import steps_to_end_eps
from py_fdp_audit.core.accountant.gdp_accounting import gdp_compose
from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import (
    PldAccountant,
    PldResolutionError,
    PrivacyLossDistribution,
    pld_build,
    pld_delta_of_eps,
    pld_eps_curve,
    pld_eps_of_delta,
)

__all__ = [
    "MechanismSpec",
    "PldAccountant",
    "PldResolutionError",
    "PrivacyLossDistribution",
    "gdp_compose",
    "pld_build",
    "pld_delta_of_eps",
    "pld_eps_curve",
    "pld_eps_of_delta",
    "steps_to_end_eps",
]
