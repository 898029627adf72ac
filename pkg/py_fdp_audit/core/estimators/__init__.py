from py_fdp_audit.core.estimators.audit_result import AuditMethod, AuditResult
from py_fdp_audit.core.estimators.bayesian import (
    JeffreysPosterior,
    eps_lower_dp_zb,
    mu_lower_gdp_zb,
    posterior_density,
)
from py_fdp_audit.core.estimators.clopper_pearson import (
    EstimatorConfigurationError,
    clopper_pearson_upper,
    eps_lower_dp_cp,
    eps_lower_fdp_cp,
    eps_lower_from_rates,
    mu_lower_from_rates,
    mu_lower_gdp_cp,
    mu_to_eps_lower,
)
from py_fdp_audit.core.estimators.dispatch import estimate
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.estimators.katz import eps_lower_katz
from py_fdp_audit.core.estimators.multistep import sigma_lower_multistep

__all__ = [
    "AuditMethod",
    "AuditResult",
    "ErrorCounts",
    "EstimatorConfigurationError",
    "JeffreysPosterior",
    "clopper_pearson_upper",
    "eps_lower_dp_cp",
    "eps_lower_dp_zb",
    "eps_lower_fdp_cp",
    "eps_lower_from_rates",
    "eps_lower_katz",
    "estimate",
    "mu_lower_from_rates",
    "mu_lower_gdp_cp",
    "mu_lower_gdp_zb",
    "mu_to_eps_lower",
    "posterior_density",
    "sigma_lower_multistep",
]
