from py_fdp_audit.core.tradeoff.accountant_approximation import (
    TradeoffCombiner,
    approx_tradeoff_from_accountant,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import (
    gdp_delta_of_eps,
    gdp_eps_of_delta,
    gdp_mu_of_eps,
)
from py_fdp_audit.core.tradeoff.privacy_region import privacy_region_contains
from py_fdp_audit.core.tradeoff.tradeoff_curve import (
    EpsDeltaCurve,
    GdpCurve,
    PiecewiseCurve,
    PrivacyPoint,
    TradeoffCurve,
    TradeoffDomainError,
    TradeoffKind,
    tradeoff_eps_delta,
    tradeoff_gdp,
)

__all__ = [
    "EpsDeltaCurve",
    "GdpCurve",
    "PiecewiseCurve",
    "PrivacyPoint",
    "TradeoffCombiner",
    "TradeoffCurve",
    "TradeoffDomainError",
    "TradeoffKind",
    "approx_tradeoff_from_accountant",
    "gdp_delta_of_eps",
    "gdp_eps_of_delta",
    "gdp_mu_of_eps",
    "privacy_region_contains",
    "tradeoff_eps_delta",
    "tradeoff_gdp",
]
