from py_fdp_audit.core.attack.optimal_threshold import (
    ThresholdBracketError,
    ThresholdDomainError,
    gdp_plugin_threshold_invariance,
    max_eps_lower_analytic,
    optimal_threshold_dp,
    plugin_log_ratio,
)
from py_fdp_audit.core.attack.thresholding import (
    MAX_THRESHOLDS,
    ObservationSizeMismatchError,
    RateCurve,
    ThresholdDecision,
    ThresholdPolicy,
    candidate_thresholds,
    compute_error_counts,
    holdout_split,
    sweep_thresholds,
)

__all__ = [
    "MAX_THRESHOLDS",
    "ObservationSizeMismatchError",
    "RateCurve",
    "ThresholdBracketError",
    "ThresholdDecision",
    "ThresholdDomainError",
    "ThresholdPolicy",
    "candidate_thresholds",
    "compute_error_counts",
    "gdp_plugin_threshold_invariance",
    "holdout_split",
    "max_eps_lower_analytic",
    "optimal_threshold_dp",
    "plugin_log_ratio",
    "sweep_thresholds",
]
