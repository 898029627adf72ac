import math

from py_fdp_audit.core.estimators.clopper_pearson import check_gamma
from py_fdp_audit.core.estimators.error_counts import ErrorCounts
from py_fdp_audit.core.numerics.special_functions import std_normal_quantile

ZERO_CELL_CORRECTION = 0.5


def eps_lower_katz(counts: ErrorCounts, gamma: float) -> float:
    """
    Katz-log lower confidence limit on ln(TPR / FPR), clamped at 0.

    A baseline for pure ε-DP only (δ = 0). When any cell of the 2×2 table is empty, 0.5 is
    added to the numerators and denominators of both rate estimates.
    """
    check_gamma(gamma)
    n = counts.n
    corr = ZERO_CELL_CORRECTION if 0 in (counts.tp, counts.fn, counts.fp, counts.tn) else 0.0
    p1 = (counts.tp + corr) / (n + corr)
    p0 = (counts.fp + corr) / (n + corr)
    z = float(std_normal_quantile(1.0 - gamma))
    spread = math.sqrt((1.0 - p1) / (n * p1) + (1.0 - p0) / (n * p0))
    return max(math.log(p1 / p0) - z * spread, 0.0)
