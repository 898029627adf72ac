import math

from py_fdp_audit.core.tradeoff.tradeoff_curve import PrivacyPoint, TradeoffDomainError

REGION_TOLERANCE = 1e-12


def privacy_region_contains(epsilon: float, delta: float, point: PrivacyPoint) -> bool:
    """
    Membership of an attack's (alpha, beta) in the (epsilon, delta)-DP privacy region.

    The region is cut out by four half-planes; it is symmetric under swapping alpha and beta.
    Boundary points count as inside.
    """
    if epsilon < 0.0 or not 0.0 <= delta <= 1.0:
        raise TradeoffDomainError(
            f"[REGION DOMAIN ERROR] invalid parameters epsilon={epsilon}, delta={delta}"
        )
    e_eps = math.exp(epsilon)
    alpha, beta = point.alpha, point.beta
    lower = 1.0 - delta - REGION_TOLERANCE
    upper = e_eps + delta + REGION_TOLERANCE
    return (
        alpha + e_eps * beta >= lower
        and e_eps * alpha + beta >= lower
        and alpha + e_eps * beta <= upper
        and e_eps * alpha + beta <= upper
    )
