"""The explicit constant chain behind the risk certificates.

The packing/net tradeoff curve g(a) = (1/4) a^-2 (1 - (log2(3) + 3/2)/log2(a))
comes from plugging |N| <= 3^k and |M| >= a^k into the Fano bound; its
maximizer a = 12.89 yields the certificate constant C = 2.46e-4. The duality
and approximation-radius constants c1, c2 feed the optimality-ratio bound
M(c*) = 12/(C c*^2) max(c1^2/c2^2, 1).
"""

from __future__ import annotations

import math

from scipy.optimize import minimize_scalar

__all__ = [
    "PACKING_RATE_A",
    "RISK_CONSTANT_C",
    "DUALITY_C1",
    "RATIO_BOUND_CAP",
    "packing_tradeoff",
    "derive_packing_constants",
    "approx_radius_c2",
    "ratio_bound_constant",
]

# Pinned values used by certificates (re-derived by derive_packing_constants).
PACKING_RATE_A = 12.89
RISK_CONSTANT_C = 2.46e-4
DUALITY_C1 = 2.0 / (math.sqrt(2.0) - 1.0)  # = 4.8284...
RATIO_BOUND_CAP = 2e8  # cross-check: M(0.2) stays below this


def packing_tradeoff(a: float) -> float:
    """(1/4) a^-2 (1 - (log2 3 + 3/2) / log2 a), for a > 1."""
    if a <= 1:
        raise ValueError("a must exceed 1")
    return 0.25 * a**-2 * (1.0 - (math.log2(3.0) + 1.5) / math.log2(a))


def derive_packing_constants() -> tuple[float, float]:
    """Maximize the tradeoff curve over a > 1; returns (a*, C*).

    a* = 12.891 and C* = 2.46091e-4, matching the pinned constants to their
    printed precision.
    """
    res = minimize_scalar(
        lambda t: -packing_tradeoff(math.exp(t)),
        bounds=(math.log(2.0), math.log(1e3)),
        method="bounded",
        options={"xatol": 1e-13},
    )
    a_star = math.exp(res.x)
    return a_star, packing_tradeoff(a_star)


def approx_radius_c2(c_star: float) -> float:
    """c2 = 0.4 sqrt(ln(1/(2 c*))), valid for 0 < c* <= 0.2."""
    if not 0 < c_star <= 0.2:
        raise ValueError("c_star must lie in (0, 0.2]")
    return 0.4 * math.sqrt(math.log(1.0 / (2.0 * c_star)))


def ratio_bound_constant(c_star: float, C: float = RISK_CONSTANT_C) -> float:
    """M(c*) = 12/(C c*^2) max(c1^2/c2^2, 1)."""
    c2 = approx_radius_c2(c_star)
    return 12.0 / (C * c_star**2) * max(DUALITY_C1**2 / c2**2, 1.0)
