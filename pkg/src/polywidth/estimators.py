"""Truncated series estimators and their risk.

The estimator projects the observation y = x + w onto a rank-k subspace; its
worst-case mean squared error splits exactly into worst squared bias plus
k sigma^2, and the best rank is read off a width profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bodies
from .errors import UnsupportedVariantError
from .numerics import SeedSpec, Subspace
from .widths import WidthProfile, projected_radius

__all__ = [
    "EstimationInstance",
    "TruncatedEstimator",
    "build_truncated",
    "apply_estimator",
    "projection_risk",
    "monte_carlo_risk",
    "lipschitz_polytope",
    "segment_minimax_risk",
]

MC_CHUNK = 1024  # fixed accumulation chunk so results are worker-count independent


@dataclass
class EstimationInstance:
    """A body, a noise level, and optionally the true signal."""

    body: bodies.Body
    sigma: float
    truth: np.ndarray | None = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.truth is not None:
            t = np.asarray(self.truth, dtype=float)
            if not bodies.membership(self.body, t, tol=1e-9):
                raise ValueError("truth vector is not a member of the body")
            self.truth = t


@dataclass
class TruncatedEstimator:
    k: int
    range: Subspace
    bias_sq: float
    variance: float
    risk_bound: float

    def __post_init__(self):
        if abs(self.risk_bound - (self.bias_sq + self.variance)) > 1e-12 * max(1.0, self.risk_bound):
            raise ValueError("risk_bound must equal bias_sq + variance")


def build_truncated(body: bodies.Body, sigma: float, profile: WidthProfile) -> TruncatedEstimator:
    """Pick k minimizing profile[k]^2 + k sigma^2 (ties to the smallest k)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    n = body.dim
    if len(profile) != n + 1:
        raise ValueError(f"profile must cover k = 0..{n}")
    risks = profile.values**2 + np.arange(n + 1) * sigma**2
    k = int(np.argmin(risks))  # argmin takes the first of equal minima
    est = profile[k]
    rng_sub = est.certificate.complement()
    return TruncatedEstimator(
        k=k,
        range=rng_sub,
        bias_sq=float(est.value**2),
        variance=float(k * sigma**2),
        risk_bound=float(risks[k]),
    )


def apply_estimator(est: TruncatedEstimator, y: np.ndarray) -> np.ndarray:
    """Orthogonal projection of the observation onto the estimator's range."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != est.range.ambient_dim:
        raise ValueError("observation dimension does not match estimator")
    return est.range.project(y)


def projection_risk(body: bodies.Body, range_sub: Subspace, sigma: float):
    """Exact max-MSE of the projection estimator onto ``range_sub``.

    Returns (worst_bias_sq, variance, total) with worst_bias_sq the exact
    maximum of ||(I-P)x||^2 over the body (vertex/spectral closed forms).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if range_sub.ambient_dim != body.dim:
        raise ValueError("subspace ambient dimension does not match body")
    comp = range_sub.complement()
    if isinstance(body, bodies.LpBall) and body.p not in (1.0, 2.0) and not np.isinf(body.p):
        raise UnsupportedVariantError(
            "exact worst-case bias unavailable for general lp balls; use monte_carlo_risk"
        )
    worst = projected_radius(body, comp)
    k = range_sub.dim
    variance = k * sigma**2
    return float(worst**2), float(variance), float(worst**2 + variance)


def monte_carlo_risk(
    est: TruncatedEstimator,
    instance: EstimationInstance,
    trials: int,
    seed: SeedSpec,
):
    """Simulated mean of ||x - P(x + w)||^2 with a 95% normal half-width.

    Trials accumulate in fixed 1024-trial chunks with per-chunk derived
    streams, so the result is reproducible for any worker count.
    """
    if instance.truth is None:
        raise ValueError("instance.truth is required for monte_carlo_risk")
    if trials < 100:
        raise ValueError("trials must be >= 100")
    x = instance.truth
    sigma = instance.sigma
    bias_vec = x - est.range.project(x)
    B = est.range.basis
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_idx = 0
    while done < trials:
        c = min(MC_CHUNK, trials - done)
        rng = seed.child(chunk_idx).generator()
        w = sigma * rng.standard_normal((c, x.size))
        pw = (w @ B) @ B.T
        errs = np.sum((bias_vec - pw) ** 2, axis=1)
        total += float(errs.sum())
        total_sq += float((errs**2).sum())
        done += c
        chunk_idx += 1
    mean = total / trials
    var = max(total_sq / trials - mean**2, 0.0)
    half = 1.959963984540054 * np.sqrt(var / trials)
    return float(mean), float(half)


def lipschitz_polytope(t: np.ndarray, L: float, bound: float | None = None) -> bodies.PolytopeH:
    """Feasible set of values of an L-Lipschitz function at sample points t.

    Rows encode |x_{i+1} - x_i| <= L (t_{i+1} - t_i); one extra row |x_1| <=
    bound makes the body bounded (without it rank(A) = n - 1). Default bound
    is 10 L (t_n - t_1).
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t must be a vector of length >= 2")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t must be strictly increasing")
    if L <= 0:
        raise ValueError("L must be positive")
    if bound is None:
        bound = 10.0 * L * (t[-1] - t[0])
    if bound <= 0:
        raise ValueError("bound must be positive")
    n = t.size
    A = np.zeros((n, n))
    for i in range(n - 1):
        scale = 1.0 / (L * (t[i + 1] - t[i]))
        A[i, i + 1] = scale
        A[i, i] = -scale
    A[n - 1, 0] = 1.0 / bound
    return bodies.PolytopeH(A, np.inf)


def segment_minimax_risk(rad: float, sigma: float) -> float:
    """Minimax risk of a symmetric segment of radius ``rad``: s^2 r^2/(s^2 + r^2)."""
    if rad <= 0 or sigma <= 0:
        raise ValueError("rad and sigma must be positive")
    return float(sigma**2 * rad**2 / (sigma**2 + rad**2))
