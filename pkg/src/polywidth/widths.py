"""Kolmogorov k-widths with per-k certificates.

d_k(X) = min over (n-k)-dimensional ranges H of rad(P_H(X)). Structured
families (ellipsoids, balls) are exact; polytopes get certified upper bounds
from multi-restart subspace search, with a dense-Grassmannian oracle as the
small-dimension reference. Any evaluated subspace is a valid certificate:
value = rad(P_H(X)) >= d_k(X).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bodies
from .errors import ResourceGuardError, UnsupportedVariantError
from .numerics import SeedSpec, Subspace, _canonical_signs, orthonormalize

__all__ = [
    "METHODS",
    "ORACLE_DIM_GUARD",
    "SearchBudget",
    "WidthEstimate",
    "WidthProfile",
    "projected_radius",
    "kolmogorov_width",
    "width_profile",
    "refine_subspace",
]

METHODS = ("ellipsoid-spectral", "vertex-search", "coordinate-only", "grassmann-oracle")
ORACLE_DIM_GUARD = 4
_EXACT_METHODS = ("ellipsoid-spectral", "grassmann-oracle")


@dataclass(frozen=True)
class SearchBudget:
    """Knobs for the subspace optimizers; defaults converge on all n <= 8 test bodies."""

    restarts: int = 32
    iters: int = 200
    step0: float = 0.5
    decay: float = 0.7
    oracle_candidates: int = 10**6
    oracle_chunk: int = 20000
    refine_top: int = 4
    workers: int | None = None

    def scaled(self, **kw) -> "SearchBudget":
        return replace(self, **kw)


@dataclass
class WidthEstimate:
    k: int
    value: float
    certificate: Subspace
    exact: bool
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class WidthProfile:
    """The chain d_0 >= d_1 >= ... >= d_n = 0 with certificates."""

    estimates: list[WidthEstimate]

    def __post_init__(self):
        vals = self.values
        if np.any(np.diff(vals) > 1e-12):
            raise ValueError("width profile must be non-increasing")
        if abs(vals[-1]) > 1e-12:
            raise ValueError("d_n must be zero")

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    def __getitem__(self, k: int) -> WidthEstimate:
        return self.estimates[k]

    def __len__(self) -> int:
        return len(self.estimates)


# ---------------------------------------------------------------------------
# exact evaluation of rad(P_H(X))
# ---------------------------------------------------------------------------

def projected_radius(body: bodies.Body, sub: Subspace) -> float:
    """rad of the orthogonal projection of the body onto span(sub)."""
    if sub.ambient_dim != body.dim:
        raise ValueError("subspace ambient dimension does not match body")
    if sub.dim == 0:
        return 0.0
    B = sub.basis
    cloud = bodies.extreme_cloud(body)
    if cloud is not None:
        return float(np.sqrt(np.max(np.einsum("vd,vd->v", cloud @ B, cloud @ B))))
    if isinstance(body, bodies.Ellipsoid):
        quad = B.T @ np.linalg.solve(body.shape, B)
        return float(np.sqrt(np.linalg.eigvalsh(quad)[-1]))
    if isinstance(body, bodies.EuclideanBall):
        return float(body.radius)
    if isinstance(body, bodies.LpBall):
        q = bodies._conjugate(body.p)
        return body.radius * _max_lq_on_span(B, q)
    raise UnsupportedVariantError(f"projected radius not implemented for {type(body).__name__}")


def _max_lq_on_span(B: np.ndarray, q: float, iters: int = 200) -> float:
    """max ||u||_q over unit u in span(B); closed form at q in {2, inf}, ascent otherwise."""
    if q == 2:
        return 1.0
    if np.isinf(q):
        return float(np.max(np.linalg.norm(B, axis=1)))
    n, d = B.shape
    starts = [B[:, j] for j in range(d)]
    proj_rows = B @ (B.T @ np.eye(n))
    starts += [proj_rows[:, i] for i in range(n)]
    starts.append(B @ B.T @ np.ones(n))
    best = 0.0
    for u0 in starts:
        nrm = np.linalg.norm(u0)
        if nrm < 1e-14:
            continue
        u = u0 / nrm
        val = float(np.sum(np.abs(u) ** q) ** (1.0 / q))
        for _ in range(iters):
            g = np.sign(u) * np.abs(u) ** (q - 1.0)
            g = B @ (B.T @ g)
            nrm = np.linalg.norm(g)
            if nrm < 1e-14:
                break
            u_new = g / nrm
            val_new = float(np.sum(np.abs(u_new) ** q) ** (1.0 / q))
            if val_new <= val + 1e-14:
                break
            u, val = u_new, val_new
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# subspace optimizers
# ---------------------------------------------------------------------------

def refine_subspace(
    eval_fn,
    n: int,
    dim: int,
    seed: SeedSpec,
    budget: SearchBudget,
    starts: list[np.ndarray] | None = None,
    maximize: bool = False,
):
    """Multi-restart local search over (n, dim) orthonormal bases.

    Each restart perturbs the basis by a Gaussian of shrinking step (decay on
    failure, per spec'd optimizer contract) and accepts on improvement. The
    reduction is arg-best by (value, restart index), so results are identical
    for any worker count. Returns (value, basis).
    """
    sign = -1.0 if maximize else 1.0
    start_list = [np.asarray(s, dtype=float) for s in (starts or [])]

    def run(idx_and_basis):
        idx, basis0 = idx_and_basis
        rng = seed.child(idx).generator()
        if basis0 is None:
            basis = orthonormalize(rng.standard_normal((n, dim))).basis
            while basis.shape[1] < dim:  # essentially impossible, but stay safe
                basis = orthonormalize(rng.standard_normal((n, dim))).basis
        else:
            basis = basis0
        val = sign * eval_fn(basis)
        step = budget.step0
        for _ in range(budget.iters):
            cand = orthonormalize(basis + step * rng.standard_normal((n, dim))).basis
            if cand.shape[1] != dim:
                step *= budget.decay
                continue
            cval = sign * eval_fn(cand)
            if cval < val:
                basis, val = cand, cval
            else:
                step *= budget.decay
                if step < 1e-10:
                    break
        return val, basis

    tasks = [(i, start_list[i] if i < len(start_list) else None) for i in range(len(start_list) + budget.restarts)]
    if budget.workers and budget.workers > 1:
        with ThreadPoolExecutor(max_workers=budget.workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    best_idx = min(range(len(results)), key=lambda i: (results[i][0], i))
    val, basis = results[best_idx]
    return sign * val, _canonical_signs(basis)


def _batched_orthonormalize(G: np.ndarray) -> np.ndarray:
    """Vectorized modified Gram-Schmidt over a (C, n, d) stack."""
    Q = G.copy()
    d = G.shape[2]
    for j in range(d):
        v = Q[:, :, j]
        for i in range(j):
            u = Q[:, :, i]
            v -= np.einsum("cn,cn->c", u, v)[:, None] * u
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        nrm[nrm < 1e-12] = 1.0
        v /= nrm
    return Q


def _dense_scan(batch_eval, n: int, dim: int, seed: SeedSpec, budget: SearchBudget, maximize: bool):
    """Dense random search; returns the top candidates as (value, basis) pairs."""
    rng = seed.child(10**6).generator()
    sign = -1.0 if maximize else 1.0
    top: list[tuple[float, np.ndarray]] = []
    remaining = budget.oracle_candidates
    while remaining > 0:
        c = min(budget.oracle_chunk, remaining)
        remaining -= c
        Q = _batched_orthonormalize(rng.standard_normal((c, n, dim)))
        vals = sign * batch_eval(Q)
        keep = np.argsort(vals)[: budget.refine_top]
        top.extend((float(vals[i]), Q[i]) for i in keep)
        top.sort(key=lambda t: t[0])
        top = top[: budget.refine_top]
    return [(sign * v, b) for v, b in top]


def _batch_eval_for(body: bodies.Body, cloud: np.ndarray | None):
    if cloud is not None:
        def ev(Q):
            T = np.matmul(cloud[None, :, :], Q)
            return np.sqrt(np.einsum("cvd,cvd->cv", T, T).max(axis=1))
        return ev
    if isinstance(body, bodies.Ellipsoid):
        S = body.axes * body.semi_axes  # M^{-1/2} columns scaled: S S' = M^{-1}
        def ev(Q):
            T = np.matmul(S.T[None, :, :], Q)
            G = np.einsum("cnd,cne->cde", T, T)
            return np.sqrt(np.linalg.eigvalsh(G)[:, -1])
        return ev
    if isinstance(body, bodies.EuclideanBall):
        r = body.radius
        return lambda Q: np.full(Q.shape[0], r)
    raise UnsupportedVariantError(f"grassmann-oracle not implemented for {type(body).__name__}")


# ---------------------------------------------------------------------------
# width estimation
# ---------------------------------------------------------------------------

def _trivial_estimate(body: bodies.Body, k: int, method: str) -> WidthEstimate | None:
    n = body.dim
    if k == n:
        return WidthEstimate(k, 0.0, Subspace.empty(n), method in _EXACT_METHODS, method)
    if k == 0:
        return WidthEstimate(k, bodies.radius(body), Subspace.full(n), method in _EXACT_METHODS, method)
    return None


def _rank_shortcut(body: bodies.Body, k: int, cloud: np.ndarray, method: str) -> WidthEstimate | None:
    """d_k = 0 exactly once k reaches the essential rank of the body."""
    n = body.dim
    span = orthonormalize(cloud.T)
    if k >= span.dim:
        comp = span.complement()
        cert = Subspace(comp.basis[:, : n - k])
        return WidthEstimate(k, 0.0, cert, method in _EXACT_METHODS, method)
    return None


def kolmogorov_width(
    body: bodies.Body,
    k: int,
    method: str = "vertex-search",
    budget: SearchBudget | None = None,
    seed: SeedSpec | None = None,
    _cloud: np.ndarray | None = None,
) -> WidthEstimate:
    """Estimate d_k(X) with a certificate subspace of dimension n - k.

    ellipsoid-spectral and grassmann-oracle are flagged exact; the search
    methods return certified upper bounds (any H certifies d_k <= rad(P_H X)).
    """
    n = body.dim
    if not 0 <= k <= n:
        raise ValueError(f"k = {k} out of range [0, {n}]")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    budget = budget or SearchBudget()
    seed = seed or SeedSpec(0)

    trivial = _trivial_estimate(body, k, method)
    if trivial is not None:
        return trivial

    if method == "ellipsoid-spectral":
        if not isinstance(body, bodies.Ellipsoid):
            raise UnsupportedVariantError("ellipsoid-spectral requires an Ellipsoid")
        cert = Subspace(_canonical_signs(body.axes[:, k:]))
        return WidthEstimate(k, float(body.semi_axes[k]), cert, True, method)

    if method == "coordinate-only":
        best_val, best_sub = np.inf, None
        for combo in itertools.combinations(range(n), n - k):
            sub = Subspace.coordinate(n, combo)
            val = projected_radius(body, sub)
            if val < best_val - 1e-15:
                best_val, best_sub = val, sub
        return WidthEstimate(k, best_val, best_sub, False, method)

    cloud = _cloud if _cloud is not None else bodies.extreme_cloud(body)

    if method == "vertex-search":
        if cloud is None:
            raise UnsupportedVariantError(
                f"vertex-search requires an enumerable extreme-point cloud; got {type(body).__name__}"
            )
        short = _rank_shortcut(body, k, cloud, method)
        if short is not None:
            return short

        def ev(B):
            T = cloud @ B
            return float(np.sqrt(np.max(np.einsum("vd,vd->v", T, T))))

        val, basis = refine_subspace(ev, n, n - k, seed.child(k), budget)
        cert = Subspace(basis)
        return WidthEstimate(k, projected_radius(body, cert), cert, False, method)

    # grassmann-oracle
    if n > ORACLE_DIM_GUARD:
        raise ResourceGuardError("oracle-dim", f"n = {n} exceeds grassmann-oracle guard {ORACLE_DIM_GUARD}")
    if cloud is not None:
        short = _rank_shortcut(body, k, cloud, method)
        if short is not None:
            return short
    batch_ev = _batch_eval_for(body, cloud)
    tops = _dense_scan(batch_ev, n, n - k, seed.child(k), budget, maximize=False)
    starts = [b for _, b in tops]

    def ev1(B):
        return float(batch_ev(B[None, :, :])[0])

    refine_budget = budget.scaled(restarts=0, iters=max(budget.iters, 300))
    best_val, best_basis = np.inf, None
    for i, st in enumerate(starts):
        val, basis = refine_subspace(ev1, n, n - k, seed.child(k, i), refine_budget, starts=[st])
        if val < best_val:
            best_val, best_basis = val, basis
    cert = Subspace(best_basis)
    return WidthEstimate(k, projected_radius(body, cert), cert, True, method)


def _profile_method_for(body: bodies.Body, method: str | None) -> str:
    if method is not None:
        return method
    if isinstance(body, bodies.Ellipsoid):
        return "ellipsoid-spectral"
    if isinstance(body, (bodies.EuclideanBall, bodies.LpBall)):
        return "coordinate-only"
    return "vertex-search"


def _drop_principal_direction(body: bodies.Body, prev: WidthEstimate) -> Subspace:
    """Shrink the previous certificate by its worst principal direction (nested, so monotone)."""
    B = prev.certificate.basis
    cloud = bodies.extreme_cloud(body)
    if cloud is not None:
        T = cloud @ B
        worst = cloud[int(np.argmax(np.einsum("vd,vd->v", T, T)))]
        u = B @ (B.T @ worst)
    elif isinstance(body, bodies.Ellipsoid):
        quad = B.T @ np.linalg.solve(body.shape, B)
        w = np.linalg.eigh(quad)[1][:, -1]
        u = B @ w
    else:
        u = B[:, 0]
    u = u / np.linalg.norm(u)
    reduced = B - np.outer(u, u @ B)
    sub = orthonormalize(reduced)
    return Subspace(sub.basis[:, : B.shape[1] - 1])


def width_profile(
    body: bodies.Body,
    method: str | None = None,
    budget: SearchBudget | None = None,
    seed: SeedSpec | None = None,
) -> WidthProfile:
    """Per-k estimates for k = 0..n with the monotone chain enforced.

    If a heuristic value exceeds the k-1 value, the k-1 certificate is reused
    with its largest principal direction dropped; nested certificates can only
    shrink the projected radius, so the chain stays a valid upper bound.
    """
    method = _profile_method_for(body, method)
    budget = budget or SearchBudget()
    seed = seed or SeedSpec(0)
    n = body.dim
    cloud = bodies.extreme_cloud(body) if method in ("vertex-search", "grassmann-oracle") else None
    estimates: list[WidthEstimate] = []
    for k in range(n + 1):
        est = kolmogorov_width(body, k, method, budget, seed, _cloud=cloud)
        if k >= 1 and est.value > estimates[-1].value + 1e-15:
            cert = _drop_principal_direction(body, estimates[-1])
            est = WidthEstimate(k, projected_radius(body, cert), cert, False, method)
        if k >= 1 and est.value > estimates[-1].value:
            est = WidthEstimate(k, estimates[-1].value, est.certificate, est.exact, method)
        estimates.append(est)
    return WidthProfile(estimates)
