"""Centrally symmetric convex-body variants.

Every variant contains the origin in its interior (Segment excepted: it is the
only lower-dimensional variant) and supports membership tests; polytopes with
p = infinity additionally support exact polar duals, projected duals, and
guarded vertex enumeration.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import ResourceGuardError, UnboundedBodyError, UnsupportedVariantError
from .numerics import Subspace

__all__ = [
    "MEMBERSHIP_TOL",
    "VERTEX_DEDUP_TOL",
    "VERTEX_DIM_GUARD",
    "PolytopeH",
    "Ellipsoid",
    "Box",
    "LpBall",
    "EuclideanBall",
    "Segment",
    "VPolytope",
    "Body",
    "membership",
    "contains_points",
    "polar_dual",
    "project_dual",
    "vertices",
    "radius",
    "support_function",
    "extreme_cloud",
    "bounding_halfwidths",
    "random_polytope",
    "body_to_dict",
    "body_from_dict",
    "dumps",
    "loads",
]

MEMBERSHIP_TOL = 1e-12
VERTEX_DEDUP_TOL = 1e-8
VERTEX_DIM_GUARD = 12
# Sign enumeration (m == n parallelotopes, boxes) stays cheap well past the
# general C(m, n) guard.
SIGN_ENUM_GUARD = 18


@dataclass
class PolytopeH:
    """H-representation body {x : ||Ax||_p <= 1} for A of full column rank."""

    A: np.ndarray
    p: float = np.inf

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        m, n = A.shape
        if m < 1 or n < 1:
            raise ValueError("A must be a non-empty (m, n) matrix")
        if self.p < 1:
            raise ValueError("p must satisfy p >= 1")
        if np.linalg.matrix_rank(A) < n:
            raise UnboundedBodyError(f"rank(A) = {np.linalg.matrix_rank(A)} < n = {n}: body unbounded")
        self.A = A

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass
class Ellipsoid:
    """{x : x'Mx <= 1} for symmetric positive definite M; semi-axes cached descending."""

    shape: np.ndarray
    semi_axes: np.ndarray = field(init=False)
    axes: np.ndarray = field(init=False)  # eigenvector columns, matching semi_axes order

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise ValueError("shape matrix must be square")
        if np.linalg.norm(M - M.T) > 1e-9 * max(1.0, np.linalg.norm(M)):
            raise ValueError("shape matrix must be symmetric")
        M = 0.5 * (M + M.T)
        w, v = np.linalg.eigh(M)
        if w[0] <= 0:
            raise ValueError("shape matrix must be positive definite")
        order = np.argsort(w)  # ascending eigenvalue = descending semi-axis
        self.shape = M
        self.semi_axes = w[order] ** -0.5
        self.axes = v[:, order]

    @property
    def dim(self) -> int:
        return self.shape.shape[0]


@dataclass
class Box:
    """Axis-aligned box prod_i [-tau_i, tau_i]."""

    half_widths: np.ndarray

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if tau.ndim != 1 or tau.size < 1 or np.any(tau <= 0):
            raise ValueError("half_widths must be a vector of positive reals")
        self.half_widths = tau

    @property
    def dim(self) -> int:
        return self.half_widths.size


@dataclass
class LpBall:
    """{x in R^n : ||x||_p <= radius}."""

    p: float
    radius: float
    n: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must satisfy p >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def dim(self) -> int:
        return self.n


@dataclass
class EuclideanBall:
    radius: float
    n: int

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def dim(self) -> int:
        return self.n


@dataclass
class Segment:
    """Symmetric segment {t e : |t| <= 1} through the origin."""

    endpoint: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.endpoint, dtype=float))
        if e.ndim != 1 or not np.any(e):
            raise ValueError("endpoint must be a nonzero vector")
        self.endpoint = e

    @property
    def dim(self) -> int:
        return self.endpoint.size


@dataclass
class VPolytope:
    """Symmetric V-representation body conv{+-g_i} for generator rows g_i."""

    generators: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if G.shape[0] < 1 or G.shape[1] < 1:
            raise ValueError("generators must be a non-empty (m, n) matrix")
        self.generators = G

    @property
    def dim(self) -> int:
        return self.generators.shape[1]


Body = PolytopeH | Ellipsoid | Box | LpBall | EuclideanBall | Segment | VPolytope


def _check_dim(body: Body, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != body.dim:
        raise ValueError(f"point dimension {x.shape[-1]} does not match body dimension {body.dim}")
    return x


def _vector_norm(X: np.ndarray, p: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(np.abs(X), axis=-1)
    if p == 1:
        return np.sum(np.abs(X), axis=-1)
    if p == 2:
        return np.linalg.norm(X, axis=-1)
    return np.sum(np.abs(X) ** p, axis=-1) ** (1.0 / p)


def contains_points(body: Body, X: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Vectorized membership for a stack of row vectors; returns a bool array."""
    X = _check_dim(body, np.atleast_2d(np.asarray(X, dtype=float)))
    if isinstance(body, PolytopeH):
        return _vector_norm(X @ body.A.T, body.p) <= 1.0 + tol
    if isinstance(body, Ellipsoid):
        return np.einsum("ij,jk,ik->i", X, body.shape, X) <= 1.0 + tol
    if isinstance(body, Box):
        return np.all(np.abs(X) <= body.half_widths + tol, axis=1)
    if isinstance(body, LpBall):
        return _vector_norm(X, body.p) <= body.radius + tol
    if isinstance(body, EuclideanBall):
        return np.linalg.norm(X, axis=1) <= body.radius + tol
    if isinstance(body, Segment):
        e = body.endpoint
        t = X @ e / (e @ e)
        on_line = np.linalg.norm(X - np.outer(t, e), axis=1) <= tol * max(1.0, np.linalg.norm(e))
        return on_line & (np.abs(t) <= 1.0 + tol)
    if isinstance(body, VPolytope):
        return np.array([_vpolytope_member(body.generators, x, tol) for x in X])
    raise UnsupportedVariantError(f"membership not implemented for {type(body).__name__}")


def membership(body: Body, x: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff ``x`` lies in the body, with boundary tolerance ``tol``."""
    return bool(contains_points(body, np.atleast_2d(_check_dim(body, x)), tol)[0])


def _vpolytope_member(G: np.ndarray, x: np.ndarray, tol: float) -> bool:
    # x in conv{+-g_i}  <=>  min ||c||_1 s.t. G'c = x  is <= 1.
    m = G.shape[0]
    res = linprog(
        c=np.ones(2 * m),
        A_eq=np.hstack([G.T, -G.T]),
        b_eq=x,
        bounds=[(0, None)] * (2 * m),
        method="highs",
    )
    if not res.success:
        return False
    return res.fun <= 1.0 + max(tol, 1e-9)


def support_function(body: Body, u: np.ndarray) -> float:
    """h_X(u) = max_{x in X} <x, u> for the variants with a closed form."""
    u = _check_dim(body, u)
    if isinstance(body, VPolytope):
        return float(np.max(np.abs(body.generators @ u)))
    if isinstance(body, Box):
        return float(np.abs(u) @ body.half_widths)
    if isinstance(body, EuclideanBall):
        return body.radius * float(np.linalg.norm(u))
    if isinstance(body, Ellipsoid):
        return float(np.sqrt(u @ np.linalg.solve(body.shape, u)))
    if isinstance(body, Segment):
        return float(np.abs(body.endpoint @ u))
    if isinstance(body, LpBall):
        q = _conjugate(body.p)
        return body.radius * float(_vector_norm(u[None, :], q)[0])
    if isinstance(body, PolytopeH):
        V = vertices(body)
        return float(np.max(np.abs(V @ u)))
    raise UnsupportedVariantError(f"support function not implemented for {type(body).__name__}")


def _conjugate(p: float) -> float:
    if np.isinf(p):
        return 1.0
    if p == 1:
        return np.inf
    return p / (p - 1.0)


def polar_dual(body: Body) -> Body:
    """The polar dual body.

    H-polytopes with p = infinity dualize exactly to the generator hull
    conv{+-a_i}; balls, boxes, and ellipsoids have closed forms. Other
    variants are unsupported.
    """
    if isinstance(body, PolytopeH):
        if not np.isinf(body.p):
            raise UnsupportedVariantError("polar_dual of PolytopeH requires p = infinity")
        return VPolytope(body.A.copy())
    if isinstance(body, VPolytope):
        return PolytopeH(body.generators.copy(), np.inf)
    if isinstance(body, EuclideanBall):
        return EuclideanBall(1.0 / body.radius, body.n)
    if isinstance(body, Box):
        return VPolytope(np.diag(1.0 / body.half_widths))
    if isinstance(body, Ellipsoid):
        return Ellipsoid(np.linalg.inv(body.shape))
    if isinstance(body, LpBall):
        return LpBall(_conjugate(body.p), 1.0 / body.radius, body.n)
    raise UnsupportedVariantError(f"polar_dual not implemented for {type(body).__name__}")


def project_dual(body: Body, H: Subspace) -> Body:
    """P_H(body dual), expressed in the coordinates of H's basis columns.

    This computes the left side of the projection/section duality directly by
    projecting dual generators; equality with (H cap body) polar is a test
    surface, not an implementation input.
    """
    if H.ambient_dim != body.dim:
        raise ValueError("subspace ambient dimension does not match body")
    if H.dim < 1:
        raise ValueError("subspace must have dim >= 1")
    B = H.basis
    if isinstance(body, PolytopeH):
        if not np.isinf(body.p):
            raise UnsupportedVariantError("project_dual of PolytopeH requires p = infinity")
        return VPolytope(body.A @ B)
    if isinstance(body, EuclideanBall):
        return EuclideanBall(1.0 / body.radius, H.dim)
    if isinstance(body, Box):
        return VPolytope(B / body.half_widths[:, None])
    if isinstance(body, Ellipsoid):
        return Ellipsoid(np.linalg.inv(B.T @ body.shape @ B))
    if isinstance(body, LpBall) and body.p == 1:
        # dual of B_1(r) is the cube of half-width 1/r: enumerate its sign vertices
        n = body.n
        if n > SIGN_ENUM_GUARD:
            raise ResourceGuardError("sign-enumeration", f"n = {n} exceeds guard {SIGN_ENUM_GUARD}")
        signs = _half_sign_matrix(n)
        return VPolytope((signs / body.radius) @ B)
    if isinstance(body, LpBall) and body.p == 2:
        return EuclideanBall(1.0 / body.radius, H.dim)
    raise UnsupportedVariantError(f"project_dual not implemented for {type(body).__name__}")


def _half_sign_matrix(n: int) -> np.ndarray:
    """All sign vectors in {+-1}^n with first coordinate fixed to +1 (one per +- pair)."""
    if n == 1:
        return np.ones((1, 1))
    tail = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
    return np.hstack([np.ones((tail.shape[0], 1)), tail])


def _dedup_rows(V: np.ndarray, tol: float) -> np.ndarray:
    if V.shape[0] <= 1:
        return V
    kept: list[np.ndarray] = []
    for v in V:
        if not any(np.linalg.norm(v - w) <= tol for w in kept):
            kept.append(v)
    return np.array(kept)


def vertices(body: PolytopeH, guard: int = VERTEX_DIM_GUARD) -> np.ndarray:
    """All vertices of {x : ||Ax||_inf <= 1}, as rows.

    Intersects every invertible n-subset of constraint rows at every sign
    pattern, keeps feasible points, and deduplicates at distance 1e-8.
    Guarded at n <= 12; rank deficiency raises UnboundedBodyError (checked at
    construction).
    """
    if not isinstance(body, PolytopeH):
        raise UnsupportedVariantError("vertices requires a PolytopeH")
    if not np.isinf(body.p):
        raise UnsupportedVariantError("vertices requires p = infinity")
    A = body.A
    m, n = A.shape
    if n > guard:
        raise ResourceGuardError("vertex-dim", f"n = {n} exceeds vertex enumeration guard {guard}")
    half = _half_sign_matrix(n)  # (2^(n-1), n)
    candidates = []
    for combo in itertools.combinations(range(m), n):
        sub = A[list(combo)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        pts = np.linalg.solve(sub, half.T).T  # (2^(n-1), n)
        candidates.append(pts)
    if not candidates:
        raise UnboundedBodyError("no invertible constraint subset found")
    pts = np.vstack(candidates)
    feas = pts[_vector_norm(pts @ A.T, np.inf) <= 1.0 + 1e-9]
    V = _dedup_rows(feas, VERTEX_DEDUP_TOL)
    return np.vstack([V, -V]) if V.size else V


def extreme_cloud(body: Body, reduce_symmetry: bool = True) -> np.ndarray | None:
    """Extreme-point cloud for vertex-based maximization, or None when analytic.

    For symmetric objectives (anything of the form max |f(x)| = max f(+-x))
    ``reduce_symmetry`` keeps one representative per +- pair. Parallelotopes
    (m == n) and boxes use sign enumeration up to n <= 18.
    """
    if isinstance(body, PolytopeH):
        m, n = body.A.shape
        if m == n:
            if n > SIGN_ENUM_GUARD:
                raise ResourceGuardError("sign-enumeration", f"n = {n} exceeds guard {SIGN_ENUM_GUARD}")
            V = np.linalg.solve(body.A, _half_sign_matrix(n).T).T
        else:
            V = vertices(body)
            V = V[: V.shape[0] // 2]  # vertices() returns the +- doubled set
        return V if reduce_symmetry else np.vstack([V, -V])
    if isinstance(body, VPolytope):
        G = body.generators
        return G if reduce_symmetry else np.vstack([G, -G])
    if isinstance(body, Box):
        n = body.dim
        if n > SIGN_ENUM_GUARD:
            raise ResourceGuardError("sign-enumeration", f"n = {n} exceeds guard {SIGN_ENUM_GUARD}")
        V = _half_sign_matrix(n) * body.half_widths
        return V if reduce_symmetry else np.vstack([V, -V])
    if isinstance(body, LpBall) and body.p == 1:
        V = body.radius * np.eye(body.n)
        return V if reduce_symmetry else np.vstack([V, -V])
    if isinstance(body, Segment):
        V = body.endpoint[None, :]
        return V if reduce_symmetry else np.vstack([V, -V])
    return None


def radius(body: Body) -> float:
    """rad(X) = max_{x in X} ||x||_2 (exact per variant)."""
    if isinstance(body, Box):
        return float(np.linalg.norm(body.half_widths))
    if isinstance(body, Ellipsoid):
        return float(body.semi_axes[0])
    if isinstance(body, EuclideanBall):
        return float(body.radius)
    if isinstance(body, Segment):
        return float(np.linalg.norm(body.endpoint))
    if isinstance(body, LpBall):
        return _lp_ball_radius(body)
    if isinstance(body, VPolytope):
        return float(np.max(np.linalg.norm(body.generators, axis=1)))
    if isinstance(body, PolytopeH):
        V = extreme_cloud(body)
        return float(np.max(np.linalg.norm(V, axis=1)))
    raise UnsupportedVariantError(f"radius not implemented for {type(body).__name__}")


def _lp_ball_radius(body: LpBall) -> float:
    # max ||x||_2 over ||x||_p <= r: axis point for p <= 2, diagonal for p >= 2;
    # a few conditional-gradient ascent steps confirm no better local direction.
    n, p, r = body.n, body.p, body.radius
    axis = r
    diag = r * n ** (0.5 - (0.0 if np.isinf(p) else 1.0 / p))
    best = max(axis, diag)
    x = np.full(n, r * n ** (-(0.0 if np.isinf(p) else 1.0 / p))) if diag >= axis else np.eye(n)[0] * r
    for _ in range(50):
        g = x.copy()
        if np.isinf(p):
            step = r * np.sign(g)
        elif p == 1:
            step = np.zeros(n)
            step[np.argmax(np.abs(g))] = r * np.sign(g[np.argmax(np.abs(g))])
        else:
            q = _conjugate(p)
            w = np.abs(g) ** (q - 1.0)
            denom = _vector_norm(w[None, :], p)[0]
            step = r * np.sign(g) * w / denom if denom > 0 else x
        if np.linalg.norm(step) <= best + 1e-12:
            break
        x = step
        best = float(np.linalg.norm(x))
    return best


def bounding_halfwidths(body: Body) -> np.ndarray:
    """Per-coordinate half-widths of a bounding box (for rejection sampling)."""
    n = body.dim
    if isinstance(body, Box):
        return body.half_widths.copy()
    if isinstance(body, LpBall):
        return np.full(n, body.radius)
    if isinstance(body, EuclideanBall):
        return np.full(n, body.radius)
    if isinstance(body, Ellipsoid):
        return np.sqrt(np.diag(np.linalg.inv(body.shape)))
    if isinstance(body, PolytopeH):
        V = extreme_cloud(body)
        return np.max(np.abs(V), axis=0)
    if isinstance(body, VPolytope):
        return np.max(np.abs(body.generators), axis=0)
    raise UnsupportedVariantError(f"bounding box not implemented for {type(body).__name__}")


def random_polytope(n: int, m: int, seed) -> PolytopeH:
    """PolytopeH with m unit-norm Gaussian rows (bounded a.s. for m >= n)."""
    if m < n:
        raise ValueError("need m >= n rows for a bounded body")
    rng = seed.generator() if hasattr(seed, "generator") else np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    return PolytopeH(A, np.inf)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _encode_p(p: float):
    return "inf" if np.isinf(p) else float(p)


def _decode_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return np.inf
        raise ValueError(f"unrecognized p value {p!r}")
    return float(p)


def body_to_dict(body: Body) -> dict:
    """Structured-text document for the body; round-trips decimal inputs exactly."""
    if isinstance(body, PolytopeH):
        return {"type": "polytope", "n": body.dim, "A": body.A.tolist(), "p": _encode_p(body.p)}
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "n": body.dim, "M": body.shape.tolist()}
    if isinstance(body, Box):
        return {"type": "box", "n": body.dim, "tau": body.half_widths.tolist()}
    if isinstance(body, LpBall):
        return {"type": "lp_ball", "n": body.n, "p": _encode_p(body.p), "radius": float(body.radius)}
    if isinstance(body, EuclideanBall):
        return {"type": "ball", "n": body.n, "radius": float(body.radius)}
    if isinstance(body, Segment):
        return {"type": "segment", "n": body.dim, "endpoint": body.endpoint.tolist()}
    if isinstance(body, VPolytope):
        return {"type": "vpolytope", "n": body.dim, "generators": body.generators.tolist()}
    raise UnsupportedVariantError(f"cannot serialize {type(body).__name__}")


def body_from_dict(doc: dict) -> Body:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValueError("body document must be a mapping with a 'type' field")
    kind = doc["type"]
    known = {
        "polytope": {"type", "n", "A", "p"},
        "ellipsoid": {"type", "n", "M"},
        "box": {"type", "n", "tau"},
        "lp_ball": {"type", "n", "p", "radius"},
        "ball": {"type", "n", "radius"},
        "segment": {"type", "n", "endpoint"},
        "vpolytope": {"type", "n", "generators"},
    }
    if kind not in known:
        raise ValueError(f"unknown body type {kind!r}")
    extra = set(doc) - known[kind]
    if extra:
        raise ValueError(f"unknown keys for body type {kind!r}: {sorted(extra)}")
    try:
        if kind == "polytope":
            body: Body = PolytopeH(np.array(doc["A"], dtype=float), _decode_p(doc.get("p", "inf")))
        elif kind == "ellipsoid":
            body = Ellipsoid(np.array(doc["M"], dtype=float))
        elif kind == "box":
            body = Box(np.array(doc["tau"], dtype=float))
        elif kind == "lp_ball":
            body = LpBall(_decode_p(doc["p"]), float(doc["radius"]), int(doc["n"]))
        elif kind == "ball":
            body = EuclideanBall(float(doc["radius"]), int(doc["n"]))
        elif kind == "segment":
            body = Segment(np.array(doc["endpoint"], dtype=float))
        else:
            body = VPolytope(np.array(doc["generators"], dtype=float))
    except KeyError as exc:
        raise ValueError(f"body document missing field {exc}") from exc
    if "n" in doc and int(doc["n"]) != body.dim:
        raise ValueError(f"declared n = {doc['n']} does not match payload dimension {body.dim}")
    return body


def dumps(body: Body) -> str:
    return json.dumps(body_to_dict(body))


def loads(text: str) -> Body:
    return body_from_dict(json.loads(text))
