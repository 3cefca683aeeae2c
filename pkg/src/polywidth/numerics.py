"""Deterministic linear-algebra and sampling substrate.

Orthonormal subspaces with projection helpers, plus seeded samplers built on
counter-based (Philox) streams so that derived streams are a pure function of
``(root_seed, stream_path)`` and independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RANK_RTOL",
    "ORTHO_TOL",
    "SeedSpec",
    "Subspace",
    "orthonormalize",
    "dist_to_span",
    "sample_ball",
    "sample_gaussian",
]

# Relative singular-value cutoff for all span/rank computations.
RANK_RTOL = 1e-9
# Frobenius tolerance on basis'basis - I for a valid Subspace.
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus a path of non-negative integers naming a derived stream.

    Stream derivation is counter-based: two distinct paths under the same root
    give statistically independent generators, and the mapping does not depend
    on the order streams are created in.
    """

    root_seed: int
    stream_path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= int(self.root_seed) < 2**64):
            raise ValueError("root_seed must be an unsigned 64-bit integer")
        path = tuple(int(p) for p in self.stream_path)
        if any(p < 0 for p in path):
            raise ValueError("stream_path entries must be non-negative")
        object.__setattr__(self, "stream_path", path)

    def child(self, *path: int) -> "SeedSpec":
        """Derive the sub-stream named by appending ``path``."""
        return SeedSpec(self.root_seed, self.stream_path + tuple(int(p) for p in path))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.root_seed), spawn_key=self.stream_path)
        return np.random.Generator(np.random.Philox(ss))


def _canonical_signs(basis: np.ndarray) -> np.ndarray:
    """Fix the sign of each column so the largest-magnitude entry is positive."""
    if basis.shape[1] == 0:
        return basis
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


@dataclass
class Subspace:
    """A k-dimensional linear subspace of R^n, stored as an n-by-k orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-d array (n, k)")
        n, k = B.shape
        if n < 1 or k > n:
            raise ValueError(f"invalid basis shape {B.shape}")
        if k > 0:
            gram_err = np.linalg.norm(B.T @ B - np.eye(k))
            if gram_err > ORTHO_TOL * max(1.0, np.sqrt(k)):
                raise ValueError(f"basis columns not orthonormal (Frobenius error {gram_err:.2e})")
        self.basis = B

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``v`` (vector or stack of row vectors) onto the span."""
        v = np.asarray(v, dtype=float)
        return (v @ self.basis) @ self.basis.T

    def complement(self) -> "Subspace":
        """The (n-k)-dimensional orthogonal complement."""
        n, k = self.basis.shape
        if k == 0:
            return Subspace(np.eye(n))
        if k == n:
            return Subspace(np.zeros((n, 0)))
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return Subspace(_canonical_signs(q[:, k:]))

    @staticmethod
    def full(n: int) -> "Subspace":
        return Subspace(np.eye(n))

    @staticmethod
    def empty(n: int) -> "Subspace":
        return Subspace(np.zeros((n, 0)))

    @staticmethod
    def coordinate(n: int, indices) -> "Subspace":
        return Subspace(np.eye(n)[:, list(indices)])


def orthonormalize(vectors: np.ndarray) -> Subspace:
    """Orthonormal basis of the column span of ``vectors`` (n, j).

    The returned dimension is the numerical rank: singular values above
    ``RANK_RTOL`` times the largest one. Rank-0 input yields an empty subspace.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[0] < 1:
        raise ValueError("vectors must be a non-empty 2-d array (n, j)")
    n, j = V.shape
    if j == 0 or not np.any(V):
        return Subspace(np.zeros((n, 0)))
    u, s, _ = np.linalg.svd(V, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    return Subspace(_canonical_signs(u[:, :rank]))


def dist_to_span(v: np.ndarray, W: Subspace) -> float:
    """Euclidean distance from ``v`` to span(W)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (W.ambient_dim,):
        raise ValueError(f"vector length {v.shape} does not match ambient dim {W.ambient_dim}")
    return float(np.linalg.norm(v - W.project(v)))


def sample_gaussian(dim: int, sigma: float, seed: SeedSpec, size: int | None = None) -> np.ndarray:
    """i.i.d. centered normal coordinates with standard deviation ``sigma``.

    Returns shape (dim,) or (size, dim); deterministic given ``seed``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = seed.generator()
    shape = (dim,) if size is None else (int(size), dim)
    return sigma * rng.standard_normal(shape)


def sample_ball(sub: Subspace, r: float, seed: SeedSpec, size: int | None = None) -> np.ndarray:
    """Uniform samples from the k-ball of radius ``r`` inside span(sub).

    Gaussian direction, radius r * U^(1/k); points come back in ambient
    coordinates, shape (n,) or (size, n). Deterministic given ``seed``.
    """
    if sub.dim < 1:
        raise ValueError("subspace must have dim >= 1")
    if r <= 0:
        raise ValueError("radius must be positive")
    rng = seed.generator()
    count = 1 if size is None else int(size)
    k = sub.dim
    g = rng.standard_normal((count, k))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = r * rng.random((count, 1)) ** (1.0 / k)
    pts = (g / norms * radii) @ sub.basis.T
    return pts[0] if size is None else pts
