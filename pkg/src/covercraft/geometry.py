"""Point clouds, neighborhood graphs, nets and synthetic samplers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np
import scipy.sparse as sps
from scipy.spatial import cKDTree

from covercraft.errors import DomainError, ParameterError

SIGMA_LO = 1e-8
SIGMA_HI = 1e3
SIGMA_ITERS = 64
UMAP_MIN_WEIGHT = 1e-6


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DomainError(f"point cloud must be a non-empty 2-d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("point cloud has non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def as_points(X) -> np.ndarray:
    if isinstance(X, PointCloud):
        return X.points
    return PointCloud(X).points


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph on vertices ``0..n-1``.

    Edges are stored as three parallel arrays ``u < v`` with weights ``w``,
    sorted lexicographically by ``(u, v)``.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64).reshape(-1)
        v = np.asarray(self.v, dtype=np.int64).reshape(-1)
        w = np.asarray(self.w, dtype=np.float64).reshape(-1)
        if not (len(u) == len(v) == len(w)):
            raise ParameterError("edge arrays must have equal length")
        if len(u):
            if np.any(u >= v):
                raise ParameterError("edges must satisfy u < v (no self-loops)")
            if u.min() < 0 or v.max() >= self.n:
                raise ParameterError("edge endpoint out of range")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ParameterError("edge weights must be positive and finite")
            order = np.lexsort((v, u))
            u, v, w = u[order], v[order], w[order]
            dup = (np.diff(u) == 0) & (np.diff(v) == 0)
            if np.any(dup):
                raise ParameterError("duplicate edges")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Build from an iterable of ``(u, v, w)``; endpoints may come in any order."""
        edges = list(edges)
        if not edges:
            return cls(n, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        arr = np.array([(min(a, b), max(a, b), w) for a, b, w in edges], dtype=np.float64)
        return cls(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2])

    @property
    def n_edges(self) -> int:
        return len(self.u)

    @property
    def total_weight(self) -> float:
        return float(self.w.sum())

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in zip(self.u, self.v)}

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        return iter(self.edges)

    @cached_property
    def incidence(self) -> sps.csr_matrix:
        """Signed ``n x E`` incidence matrix, +1 at ``u`` and -1 at ``v``."""
        E = self.n_edges
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([np.arange(E), np.arange(E)])
        vals = np.concatenate([np.ones(E), -np.ones(E)])
        return sps.csr_matrix((vals, (rows, cols)), shape=(self.n, E))

    def adjacency(self) -> sps.csr_matrix:
        A = sps.coo_matrix((self.w, (self.u, self.v)), shape=(self.n, self.n))
        return (A + A.T).tocsr()

    def permuted(self, perm: np.ndarray) -> "WeightedGraph":
        """Relabel vertex ``i`` as ``perm[i]``."""
        perm = np.asarray(perm)
        a, b = perm[self.u], perm[self.v]
        return WeightedGraph(self.n, np.minimum(a, b), np.maximum(a, b), self.w)


def _neighbors(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors of every point, excluding the point itself."""
    n = X.shape[0]
    tree = cKDTree(X)
    dist, idx = tree.query(X, k=k + 1)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    is_self = idx == np.arange(n)[:, None]
    # duplicates may push the point itself out of its own list; drop the farthest then
    keep = ~is_self
    no_self = ~is_self.any(axis=1)
    keep[no_self, -1] = False
    return idx[keep].reshape(n, k), dist[keep].reshape(n, k)


def _check_n_neigh(n: int, n_neigh: int, minimum: int = 1):
    if n_neigh < minimum:
        raise ParameterError(f"n_neigh must be >= {minimum}, got {n_neigh}")
    if n_neigh >= n:
        raise ParameterError(f"n_neigh={n_neigh} must be smaller than the number of points n={n}")


def _undirected(n: int, P: sps.coo_matrix, union: bool, min_weight: float = 0.0) -> WeightedGraph:
    P = P.tocsr()
    Pt = P.T.tocsr()
    if union:
        S = P + Pt - P.multiply(Pt)
    else:
        S = P.maximum(Pt)
    S = sps.triu(S, k=1).tocoo()
    mask = S.data > min_weight if min_weight > 0 else S.data > 0
    return WeightedGraph(n, S.row[mask], S.col[mask], S.data[mask])


def knn_graph(X, n_neigh: int) -> WeightedGraph:
    """Symmetrized k-nearest-neighbor graph with unit weights."""
    pts = as_points(X)
    n = pts.shape[0]
    _check_n_neigh(n, n_neigh)
    idx, _ = _neighbors(pts, n_neigh)
    rows = np.repeat(np.arange(n), n_neigh)
    P = sps.coo_matrix((np.ones(n * n_neigh), (rows, idx.reshape(-1))), shape=(n, n))
    return _undirected(n, P, union=False)


def smooth_sigmas(dist: np.ndarray, n_neigh: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point ``(rho, sigma)`` for the UMAP membership kernel.

    ``rho`` is the distance to the nearest neighbor and ``sigma`` solves
    ``sum_j exp(-max(0, d_j - rho) / sigma) = log2(n_neigh)`` by bisection
    on ``[SIGMA_LO, SIGMA_HI]``.
    """
    rho = dist[:, 0].copy()
    excess = np.maximum(dist - rho[:, None], 0.0)
    target = np.log2(n_neigh)
    lo = np.full(len(rho), SIGMA_LO)
    hi = np.full(len(rho), SIGMA_HI)
    for _ in range(SIGMA_ITERS):
        mid = 0.5 * (lo + hi)
        total = np.exp(-excess / mid[:, None]).sum(axis=1)
        too_big = total > target
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    return rho, 0.5 * (lo + hi)


def umap_weights(dist: np.ndarray, n_neigh: int) -> np.ndarray:
    """Directed membership strengths for each (point, neighbor) pair."""
    rho, sigma = smooth_sigmas(dist, n_neigh)
    excess = np.maximum(dist - rho[:, None], 0.0)
    weights = np.exp(-excess / sigma[:, None])
    degenerate = np.all(excess == 0.0, axis=1)
    weights[degenerate] = 1.0
    return weights


def fuzzy_union(a, b):
    return a + b - a * b


def umap_graph(X, n_neigh: int) -> WeightedGraph:
    """Weighted neighborhood graph of UMAP (smooth kNN kernel, fuzzy union)."""
    pts = as_points(X)
    n = pts.shape[0]
    _check_n_neigh(n, n_neigh, minimum=2)
    idx, dist = _neighbors(pts, n_neigh)
    weights = umap_weights(dist, n_neigh)
    rows = np.repeat(np.arange(n), n_neigh)
    P = sps.coo_matrix((weights.reshape(-1), (rows, idx.reshape(-1))), shape=(n, n))
    return _undirected(n, P, union=True, min_weight=UMAP_MIN_WEIGHT)


def neighborhood_graph(X, n_neigh: int, kind: str = "umap") -> WeightedGraph:
    if kind in ("umap",):
        return umap_graph(X, n_neigh)
    if kind in ("unit", "unit-knn", "knn"):
        return knn_graph(X, n_neigh)
    raise ParameterError(f"unknown graph kind {kind!r}")


def _dist_to(pts: np.ndarray, i: int) -> np.ndarray:
    return np.sqrt(((pts - pts[i]) ** 2).sum(axis=1))


def epsilon_net(X, eps: float, seed: int = 0) -> list[int]:
    """Greedy eps-net over a seeded random ordering of the points.

    The result is pairwise more than ``eps`` apart and every point lies
    within ``eps`` of some chosen point.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    pts = as_points(X)
    order = np.random.default_rng(seed).permutation(pts.shape[0])
    nearest = np.full(pts.shape[0], np.inf)
    chosen = []
    for i in order:
        if nearest[i] > eps:
            chosen.append(int(i))
            nearest = np.minimum(nearest, _dist_to(pts, i))
    return chosen


def furthest_point_subsample(X, m: int, seed: int = 0) -> list[int]:
    pts = as_points(X)
    n = pts.shape[0]
    if not 1 <= m <= n:
        raise ParameterError(f"subsample size must be in [1, {n}], got {m}")
    first = int(np.random.default_rng(seed).integers(n))
    chosen = [first]
    nearest = _dist_to(pts, first)
    nearest[first] = -np.inf
    while len(chosen) < m:
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, _dist_to(pts, nxt))
        nearest[chosen] = -np.inf
    return chosen


def sample_sphere(dim: int, n: int, seed: int = 0) -> PointCloud:
    """``n`` uniform points on the unit ``dim``-sphere in ``R^(dim+1)``."""
    if dim not in (2, 3):
        raise ParameterError(f"sphere dimension must be 2 or 3, got {dim}")
    if n < 1:
        raise ParameterError("n must be positive")
    g = np.random.default_rng(seed).standard_normal((n, dim + 1))
    return PointCloud(g / np.linalg.norm(g, axis=1, keepdims=True))


def sample_circle(n: int, seed: int = 0, noise: float = 0.0) -> PointCloud:
    if n < 1:
        raise ParameterError("n must be positive")
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 2 * np.pi, n)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return PointCloud(pts)


def sample_blobs(n: int, seed: int = 0, centers: int = 2, spread: float = 0.3,
                 separation: float = 6.0) -> PointCloud:
    """Isotropic Gaussian blobs in the plane, centers spaced ``separation`` apart on the x axis."""
    if n < 1 or centers < 1:
        raise ParameterError("n and centers must be positive")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % centers
    offsets = np.column_stack([labels * separation, np.zeros(n)])
    return PointCloud(offsets + spread * rng.standard_normal((n, 2)))


def blob_labels(n: int, centers: int = 2) -> np.ndarray:
    return np.arange(n) % centers


def pairwise_distances(A, B=None) -> np.ndarray:
    from scipy.spatial.distance import cdist

    A = as_points(A)
    B = A if B is None else as_points(B)
    return cdist(A, B)


DATASETS = ("sphere2", "sphere3", "circle", "blobs")


def generate(kind: str, n: int, seed: int = 0) -> PointCloud:
    """Synthetic dataset by name: ``sphere2``, ``sphere3``, ``circle`` or ``blobs``."""
    if kind == "sphere2":
        return sample_sphere(2, n, seed)
    if kind == "sphere3":
        return sample_sphere(3, n, seed)
    if kind == "circle":
        return sample_circle(n, seed)
    if kind == "blobs":
        return sample_blobs(n, seed)
    raise ParameterError(f"unknown dataset kind {kind!r}; expected one of {DATASETS}")
