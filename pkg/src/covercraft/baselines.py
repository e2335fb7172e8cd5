"""Reference cover-learning and topological-inference constructions."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sps

from covercraft.complex import Cover, FilteredComplex, _expand
from covercraft.errors import CapacityError, ParameterError
from covercraft.geometry import as_points, epsilon_net, pairwise_distances

RIPS_GUARD = 10**7


def ball_mapper(X, eps: float, seed: int = 0, landmarks=None) -> Cover:
    """Closed eps-balls around the points of a seeded eps-net."""
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    pts = as_points(X)
    if landmarks is None:
        landmarks = epsilon_net(pts, eps, seed)
    D = pairwise_distances(pts[list(landmarks)], pts)
    return Cover(pts.shape[0], tuple(frozenset(np.flatnonzero(row <= eps).tolist()) for row in D))


def witness_v0(X, landmarks, max_dim: int = 2, max_value: float = np.inf) -> FilteredComplex:
    """Witness complex with ``v = 0`` on the given landmarks.

    Simplex ``s`` enters at ``min_x max_{y in s} d(y, x)``, the smallest radius at
    which one data point witnesses all of its vertices. Vertex ``i`` of the
    result stands for ``landmarks[i]``. Simplices above ``max_value`` are
    omitted.
    """
    landmarks = list(landmarks)
    if not landmarks:
        raise ParameterError("landmarks must be nonempty")
    pts = as_points(X)
    D = pairwise_distances(pts[landmarks], pts)
    verts = [(i, D[i]) for i in range(len(landmarks)) if D[i].min() <= max_value]

    def extend(vec, s, j):
        out = np.maximum(vec, D[j])
        return out if out.min() <= max_value else None

    values = _expand(verts, max_dim, extend, summary=lambda vec: float(vec.min()))
    return FilteredComplex(tuple(values.items()))


@dataclass(frozen=True)
class IntervalCover:
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        for lo, hi in ivs:
            if not lo < hi:
                raise ParameterError(f"interval [{lo}, {hi}] is empty")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self) -> int:
        return len(self.intervals)

    def has_triple_overlap(self) -> bool:
        # a common point of closed intervals can be taken to be one of their left endpoints
        for x, _ in self.intervals:
            if sum(1 for lo, hi in self.intervals if lo <= x <= hi) >= 3:
                return True
        return False


def uniform_cover(lo: float, hi: float, k: int, gain: float) -> IntervalCover:
    """``k`` equal closed intervals covering ``[lo, hi]``; neighbors overlap by ``gain`` of a length."""
    if k < 1:
        raise ParameterError("k must be positive")
    if not 0.0 <= gain < 1.0:
        raise ParameterError("gain must lie in [0, 1)")
    if not hi > lo:
        hi = lo + 1.0
    length = (hi - lo) / (k - (k - 1) * gain)
    step = length * (1.0 - gain)
    ivs = [(lo + i * step, lo + i * step + length) for i in range(k)]
    ivs[-1] = (ivs[-1][0], hi)
    return IntervalCover(tuple(ivs))


Clusterer = Callable[[np.ndarray], np.ndarray]


def single_linkage(cutoff: float) -> Clusterer:
    """Clusters are connected components of the graph joining points closer than ``cutoff``."""

    def cluster(points: np.ndarray) -> np.ndarray:
        if len(points) == 1:
            return np.zeros(1, dtype=np.int64)
        D = pairwise_distances(points)
        adj = sps.csr_matrix(D <= cutoff)
        _, labels = connected_components(adj, directed=False)
        return labels

    return cluster


def dbscan(eps: float, min_pts: int = 5) -> Clusterer:
    """DBSCAN clustering; noise points get label -1 and are left out of the cover."""
    from sklearn.cluster import DBSCAN

    def cluster(points: np.ndarray) -> np.ndarray:
        return DBSCAN(eps=eps, min_samples=min_pts).fit_predict(points)

    return cluster


def mapper_1d(X, f, cover: IntervalCover, clusterer: Clusterer) -> Cover:
    """Cluster the preimage of each interval; every cluster becomes a cover member."""
    pts = as_points(X)
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    if len(f) != pts.shape[0]:
        raise ParameterError("filter function must have one value per point")
    members = []
    for lo, hi in cover.intervals:
        idx = np.flatnonzero((f >= lo) & (f <= hi))
        if len(idx) == 0:
            continue
        labels = np.asarray(clusterer(pts[idx]))
        for label in np.unique(labels):
            if label < 0:
                continue
            members.append(frozenset(idx[labels == label].tolist()))
    return Cover(pts.shape[0], tuple(members))


def rips_size_estimate(D: np.ndarray, max_dim: int, max_radius: float) -> int:
    """Upper bound on the simplex count from the higher-index degrees."""
    adj = np.triu(D <= max_radius, k=1)
    up = adj.sum(axis=1)
    return int(len(D) + sum(comb(int(d), j) for d in up for j in range(1, max_dim + 1)))


def vietoris_rips(X, max_dim: int = 2, max_radius: float = np.inf,
                  guard: int = RIPS_GUARD) -> FilteredComplex:
    """Clique filtration of the distance graph; a simplex enters at its diameter."""
    if max_dim < 0:
        raise ParameterError("max_dim must be nonnegative")
    pts = as_points(X)
    D = pairwise_distances(pts)
    estimate = rips_size_estimate(D, max_dim, max_radius)
    if estimate > guard:
        raise CapacityError(f"Rips complex would have up to {estimate} simplices (guard {guard})")
    n = len(D)
    upper = [[int(j) for j in np.flatnonzero(D[i] <= max_radius) if j > i] for i in range(n)]
    upper_sets = [set(u) for u in upper]
    out = []
    stack = [((i,), 0.0, upper[i]) for i in reversed(range(n))]
    while stack:
        s, value, cand = stack.pop()
        out.append((s, value))
        if len(s) > max_dim:
            continue
        for j in reversed(cand):
            new_value = max(value, max(D[j, v] for v in s))
            stack.append((s + (j,), float(new_value), [c for c in cand if c in upper_sets[j]]))
    return FilteredComplex(tuple(out))
