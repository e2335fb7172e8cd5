"""Covers, nerves and filtered simplicial complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from covercraft.errors import DomainError, InvariantError, ParameterError

Simplex = tuple[int, ...]

ROW_MAX_TOL = 1e-9


def check_fuzzy_cover(g, atol: float = ROW_MAX_TOL) -> np.ndarray:
    """Validate an ``n x k`` membership matrix and return it as a float array."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] == 0:
        raise DomainError(f"fuzzy cover must be a non-empty n x k matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)) or g.min() < 0.0 or g.max() > 1.0 + atol:
        raise DomainError("fuzzy cover entries must lie in [0, 1]")
    if np.any(np.abs(g.max(axis=1) - 1.0) > atol):
        raise DomainError("every row of a fuzzy cover must have maximum 1")
    return g


@dataclass(frozen=True)
class Cover:
    """A family of ``k`` subsets of ``{0, ..., n-1}``; members may be empty."""

    n: int
    members: tuple[frozenset, ...]

    def __post_init__(self):
        members = tuple(frozenset(int(x) for x in m) for m in self.members)
        for m in members:
            if m and (min(m) < 0 or max(m) >= self.n):
                raise ParameterError("cover member contains an id outside [0, n)")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)

    def is_total(self) -> bool:
        covered = set().union(*self.members) if self.members else set()
        return len(covered) == self.n

    def nonempty(self) -> list[int]:
        return [i for i, m in enumerate(self.members) if m]

    def masks(self) -> list[int]:
        out = []
        for m in self.members:
            mask = 0
            for x in m:
                mask |= 1 << x
            out.append(mask)
        return out

    def to_indicator(self) -> np.ndarray:
        g = np.zeros((self.n, self.k))
        for i, m in enumerate(self.members):
            g[sorted(m), i] = 1.0
        return g

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Cover":
        labels = np.asarray(labels)
        k = int(labels.max()) + 1 if len(labels) else 0
        return cls(len(labels), tuple(frozenset(np.flatnonzero(labels == i).tolist()) for i in range(k)))


def _faces(s: Simplex):
    if len(s) == 1:
        return
    for i in range(len(s)):
        yield s[:i] + s[i + 1:]


@dataclass(frozen=True)
class SimplicialComplex:
    simplices: frozenset

    def __post_init__(self):
        simplices = frozenset(tuple(sorted(int(v) for v in s)) for s in self.simplices)
        for s in simplices:
            for f in _faces(s):
                if f not in simplices:
                    raise InvariantError(f"face {f} of {s} missing")
        object.__setattr__(self, "simplices", simplices)

    @property
    def max_dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def vertices(self) -> list[int]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    def of_dim(self, d: int) -> list[Simplex]:
        return sorted(s for s in self.simplices if len(s) == d + 1)

    def restrict(self, max_dim: int) -> "SimplicialComplex":
        return SimplicialComplex(frozenset(s for s in self.simplices if len(s) <= max_dim + 1))

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self.simplices


def _simplex_key(item):
    s, value = item
    return (len(s), s, value)


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices with filtration values, monotone under the face relation.

    ``simplices`` is kept in lexicographic order (dimension, vertex tuple).
    """

    simplices: tuple[tuple[Simplex, float], ...] = field(default=())

    def __post_init__(self):
        items = {}
        for s, value in self.simplices:
            key = tuple(sorted(int(v) for v in s))
            if key in items:
                raise InvariantError(f"simplex {key} listed twice")
            items[key] = float(value)
        for s, value in items.items():
            if np.isnan(value):
                raise InvariantError(f"simplex {s} has NaN filtration value")
            for f in _faces(s):
                if f not in items:
                    raise InvariantError(f"face {f} of {s} missing")
                if items[f] > value:
                    raise InvariantError(
                        f"filtration not monotone: f({f})={items[f]} > f({s})={value}")
        object.__setattr__(self, "simplices", tuple(sorted(items.items(), key=_simplex_key)))

    def as_dict(self) -> dict[Simplex, float]:
        return dict(self.simplices)

    @property
    def max_dim(self) -> int:
        return max((len(s) - 1 for s, _ in self.simplices), default=-1)

    def sublevel(self, r: float) -> frozenset:
        return frozenset(s for s, value in self.simplices if value <= r)

    def values(self) -> np.ndarray:
        return np.array([value for _, value in self.simplices])

    def __len__(self) -> int:
        return len(self.simplices)


def threshold(g, lam: float) -> Cover:
    """Suplevel cover ``{x : g[x, i] > lam}`` of a fuzzy cover."""
    if not 0.0 <= lam < 1.0:
        raise ParameterError(f"threshold must lie in [0, 1), got {lam}")
    g = check_fuzzy_cover(g)
    above = g > lam
    return Cover(g.shape[0], tuple(frozenset(np.flatnonzero(above[:, i]).tolist()) for i in range(g.shape[1])))


def _expand(vertices, max_dim: int, extend, summary=lambda payload: payload):
    """Generic clique-style expansion.

    ``extend(payload, simplex, j)`` returns the payload for ``simplex + (j,)``
    or ``None`` when that simplex is absent. A candidate is only tried when all
    its facets are present. Only the current level keeps its payloads; the
    result maps every simplex to ``summary(payload)``.
    """
    level = {(v,): p for v, p in vertices}
    verts = sorted(v for v, _ in vertices)
    result = {s: summary(p) for s, p in level.items()}
    for depth in range(max_dim):
        last = depth == max_dim - 1
        nxt = {}
        for s, payload in level.items():
            for j in verts:
                if j <= s[-1]:
                    continue
                cand = s + (j,)
                if any(f not in level for f in _faces(cand)):
                    continue
                out = extend(payload, s, j)
                if out is not None:
                    nxt[cand] = summary(out) if last else out
        if not nxt:
            break
        result.update(nxt if last else ((s, summary(p)) for s, p in nxt.items()))
        level = nxt
    return result


def nerve(cover: Cover, max_dim: int = 2) -> SimplicialComplex:
    """Nerve of a cover truncated at ``max_dim``; empty members give no vertex."""
    if max_dim < 0:
        raise ParameterError("max_dim must be nonnegative")
    masks = cover.masks()
    verts = [(i, m) for i, m in enumerate(masks) if m]

    def extend(mask, s, j):
        inter = mask & masks[j]
        return inter if inter else None

    return SimplicialComplex(frozenset(_expand(verts, max_dim, extend, summary=bool)))


def simplex_membership(g: np.ndarray, s: Simplex) -> float:
    """Largest threshold at which the suplevel sets of the members of ``s`` still meet."""
    return float(np.min(g[:, list(s)], axis=1).max())


def fuzzy_nerve_lambdas(g, max_dim: int = 2) -> dict[Simplex, float]:
    """Map each simplex with positive membership level to that level."""
    g = check_fuzzy_cover(g)
    if max_dim < 0:
        raise ParameterError("max_dim must be nonnegative")
    k = g.shape[1]
    verts = [(i, g[:, i]) for i in range(k) if g[:, i].max() > 0]
    def extend(vec, s, j):
        m = np.minimum(vec, g[:, j])
        if m.max() <= 0:
            return None
        return m

    return _expand(verts, max_dim, extend, summary=lambda vec: float(vec.max()))


def fuzzy_nerve_filtration(g, max_dim: int = 2) -> FilteredComplex:
    """Filtered nerve of a fuzzy cover, reindexed by ``r = -log(lambda)``."""
    lambdas = fuzzy_nerve_lambdas(g, max_dim)
    return FilteredComplex(tuple((s, 0.0 - float(np.log(lam))) for s, lam in lambdas.items()))


def lambda_sublevel(g, lam: float, max_dim: int = 2) -> frozenset:
    """Simplices whose membership level exceeds ``lam``."""
    return frozenset(s for s, level in fuzzy_nerve_lambdas(g, max_dim).items() if level > lam)


def intersection_sizes(cover: Cover, max_dim: int = 1) -> dict[Simplex, int]:
    """Cardinality of the intersection for every simplex of the nerve."""
    masks = cover.masks()
    out = {}
    for s in nerve(cover, max_dim).simplices:
        m = masks[s[0]]
        for j in s[1:]:
            m &= masks[j]
        out[s] = bin(m).count("1")
    return out
