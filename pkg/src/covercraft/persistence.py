"""Barcodes: elder-rule H0 for vertex-filtered graphs and Z/2 matrix reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from covercraft.complex import FilteredComplex
from covercraft.errors import DomainError, ParameterError
from covercraft.geometry import WeightedGraph

# slack for values produced by floating-point normalization, e.g. 1 + 2e-16
RANGE_SLACK = 1e-12

Bar = tuple[int, float, float]


@dataclass(frozen=True)
class Barcode:
    """Multiset of ``(dim, birth, death)`` intervals; ``death`` may be ``inf``.

    ``zero_bars`` keeps the zero-length pairs that were dropped from ``bars``.
    """

    bars: tuple[Bar, ...] = ()
    zero_bars: tuple[Bar, ...] = field(default=(), compare=False)

    def __post_init__(self):
        bars = tuple(sorted((int(d), float(b), float(e)) for d, b, e in self.bars))
        object.__setattr__(self, "bars", bars)

    def of_dim(self, dim: int) -> list[tuple[float, float]]:
        return [(b, e) for d, b, e in self.bars if d == dim]

    def finite(self) -> list[Bar]:
        return [bar for bar in self.bars if math.isfinite(bar[2])]

    def dims(self) -> list[int]:
        return sorted({d for d, _, _ in self.bars})

    def total_persistence(self, dim: int | None = None) -> float:
        return float(sum(abs(e - b) for d, b, e in self.finite() if dim is None or d == dim))

    def betti_at(self, r: float, dim: int) -> int:
        return sum(1 for d, b, e in self.bars if d == dim and b <= r < e)

    def __len__(self) -> int:
        return len(self.bars)


@dataclass(frozen=True)
class H0Attribution:
    """Per-bar gradient carriers of the reduced suplevel H0 barcode.

    Arrays are parallel: bar ``i`` is born at vertex ``birth[i]`` and dies at
    edge ``(death_u[i], death_v[i])``, whose lower-valued endpoint is
    ``death_vertex[i]``.
    """

    birth: np.ndarray
    death_u: np.ndarray
    death_v: np.ndarray
    death_vertex: np.ndarray
    birth_value: np.ndarray
    death_value: np.ndarray

    @property
    def bars(self) -> list[tuple[int, tuple[int, int], float, float]]:
        return [(int(b), (int(u), int(v)), float(bv), float(dv)) for b, u, v, bv, dv in zip(
            self.birth, self.death_u, self.death_v, self.birth_value, self.death_value)]

    def __len__(self) -> int:
        return len(self.birth)


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _elder_rule(n, eu, ev, order, f, out):
    """Process edges in the given (decreasing value) order on a union-find.

    Writes one row ``(birth_vertex, u, v, death_vertex)`` per positive-length
    bar into ``out`` and returns the number of rows.
    """
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    birth = np.arange(n)
    count = 0
    for t in order:
        a = eu[t]
        b = ev[t]
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        ba = birth[ra]
        bb = birth[rb]
        if f[ba] > f[bb] or (f[ba] == f[bb] and ba < bb):
            old = ra
            young = rb
        else:
            old = rb
            young = ra
        by = birth[young]
        if f[a] < f[b] or (f[a] == f[b] and a < b):
            dv = a
        else:
            dv = b
        if f[by] > f[dv]:
            out[count, 0] = by
            out[count, 1] = a
            out[count, 2] = b
            out[count, 3] = dv
            count += 1
        keep = birth[old]
        if size[old] < size[young]:
            old, young = young, old
        parent[young] = old
        size[old] += size[young]
        birth[old] = keep
    return count


def _check_unit_range(f: np.ndarray):
    if not np.all(np.isfinite(f)) or f.min() < -RANGE_SLACK or f.max() > 1.0 + RANGE_SLACK:
        raise DomainError("vertex function values must lie in [0, 1]")


def _attribution(rows: np.ndarray, f: np.ndarray) -> H0Attribution:
    b, u, v, dv = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
    return H0Attribution(b, u, v, dv, f[b], f[dv])


def h0_columns(graph: WeightedGraph, F: np.ndarray) -> list[tuple[float, H0Attribution]]:
    """Reduced suplevel H0 total persistence and attribution for every column of ``F``."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] != graph.n:
        raise ParameterError(f"expected an array with {graph.n} rows, got shape {F.shape}")
    _check_unit_range(F)
    eu, ev = graph.u, graph.v
    results = []
    if graph.n_edges:
        edge_vals = np.minimum(F[eu], F[ev])
        orders = np.argsort(-edge_vals, axis=0, kind="stable")
    buf = np.empty((max(graph.n - 1, 1), 4), dtype=np.int64)
    for i in range(F.shape[1]):
        f = np.ascontiguousarray(F[:, i])
        count = _elder_rule(graph.n, eu, ev, np.ascontiguousarray(orders[:, i]), f, buf) if graph.n_edges else 0
        att = _attribution(buf[:count].copy(), f)
        total = float(np.sum(att.birth_value - att.death_value))
        results.append((total, att))
    return results


def h0_suplevel(graph: WeightedGraph, f) -> tuple[float, H0Attribution]:
    """Total persistence of the reduced 0-dim suplevel barcode of ``f`` on ``graph``.

    Vertex ``x`` enters at ``f(x)`` and edge ``(x, y)`` at ``min(f(x), f(y))``
    as the threshold decreases. Components merge by the elder rule; one
    essential class per connected component of the graph is excluded.
    """
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    return h0_columns(graph, f[:, None])[0]


def h0_subgradient(attribution: H0Attribution, n: int) -> np.ndarray:
    grad = np.zeros(n)
    np.add.at(grad, attribution.birth, 1.0)
    np.add.at(grad, attribution.death_vertex, -1.0)
    return grad


def h0_suplevel_barcode(graph: WeightedGraph, f) -> Barcode:
    """The finite bars of :func:`h0_suplevel` as a (decreasing-indexed) barcode."""
    _, att = h0_suplevel(graph, f)
    return Barcode(tuple((0, b, d) for b, d in zip(att.birth_value, att.death_value)))


def suplevel_graph_filtration(graph: WeightedGraph, f) -> FilteredComplex:
    """Sublevel reindexing ``value -> 1 - value`` of the suplevel graph filtration."""
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    items = [((i,), 1.0 - f[i]) for i in range(graph.n)]
    items += [((int(a), int(b)), max(1.0 - f[a], 1.0 - f[b])) for a, b in zip(graph.u, graph.v)]
    return FilteredComplex(tuple(items))


def filtration_order(K: FilteredComplex) -> list[tuple[tuple[int, ...], float]]:
    return sorted(K.simplices, key=lambda item: (item[1], len(item[0]), item[0]))


def reduce_barcode(K, max_hom_dim: int = 1, keep_zero: bool = False) -> Barcode:
    """Persistence barcode of a filtered complex over Z/2.

    Standard column reduction of the boundary matrix, with simplices ordered
    by (filtration value, dimension, vertex tuple). Unpaired classes become
    infinite bars; zero-length bars go to ``Barcode.zero_bars`` unless
    ``keep_zero`` is set.

    Parameters
    ----------
    K : FilteredComplex or iterable of (simplex, value)
        Raw input is validated, so a non-monotone filtration raises
        :class:`~covercraft.errors.InvariantError`.
    max_hom_dim : int
        Largest homology dimension reported.
    """
    if not isinstance(K, FilteredComplex):
        K = FilteredComplex(tuple(K))
    if max_hom_dim < 0:
        raise ParameterError("max_hom_dim must be nonnegative")
    ordered = filtration_order(K)
    index = {s: i for i, (s, _) in enumerate(ordered)}
    values = [v for _, v in ordered]
    dims = [len(s) - 1 for s, _ in ordered]

    pivots: dict[int, int] = {}
    columns: dict[int, int] = {}
    paired = set()
    bars, zero = [], []
    for j, (s, value) in enumerate(ordered):
        if len(s) == 1:
            continue
        col = 0
        for i in range(len(s)):
            col ^= 1 << index[s[:i] + s[i + 1:]]
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                break
            col ^= columns[other]
        if not col:
            continue
        low = col.bit_length() - 1
        pivots[low] = j
        columns[j] = col
        paired.add(low)
        paired.add(j)
        d = dims[low]
        if d > max_hom_dim:
            continue
        bar = (d, values[low], values[j])
        (zero if values[j] == values[low] else bars).append(bar)

    for i in range(len(ordered)):
        if i not in paired and dims[i] <= max_hom_dim:
            bars.append((dims[i], values[i], math.inf))
    if keep_zero:
        return Barcode(tuple(bars + zero), tuple(zero))
    return Barcode(tuple(bars), tuple(zero))


def betti_curve(bc: Barcode, dim: int) -> list[tuple[float, int]]:
    """Right-continuous step function of the ``dim``-th Betti number.

    Returns breakpoints ``(value, betti)``: the curve equals ``betti`` on
    ``[value, next value)`` and 0 before the first breakpoint.
    """
    events: dict[float, int] = {}
    for d, b, e in bc.bars:
        if d != dim:
            continue
        lo, hi = min(b, e), max(b, e)
        events[lo] = events.get(lo, 0) + 1
        if math.isfinite(hi):
            events[hi] = events.get(hi, 0) - 1
    curve = []
    level = 0
    for value in sorted(events):
        level += events[value]
        if curve and curve[-1][1] == level:
            continue
        curve.append((value, level))
    return curve


def evaluate_curve(curve: list[tuple[float, int]], r: float) -> int:
    level = 0
    for value, betti in curve:
        if value > r:
            break
        level = betti
    return level
