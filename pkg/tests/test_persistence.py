import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covercraft.complex import FilteredComplex
from covercraft.errors import DomainError, InvariantError
from covercraft.geometry import WeightedGraph
from covercraft.persistence import (
    Barcode,
    betti_curve,
    evaluate_curve,
    h0_subgradient,
    h0_suplevel,
    h0_suplevel_barcode,
    reduce_barcode,
    suplevel_graph_filtration,
)

from oracles import (
    betti_numbers,
    central_difference,
    h0_sweep_total,
    random_graph,
    random_monotone_complex,
    rel_error,
)


def path3():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


def test_h0_constant_function():
    total, att = h0_suplevel(path3(), np.ones(3))
    assert total == 0.0 and len(att) == 0


def test_h0_path_example():
    f = np.array([1.0, 0.2, 0.8])
    total, att = h0_suplevel(path3(), f)
    assert total == pytest.approx(0.6)
    assert total == pytest.approx(h0_sweep_total(3, [(0, 1), (1, 2)], f))
    assert att.bars == [(2, (1, 2), 0.8, 0.2)]


def test_h0_two_components():
    G = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert h0_suplevel(G, np.ones(4))[0] == 0.0


def test_h0_domain_error():
    with pytest.raises(DomainError):
        h0_suplevel(path3(), np.array([0.0, 1.5, 0.2]))


def test_subgradient_examples():
    assert np.array_equal(h0_subgradient(h0_suplevel(path3(), np.ones(3))[1], 3), np.zeros(3))
    f = np.array([1.0, 0.2, 0.8])
    grad = h0_subgradient(h0_suplevel(path3(), f)[1], 3)
    assert np.array_equal(grad, [0.0, -1.0, 1.0])
    inner = np.array([0.99, 0.2, 0.8])
    fd = central_difference(lambda x: h0_suplevel(path3(), x)[0], inner)
    assert rel_error(grad, fd) < 1e-8


def test_subgradient_tie_goes_to_lower_id():
    # both endpoints of the merging edge (2, 3) sit at 0.4
    G = WeightedGraph.from_edges(4, [(0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    f = np.array([1.0, 0.9, 0.4, 0.4])
    _, att = h0_suplevel(G, f)
    assert att.bars == [(1, (2, 3), 0.9, 0.4)]
    assert list(att.death_vertex) == [2]


def distinct_values(rng, n, gap=1e-3):
    while True:
        f = rng.uniform(0.01, 0.99, n)
        s = np.sort(f)
        if np.all(np.diff(s) >= gap):
            return f


@pytest.mark.parametrize("seed", range(20))
def test_subgradient_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 15))
    edges, _ = random_graph(rng, n)
    G = WeightedGraph.from_edges(n, [(u, v, 1.0) for u, v in edges])
    f = distinct_values(rng, n)
    total, att = h0_suplevel(G, f)
    fd = central_difference(lambda x: h0_suplevel(G, x)[0], f)
    assert rel_error(h0_subgradient(att, n), fd) < 1e-4 or (total == 0 and np.allclose(fd, 0))
    if total > 0:
        # a small step along the negative subgradient strictly decreases the total
        step = f - 1e-5 * h0_subgradient(att, n)
        assert h0_suplevel(G, step)[0] < total


@given(st.integers(0, 10_000))
def test_h0_matches_sweep(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 26))
    edges, _ = random_graph(rng, n, p=float(rng.uniform(0.05, 0.5)))
    f = rng.uniform(size=n)
    G = WeightedGraph.from_edges(n, [(u, v, 1.0) for u, v in edges])
    assert abs(h0_suplevel(G, f)[0] - h0_sweep_total(n, edges, f)) < 1e-12


@given(st.integers(0, 10_000))
def test_h0_matches_reduction(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 15))
    edges, _ = random_graph(rng, n)
    G = WeightedGraph.from_edges(n, [(u, v, 1.0) for u, v in edges])
    f = rng.uniform(size=n)
    ours = sorted((round(b, 12), round(d, 12)) for _, b, d in h0_suplevel_barcode(G, f).bars)
    bc = reduce_barcode(suplevel_graph_filtration(G, f), max_hom_dim=0)
    theirs = sorted((round(1 - lo, 12), round(1 - hi, 12)) for lo, hi in bc.of_dim(0) if math.isfinite(hi))
    assert ours == theirs


def test_reduce_four_cycle():
    items = [((i,), 0.0) for i in range(4)] + [((0, 1), 0.0), ((1, 2), 0.0), ((2, 3), 0.0), ((0, 3), 0.0)]
    bc = reduce_barcode(FilteredComplex(tuple(items)), max_hom_dim=1)
    assert bc.bars == ((0, 0.0, math.inf), (1, 0.0, math.inf))
    assert len(bc.zero_bars) == 3
    curve = betti_curve(bc, 1)
    assert curve == [(0.0, 1)]
    assert evaluate_curve(curve, 1e9) == 1


def test_reduce_filled_triangle():
    items = [((i,), 0.0) for i in range(3)] + [((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 1.0), ((0, 1, 2), 2.0)]
    bc = reduce_barcode(FilteredComplex(tuple(items)), max_hom_dim=1)
    assert bc.of_dim(1) == [(1.0, 2.0)]
    assert bc.of_dim(0) == [(0.0, 1.0), (0.0, 1.0), (0.0, math.inf)]


def test_reduce_rejects_non_monotone():
    with pytest.raises(InvariantError):
        reduce_barcode([((0,), 1.0), ((1,), 0.0), ((0, 1), 0.5)])


def check_against_betti_sweep(items):
    max_dim = max(len(s) for s, _ in items) - 1
    bc = reduce_barcode(FilteredComplex(tuple(items)), max_hom_dim=max_dim)
    for r in sorted({v for _, v in items}):
        expected = betti_numbers([s for s, v in items if v <= r], max_dim)
        assert [bc.betti_at(r, d) for d in range(max_dim + 1)] == expected


@pytest.mark.parametrize("seed", range(30))
def test_reduce_matches_betti_sweep(seed):
    check_against_betti_sweep(random_monotone_complex(np.random.default_rng(seed)))


@given(st.integers(0, 10_000))
def test_reduce_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    items = random_monotone_complex(rng)
    perm = rng.permutation(8)
    relabeled = [(tuple(sorted(int(perm[v]) for v in s)), value) for s, value in items]
    a = reduce_barcode(FilteredComplex(tuple(items)), 3)
    b = reduce_barcode(FilteredComplex(tuple(relabeled)), 3)
    assert a.bars == b.bars


def test_betti_curve_examples():
    assert betti_curve(Barcode(()), 0) == []
    curve = betti_curve(Barcode(((0, 1.0, 3.0),)), 0)
    assert curve == [(1.0, 1), (3.0, 0)]
    assert [evaluate_curve(curve, r) for r in (0.5, 1.0, 2.9, 3.0)] == [0, 1, 1, 0]


def test_barcode_total_persistence():
    bc = Barcode(((0, 0.0, 1.0), (1, 0.5, 2.0), (0, 0.0, math.inf)))
    assert bc.total_persistence() == pytest.approx(2.5)
    assert bc.total_persistence(1) == pytest.approx(1.5)
