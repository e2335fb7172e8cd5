import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covercraft.complex import (
    Cover,
    FilteredComplex,
    SimplicialComplex,
    check_fuzzy_cover,
    fuzzy_nerve_filtration,
    fuzzy_nerve_lambdas,
    intersection_sizes,
    lambda_sublevel,
    nerve,
    threshold,
)
from covercraft.errors import DomainError, InvariantError, ParameterError

from oracles import brute_fuzzy_lambdas, brute_nerve


def random_fuzzy(rng, n, k, zeros=0.3):
    g = rng.uniform(size=(n, k))
    g[rng.uniform(size=(n, k)) < zeros] = 0.0
    g[np.arange(n), rng.integers(k, size=n)] = 1.0
    return g


def test_check_fuzzy_cover():
    with pytest.raises(DomainError):
        check_fuzzy_cover(np.array([[0.5, 0.2]]))
    with pytest.raises(DomainError):
        check_fuzzy_cover(np.array([[1.0, 1.2]]))
    check_fuzzy_cover(np.array([[1.0, 0.3], [0.0, 1.0]]))


def test_threshold_partition():
    labels = np.array([0, 1, 1, 2, 0])
    g = Cover.from_labels(labels).to_indicator()
    for lam in (0.1, 0.5, 0.99):
        assert threshold(g, lam).members == Cover.from_labels(labels).members


def test_threshold_strict():
    c = threshold(np.array([[1.0, 0.6], [1.0, 0.5]]), 0.5)
    assert c.members == (frozenset({0, 1}), frozenset({0}))


def test_threshold_zero_support(rng):
    g = random_fuzzy(rng, 20, 4)
    c = threshold(g, 0.0)
    for i in range(4):
        assert c.members[i] == frozenset(np.flatnonzero(g[:, i] > 0).tolist())
    assert c.is_total()


def test_threshold_bad_lambda():
    for lam in (1.0, -0.1, 1.5):
        with pytest.raises(ParameterError):
            threshold(np.eye(2), lam)


def test_nerve_partition_omits_empty():
    c = Cover(5, (frozenset({0, 1}), frozenset(), frozenset({2, 3, 4})))
    K = nerve(c, 2)
    assert K.simplices == frozenset({(0,), (2,)})


def test_nerve_common_point_triangle():
    c = Cover(4, (frozenset({0, 1}), frozenset({1, 2}), frozenset({1, 3})))
    assert (0, 1, 2) in nerve(c, 2)


def test_nerve_circle_arcs_four_cycle():
    members = tuple(frozenset(((3 * i + j) % 12) for j in range(4)) for i in range(4))
    c = Cover(12, members)
    K = nerve(c, 2)
    assert K.simplices == brute_nerve([set(m) for m in members], 2)
    assert K.of_dim(1) == [(0, 1), (0, 3), (1, 2), (2, 3)]
    assert K.of_dim(2) == []


@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(0, 3))
def test_nerve_matches_brute_force(seed, k, d):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    members = [set(np.flatnonzero(rng.uniform(size=n) < 0.4).tolist()) for _ in range(k)]
    K = nerve(Cover(n, tuple(frozenset(m) for m in members)), d)
    assert K.simplices == brute_nerve(members, d)
    if d > 0:
        assert K.restrict(d - 1).simplices == nerve(Cover(n, tuple(frozenset(m) for m in members)), d - 1).simplices


def test_simplicial_complex_face_closure():
    with pytest.raises(InvariantError):
        SimplicialComplex(frozenset({(0, 1), (0,)}))


def test_filtered_complex_invariants():
    with pytest.raises(InvariantError):
        FilteredComplex((((0,), 1.0), ((1,), 0.0), ((0, 1), 0.5)))
    with pytest.raises(InvariantError):
        FilteredComplex((((0,), 0.0), ((0, 1), 0.5)))
    with pytest.raises(InvariantError):
        FilteredComplex((((0,), 0.0), ((0,), 0.5)))
    K = FilteredComplex((((1, 0), 2.0), ((1,), 0.0), ((0,), 1.0)))
    assert K.simplices == (((0,), 1.0), ((1,), 0.0), ((0, 1), 2.0))
    assert K.sublevel(1.0) == frozenset({(0,), (1,)})


def test_fuzzy_nerve_partition():
    g = Cover.from_labels([0, 1, 2, 0]).to_indicator()
    K = fuzzy_nerve_filtration(g, 2)
    assert K.simplices == (((0,), 0.0), ((1,), 0.0), ((2,), 0.0))


def test_fuzzy_nerve_single_point_edge():
    K = fuzzy_nerve_filtration(np.array([[1.0, 0.5]]), 1).as_dict()
    assert K[(0, 1)] == pytest.approx(math.log(2))
    assert K[(0,)] == 0.0


def test_fuzzy_nerve_threshold_sweep(rng):
    g = random_fuzzy(rng, 20, 3)
    K = fuzzy_nerve_filtration(g, 2)
    values = K.as_dict()
    for lam in np.linspace(0.0, 0.99, 100):
        thresholded = nerve(threshold(g, lam), 2).simplices
        from_filtration = {s for s, v in values.items() if math.exp(-v) > lam}
        assert thresholded == from_filtration
        assert lambda_sublevel(g, lam, 2) == thresholded


@given(st.integers(0, 10_000))
def test_fuzzy_nerve_compatibility(seed):
    rng = np.random.default_rng(seed)
    n, k, d = int(rng.integers(1, 31)), int(rng.integers(1, 6)), int(rng.integers(0, 3))
    g = random_fuzzy(rng, n, k)
    lams = brute_fuzzy_lambdas(g, d)
    got = fuzzy_nerve_lambdas(g, d)
    assert set(got) == set(lams)
    for s in lams:
        assert got[s] == lams[s]
    K = fuzzy_nerve_filtration(g, d)
    for lam in rng.uniform(0, 1, 5):
        assert nerve(threshold(g, lam), d).simplices == {s for s, v in K.simplices if math.exp(-v) > lam}


def test_intersection_sizes():
    c = Cover(6, (frozenset({0, 1, 2}), frozenset({2, 3}), frozenset({2, 3, 4, 5})))
    sizes = intersection_sizes(c, 2)
    assert sizes[(0,)] == 3 and sizes[(1, 2)] == 2 and sizes[(0, 1, 2)] == 1 and sizes[(0, 2)] == 1
