import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covercraft.errors import DomainError, ParameterError
from covercraft.geometry import (
    PointCloud,
    WeightedGraph,
    epsilon_net,
    furthest_point_subsample,
    fuzzy_union,
    generate,
    knn_graph,
    sample_blobs,
    sample_circle,
    sample_sphere,
    umap_graph,
)

from oracles import umap_reference


def test_point_cloud_validation():
    with pytest.raises(DomainError):
        PointCloud(np.zeros((0, 2)))
    with pytest.raises(DomainError):
        PointCloud(np.array([[0.0, np.nan]]))
    with pytest.raises(DomainError):
        PointCloud(np.zeros(3))
    assert PointCloud([[1, 2], [3, 4]]).n == 2


def test_weighted_graph_invariants():
    with pytest.raises(ParameterError):
        WeightedGraph.from_edges(3, [(1, 1, 1.0)])
    with pytest.raises(ParameterError):
        WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(ParameterError):
        WeightedGraph.from_edges(3, [(0, 1, 0.0)])
    with pytest.raises(ParameterError):
        WeightedGraph.from_edges(3, [(0, 5, 1.0)])
    G = WeightedGraph.from_edges(4, [(2, 1, 0.5), (0, 3, 1.5)])
    assert G.edges == [(0, 3, 1.5), (1, 2, 0.5)]
    assert G.total_weight == 2.0


def test_knn_collinear():
    G = knn_graph(np.array([[0.0], [1.0], [2.0]]), 1)
    assert G.edges == [(0, 1, 1.0), (1, 2, 1.0)]


def test_knn_square_excludes_diagonals():
    X = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    # brute-force distance sort
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    expected = set()
    for i in range(4):
        for j in [j for j in np.argsort(D[i], kind="stable") if j != i][:2]:
            expected.add((min(i, j), max(i, j)))
    G = knn_graph(X, 2)
    assert G.edge_set() == expected == {(0, 1), (1, 2), (2, 3), (0, 3)}


def test_knn_complete_graph(rng):
    X = rng.standard_normal((9, 3))
    G = knn_graph(X, 8)
    assert G.n_edges == 9 * 8 // 2
    assert np.all(G.w == 1.0)


def test_knn_parameter_error():
    with pytest.raises(ParameterError):
        knn_graph(np.zeros((3, 2)) + np.arange(3)[:, None], 3)


def test_umap_nearest_neighbor_weight_one():
    # a lone nearest neighbor has zero excess distance, so its directed weight is 1
    X = np.array([[0.0], [1.0], [3.0], [7.0]])
    G = umap_graph(X, 2)
    w = {(u, v): c for u, v, c in G.edges}
    assert w[(0, 1)] == pytest.approx(1.0)
    assert w[(2, 3)] == pytest.approx(1.0)


def test_umap_equilateral_triangle():
    X = np.array([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])
    G = umap_graph(X, 2)
    assert G.n_edges == 3
    assert np.allclose(G.w, G.w[0])


def test_umap_matches_reference_circle():
    t = np.linspace(0, 2 * np.pi, 10, endpoint=False) + 0.05 * np.sin(np.arange(10) * 1.7)
    X = np.column_stack([np.cos(t), np.sin(t)])
    ref = umap_reference(X, 3)
    G = umap_graph(X, 3)
    got = {(u, v): w for u, v, w in G.edges}
    assert set(got) == {e for e, w in ref.items() if w >= 1e-6}
    for e, w in got.items():
        assert w == pytest.approx(ref[e], rel=1e-9, abs=1e-12)


def test_umap_weights_in_unit_interval(rng):
    X = rng.standard_normal((60, 3))
    G = umap_graph(X, 7)
    assert np.all(G.w > 0) and np.all(G.w <= 1)


@given(st.floats(0, 1), st.floats(0, 1))
def test_fuzzy_union_symmetric(a, b):
    assert fuzzy_union(a, b) == pytest.approx(fuzzy_union(b, a))
    assert max(a, b) - 1e-12 <= fuzzy_union(a, b) <= 1.0 + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_knn_and_umap_edge_sets(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((80, 2))
    knn, umap = knn_graph(X, 10), umap_graph(X, 10)
    # umap drops only weights under 1e-6, so its edges are a subset, equal for generic clouds
    assert umap.edge_set() <= knn.edge_set()
    assert umap.edge_set() == knn.edge_set()


def test_epsilon_net_big_eps(rng):
    X = rng.uniform(size=(30, 2))
    assert len(epsilon_net(X, 10.0, seed=3)) == 1


def test_epsilon_net_two_points():
    assert sorted(epsilon_net(np.array([[0.0], [1.0]]), 0.5)) == [0, 1]


def test_epsilon_net_grid_properties():
    g = np.linspace(0, 1, 10)
    X = np.array(list(itertools.product(g, g)))
    net = epsilon_net(X, 0.3, seed=7)
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    sub = D[np.ix_(net, net)]
    assert np.all(sub[~np.eye(len(net), dtype=bool)] > 0.3)
    assert np.all(D[:, net].min(axis=1) <= 0.3)


@given(st.integers(0, 10_000), st.floats(0.05, 1.0))
def test_epsilon_net_property(seed, eps):
    X = np.random.default_rng(seed).uniform(size=(40, 2))
    net = epsilon_net(X, eps, seed)
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    assert np.all(D[:, net].min(axis=1) <= eps)
    sub = D[np.ix_(net, net)]
    assert np.all(sub[~np.eye(len(net), dtype=bool)] > eps)


def test_sphere_norms_mean_and_determinism():
    S = sample_sphere(2, 10_000, seed=1).points
    assert S.shape == (10_000, 3)
    assert np.all(np.abs(np.linalg.norm(S, axis=1) - 1) < 1e-12)
    assert np.all(np.abs(S.mean(axis=0)) < 0.05)
    assert np.array_equal(S, sample_sphere(2, 10_000, seed=1).points)
    assert sample_sphere(3, 5, seed=0).points.shape == (5, 4)
    with pytest.raises(ParameterError):
        sample_sphere(4, 5)


def test_circle_and_blobs():
    C = sample_circle(200, seed=2).points
    assert np.allclose(np.linalg.norm(C, axis=1), 1.0)
    B = sample_blobs(100, seed=0).points
    assert B.shape == (100, 2)
    assert np.array_equal(generate("blobs", 100, 0).points, B)
    with pytest.raises(ParameterError):
        generate("torus", 10)


def test_furthest_point_permutation(rng):
    X = rng.standard_normal((12, 2))
    assert sorted(furthest_point_subsample(X, 12, seed=4)) == list(range(12))


def test_furthest_point_square_diagonal():
    X = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    seed = next(s for s in range(100) if furthest_point_subsample(X, 1, s) == [0])
    assert furthest_point_subsample(X, 2, seed) == [0, 2]


@pytest.mark.parametrize("seed", range(5))
def test_furthest_point_matches_argmax(seed):
    X = np.random.default_rng(seed).standard_normal((10, 2))
    got = furthest_point_subsample(X, 3, seed)
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    chosen = [got[0]]
    for _ in range(2):
        best = max((j for j in range(10) if j not in chosen),
                   key=lambda j: (min(D[j, c] for c in chosen), -j))
        chosen.append(best)
    assert got == chosen


def test_graph_permutation(rng):
    G = knn_graph(rng.standard_normal((10, 2)), 3)
    perm = rng.permutation(10)
    H = G.permuted(perm)
    assert H.edge_set() == {tuple(sorted((int(perm[u]), int(perm[v])))) for u, v in G.edge_set()}
