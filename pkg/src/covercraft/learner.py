"""ShapeDiscover: learn a fuzzy cover by gradient descent on graph loss estimators."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from covercraft.errors import InvariantError, NumericError, ParameterError
from covercraft.geometry import WeightedGraph, as_points, neighborhood_graph
from covercraft.losses import LossWeights, Normalization, combined_loss

log = logging.getLogger(__name__)

DENSE_EIGEN_LIMIT = 3000
DEGREE_EPS = 1e-12


@dataclass(frozen=True)
class LearnConfig:
    n_cov: int = 10
    n_neigh: int = 15
    reg: float = 10.0
    lr: float = 0.1
    n_epoch: int = 500
    p: float = 5.0
    lam: float = 0.5
    seed: int = 0
    graph_kind: str = "umap"
    max_dim: int = 2
    margin: float = 4.0
    # recompute the persistence pairing every this many epochs (1 = every epoch)
    persistence_every: int = 1
    tol: float = 1e-7
    patience: int = 20

    def __post_init__(self):
        if self.n_cov < 1:
            raise ParameterError("n_cov must be positive")
        if self.n_neigh < 1:
            raise ParameterError("n_neigh must be positive")
        if self.reg < 0:
            raise ParameterError("reg must be nonnegative")
        if not self.lr > 0:
            raise ParameterError("lr must be positive")
        if self.n_epoch < 0:
            raise ParameterError("n_epoch must be nonnegative")
        if not 1.0 <= self.p < np.inf:
            raise ParameterError("p must lie in [1, inf)")
        if not 0.0 <= self.lam < 1.0:
            raise ParameterError("lam must lie in [0, 1)")
        if self.graph_kind not in ("umap", "unit", "unit-knn", "knn"):
            raise ParameterError(f"unknown graph kind {self.graph_kind!r}")
        if not 0 <= self.max_dim <= 4:
            raise ParameterError("max_dim must lie in [0, 4]")
        if self.persistence_every < 1:
            raise ParameterError("persistence_every must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def softmax_rows(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    z = np.exp(theta - theta.max(axis=1, keepdims=True))
    return z / z.sum(axis=1, keepdims=True)


def _row_norm(h: np.ndarray, p: float) -> np.ndarray:
    top = h.max(axis=1, keepdims=True)
    if np.isinf(p):
        return top
    # factor out the row max so h**p cannot underflow to a zero norm
    safe = np.where(top > 0, top, 1.0)
    return np.where(top > 0, safe * (((h / safe) ** p).sum(axis=1, keepdims=True) ** (1.0 / p)), 0.0)


def pi_p(h, p: float) -> np.ndarray:
    """Rescale each row to unit ``p``-norm (``p = inf`` divides by the row max)."""
    h = np.asarray(h, dtype=np.float64)
    norm = _row_norm(h, p)
    if np.any(norm <= 0):
        raise InvariantError("cannot normalize a zero row")
    return h / norm


def fuzzy_cover_from_theta(theta) -> np.ndarray:
    return pi_p(softmax_rows(theta), np.inf)


def chain_gradient(theta, p: float, upstream) -> np.ndarray:
    """Backpropagate ``upstream`` (w.r.t. ``pi_p(softmax(theta))``) to ``theta``."""
    h = softmax_rows(theta)
    norm = _row_norm(h, p)
    y = h / norm
    upstream = np.asarray(upstream, dtype=np.float64)
    # y = h / N with N = ||h||_p, and dN/dh_j = y_j^(p-1)
    grad_h = (upstream - (upstream * y).sum(axis=1, keepdims=True) * y ** (p - 1.0)) / norm
    return h * (grad_h - (grad_h * h).sum(axis=1, keepdims=True))


def _embedding(graph: WeightedGraph, k: int, seed: int) -> np.ndarray:
    A = graph.adjacency()
    deg = np.asarray(A.sum(axis=1)).reshape(-1)
    deg = np.where(deg > 0, deg, DEGREE_EPS)
    dinv = 1.0 / np.sqrt(deg)
    M = A.multiply(dinv[:, None]).multiply(dinv[None, :]).tocsr()
    n = graph.n
    if n <= DENSE_EIGEN_LIMIT or k >= n - 1:
        laplacian = np.eye(n) - M.toarray()
        _, vecs = np.linalg.eigh(laplacian)
        vecs = vecs[:, :k]
    else:
        v0 = np.random.default_rng(seed).standard_normal(n)
        vals, vecs = spla.eigsh(M, k=k, which="LA", v0=v0, tol=1e-8)
        vecs = vecs[:, np.argsort(-vals)]
    emb = dinv[:, None] * vecs
    lengths = np.linalg.norm(emb, axis=1, keepdims=True)
    return emb / np.where(lengths > 0, lengths, 1.0)


def kmeans_labels(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    from sklearn.cluster import KMeans

    km = KMeans(n_clusters=k, init="k-means++", n_init=10, max_iter=100, random_state=seed)
    return km.fit_predict(points)


def spectral_init(graph: WeightedGraph, k: int, seed: int = 0) -> np.ndarray:
    """Spectral clustering of the graph, returned as an indicator fuzzy cover."""
    if k > graph.n:
        raise ParameterError(f"cannot cluster {graph.n} vertices into {k} groups")
    if k < 1:
        raise ParameterError("k must be positive")
    labels = kmeans_labels(_embedding(graph, k, seed), k, seed)
    g = np.zeros((graph.n, k))
    g[np.arange(graph.n), labels] = 1.0
    return g


def theta_from_cover(g0, margin: float = 4.0) -> np.ndarray:
    return margin * np.asarray(g0, dtype=np.float64)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, theta) -> "AdamState":
        theta = np.asarray(theta)
        return cls(np.zeros_like(theta, dtype=np.float64), np.zeros_like(theta, dtype=np.float64))


def adam_step(theta, grad, state: AdamState, lr: float):
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape:
        raise ParameterError(f"gradient shape {grad.shape} does not match parameters {theta.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    new = theta - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new, AdamState(m, v, t, state.beta1, state.beta2, state.eps)


@dataclass
class TrainTrace:
    history: list[dict] = field(default_factory=list)
    cover: np.ndarray | None = None
    initial_cover: np.ndarray | None = None
    graph: WeightedGraph | None = None
    timings: dict[str, float] = field(default_factory=dict)
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.history)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"epoch": i, **rec}) for i, rec in enumerate(self.history)]
        return "".join(line + "\n" for line in lines)


def _converged(history: list[dict], tol: float, patience: int) -> bool:
    if len(history) <= patience:
        return False
    now, then = history[-1]["total"], history[-1 - patience]["total"]
    return abs(now - then) <= tol * max(abs(then), np.finfo(float).tiny)


def shape_discover(X, cfg: LearnConfig | None = None, graph: WeightedGraph | None = None):
    """Learn a fuzzy cover of a point cloud.

    Builds a neighborhood graph, initializes with spectral clustering, and
    minimizes ``M + reg*G + T0 + reg*R`` evaluated on ``pi_p(softmax(theta))``
    with full-batch Adam. Returns ``(cover, trace)`` where ``cover`` is
    ``pi_inf(softmax(theta))``.

    Parameters
    ----------
    X : PointCloud or array of shape (n, N)
    cfg : LearnConfig, optional
        Defaults to ``LearnConfig()``.
    graph : WeightedGraph, optional
        Skip graph construction and use this graph instead.
    """
    cfg = cfg or LearnConfig()
    pts = as_points(X)
    n = pts.shape[0]
    if n < cfg.n_cov:
        raise ParameterError(f"need at least n_cov={cfg.n_cov} points, got {n}")
    trace = TrainTrace()
    clock = time.perf_counter

    t0 = clock()
    if graph is None:
        graph = neighborhood_graph(pts, cfg.n_neigh, cfg.graph_kind)
    trace.timings["graph"] = clock() - t0

    t0 = clock()
    g0 = spectral_init(graph, cfg.n_cov, cfg.seed)
    theta = theta_from_cover(g0, cfg.margin)
    trace.timings["init"] = clock() - t0

    weights = LossWeights.from_reg(cfg.reg)
    norm = Normalization.for_graph(graph, cfg.n_cov)
    state = AdamState.zeros_like(theta)
    attributions = None

    t0 = clock()
    for epoch in range(cfg.n_epoch):
        y = pi_p(softmax_rows(theta), cfg.p)
        reuse = attributions if epoch % cfg.persistence_every else None
        report = combined_loss(y, graph, weights, norm, reuse)
        if not np.isfinite(report.total) or not np.all(np.isfinite(report.gradient)):
            raise NumericError(f"non-finite loss at epoch {epoch}: {report.to_dict()}")
        attributions = report.attributions
        grad = chain_gradient(theta, cfg.p, report.gradient)
        theta, state = adam_step(theta, grad, state, cfg.lr)
        trace.history.append(report.to_dict())
        if _converged(trace.history, cfg.tol, cfg.patience):
            trace.stopped_early = True
            log.info("converged after %d epochs", epoch + 1)
            break
    trace.timings["optimize"] = clock() - t0

    cover = fuzzy_cover_from_theta(theta)
    trace.cover = cover
    trace.initial_cover = g0
    trace.graph = graph
    return cover, trace
