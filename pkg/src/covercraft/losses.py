"""Graph estimators of the measure, geometry, topology and regularization losses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from covercraft.errors import ParameterError
from covercraft.geometry import WeightedGraph
from covercraft.persistence import H0Attribution, h0_columns, h0_subgradient


@dataclass(frozen=True)
class LossWeights:
    alpha_M: float = 1.0
    alpha_G: float = 1.0
    alpha_T: float = 1.0
    alpha_R: float = 1.0

    def __post_init__(self):
        for name in ("alpha_M", "alpha_G", "alpha_T", "alpha_R"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and nonnegative, got {value}")

    @classmethod
    def from_reg(cls, reg: float) -> "LossWeights":
        """Weights of the training objective ``M + reg*G + T + reg*R``."""
        return cls(1.0, reg, 1.0, reg)


@dataclass(frozen=True)
class Normalization:
    eta_M: float
    eta_G: float
    eta_T: float
    eta_R: float

    @classmethod
    def for_graph(cls, graph: WeightedGraph, k: int) -> "Normalization":
        n = graph.n
        W = graph.total_weight
        # an edgeless graph makes G and R identically zero; any finite constant works
        W = W if W > 0 else 1.0
        return cls(1.0 / (k * n * n), 1.0 / (k * W * W), 1.0 / (k * n), 1.0 / (k * W))


@dataclass
class LossReport:
    m: float
    g_loss: float
    t0: float
    r: float
    total: float
    gradient: np.ndarray
    attributions: list | None = None

    def to_dict(self) -> dict:
        return {"m": self.m, "g_loss": self.g_loss, "t0": self.t0, "r": self.r, "total": self.total}


def _as_matrix(g) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2:
        raise ParameterError(f"expected an n x k matrix, got shape {g.shape}")
    return g


def _check_graph(g: np.ndarray, graph: WeightedGraph):
    if graph.n != g.shape[0]:
        raise ParameterError(f"graph has {graph.n} vertices but the cover has {g.shape[0]} rows")


def measure_loss(g, eta_M: float | None = None):
    g = _as_matrix(g)
    n, k = g.shape
    eta = 1.0 / (k * n * n) if eta_M is None else eta_M
    mass = g.sum(axis=0)
    value = eta * float(mass @ mass)
    grad = np.broadcast_to(2.0 * eta * mass, g.shape).copy()
    return value, grad


def _edge_diffs(g, graph):
    return g[graph.u] - g[graph.v]


def _scatter_edges(per_edge: np.ndarray, graph: WeightedGraph, n: int) -> np.ndarray:
    """Add ``per_edge`` rows into ``u`` and subtract them from ``v``."""
    return np.asarray(graph.incidence @ per_edge)


def _edge_scale(graph: WeightedGraph, k: int, eta: float | None, power: int) -> tuple[float, np.ndarray]:
    """Scale ``eta * W**power`` and the edge probabilities ``w / W``.

    Both losses are computed against ``p = w / W``; with the default
    normalization the scale is exactly ``1/k``, so cases where the two losses
    agree mathematically also agree in floating point.
    """
    W = graph.total_weight
    if W <= 0:
        return 0.0, graph.w
    c = 1.0 / k if eta is None else eta * W**power
    return c, graph.w / W


def geometry_loss(g, graph: WeightedGraph, eta_G: float | None = None):
    g = _as_matrix(g)
    _check_graph(g, graph)
    n, k = g.shape
    c, p = _edge_scale(graph, k, eta_G, 2)
    diff = _edge_diffs(g, graph)
    mean = (p[:, None] * np.abs(diff)).sum(axis=0)
    value = c * float((mean * mean).sum())
    per_edge = 2.0 * c * mean[None, :] * p[:, None] * np.sign(diff)
    return value, _scatter_edges(per_edge, graph, n)


def regularization_loss(g, graph: WeightedGraph, eta_R: float | None = None):
    g = _as_matrix(g)
    _check_graph(g, graph)
    n, k = g.shape
    c, p = _edge_scale(graph, k, eta_R, 1)
    diff = _edge_diffs(g, graph)
    second = (p[:, None] * np.abs(diff) * np.abs(diff)).sum(axis=0)
    value = c * float(second.sum())
    return value, _scatter_edges(2.0 * c * p[:, None] * diff, graph, n)


def topology_loss(g, graph: WeightedGraph, eta_T: float | None = None,
                  attributions: list[H0Attribution] | None = None):
    """Squared reduced-H0 total persistence of each column, summed and scaled.

    When ``attributions`` is given the barcode pairing is not recomputed; each
    column's persistence is re-evaluated on the stored birth/death vertices.
    Returns ``(value, subgradient, attributions)``.
    """
    g = _as_matrix(g)
    _check_graph(g, graph)
    n, k = g.shape
    if eta_T is None:
        eta_T = Normalization.for_graph(graph, k).eta_T
    if attributions is None:
        results = h0_columns(graph, g)
        totals = np.array([t for t, _ in results])
        attributions = [a for _, a in results]
    else:
        totals = np.array([float(np.sum(g[a.birth, i] - g[a.death_vertex, i]))
                           for i, a in enumerate(attributions)])
    value = eta_T * float(totals @ totals)
    grad = np.zeros_like(g)
    for i, att in enumerate(attributions):
        if totals[i] != 0.0:
            grad[:, i] = 2.0 * eta_T * totals[i] * h0_subgradient(att, n)
    return value, grad, attributions


def combined_loss(g, graph: WeightedGraph, weights: LossWeights,
                  norm: Normalization | None = None,
                  attributions: list[H0Attribution] | None = None) -> LossReport:
    g = _as_matrix(g)
    _check_graph(g, graph)
    if norm is None:
        norm = Normalization.for_graph(graph, g.shape[1])
    grad = np.zeros_like(g)
    m = gl = t0 = r = 0.0
    used = None
    if weights.alpha_M:
        m, dm = measure_loss(g, norm.eta_M)
        grad += weights.alpha_M * dm
    # with the default normalization the edge losses use their exact 1/k scale
    default = norm == Normalization.for_graph(graph, g.shape[1])
    if weights.alpha_G:
        gl, dg = geometry_loss(g, graph, None if default else norm.eta_G)
        grad += weights.alpha_G * dg
    if weights.alpha_T:
        t0, dt, used = topology_loss(g, graph, norm.eta_T, attributions)
        grad += weights.alpha_T * dt
    if weights.alpha_R:
        r, dr = regularization_loss(g, graph, None if default else norm.eta_R)
        grad += weights.alpha_R * dr
    total = weights.alpha_M * m + weights.alpha_G * gl + weights.alpha_T * t0 + weights.alpha_R * r
    return LossReport(m, gl, t0, r, total, grad, used)
