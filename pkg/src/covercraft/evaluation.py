"""Homology recovery quotient, complex sizes and the topological-inference harness."""

from __future__ import annotations

import math
import statistics
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from covercraft.baselines import vietoris_rips, witness_v0
from covercraft.complex import FilteredComplex, SimplicialComplex, fuzzy_nerve_filtration
from covercraft.errors import ParameterError
from covercraft.geometry import PointCloud, furthest_point_subsample, generate
from covercraft.learner import LearnConfig, shape_discover
from covercraft.persistence import Barcode, reduce_barcode

METHODS = ("shape_discover", "rips", "witness")
_ALIASES = {
    "shape_discover": "shape_discover",
    "shapediscover": "shape_discover",
    "rips": "rips",
    "subsample+rips": "rips",
    "s+rips": "rips",
    "witness": "witness",
    "witness_v0": "witness",
    "ball_mapper": "witness",
}


def recovery_window(bc: Barcode) -> tuple[float, float] | None:
    """``(a, b)``: smallest finite left endpoint and largest finite right endpoint."""
    lefts = [min(b, e) for _, b, e in bc.bars if math.isfinite(min(b, e))]
    rights = [max(b, e) for _, b, e in bc.bars if math.isfinite(max(b, e))]
    if not lefts or not rights:
        return None
    return min(lefts), max(rights)


def _betti_vector(bc: Barcode, r: float, n_dims: int) -> list[int]:
    out = [0] * n_dims
    for d, b, e in bc.bars:
        if d < n_dims and min(b, e) <= r < max(b, e):
            out[d] += 1
    return out


def homology_recovery_quotient(bc: Barcode, target: Sequence[int]) -> float:
    """Fraction of the finite window ``[a, b]`` on which the Betti numbers equal ``target``.

    ``a`` and ``b`` are the smallest finite left and largest finite right
    endpoints over all bars. Infinite bars still count towards the Betti
    numbers. A degenerate window gives 0 with a ``RuntimeWarning``.
    """
    target = list(target)
    if not target or any(t < 0 for t in target):
        raise ParameterError("target Betti numbers must be a nonempty list of nonnegative integers")
    window = recovery_window(bc)
    if window is None or window[1] <= window[0]:
        warnings.warn("barcode has no finite window; recovery quotient set to 0", RuntimeWarning)
        return 0.0
    a, b = window
    cuts = {a, b}
    for _, lo, hi in bc.bars:
        for x in (lo, hi):
            if a < x < b:
                cuts.add(x)
    cuts = sorted(cuts)
    good = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if _betti_vector(bc, lo, len(target)) == target:
            good += hi - lo
    return min(1.0, good / (b - a))


def complex_size(K) -> tuple[int, int]:
    """``(number of vertices, total number of simplices)``."""
    if isinstance(K, FilteredComplex):
        simplices = [s for s, _ in K.simplices]
    elif isinstance(K, SimplicialComplex):
        simplices = list(K.simplices)
    else:
        simplices = [tuple(s) for s in K]
    vertices = {v for s in simplices for v in s}
    return len(vertices), len(simplices)


@dataclass
class HarnessReport:
    method: str
    dataset: str
    budget: int
    vertices: int
    simplices: int
    quotient: float
    seconds: float
    stages: dict[str, float] = field(default_factory=dict)
    quotients: list[float] = field(default_factory=list)

    def row(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in ("stages", "quotients")}


def _load_dataset(dataset) -> tuple[str, PointCloud]:
    if isinstance(dataset, PointCloud):
        return "points", dataset
    if isinstance(dataset, np.ndarray):
        return "points", PointCloud(dataset)
    if isinstance(dataset, dict):
        kind = dataset["kind"]
        name = dataset.get("name", f"{kind}-{dataset.get('n', 2000)}")
        return name, generate(kind, int(dataset.get("n", 2000)), int(dataset.get("seed", 0)))
    if isinstance(dataset, str):
        return dataset, generate(dataset, 2000, 0)
    raise ParameterError(f"cannot interpret dataset spec {dataset!r}")


def _method_spec(method) -> tuple[str, dict]:
    if isinstance(method, dict):
        params = dict(method)
        name = params.pop("name")
    else:
        name, params = method, {}
    key = _ALIASES.get(str(name).lower())
    if key is None:
        raise ParameterError(f"unknown method {name!r}; expected one of {METHODS}")
    return key, params


def filtration_for(method: str, X: PointCloud, budget: int, max_dim: int, seed: int,
                   params: dict | None = None) -> tuple[FilteredComplex, dict[str, float]]:
    """Build the filtered complex of ``method`` at the given vertex budget, with stage timings."""
    params = dict(params or {})
    clock = time.perf_counter
    stages: dict[str, float] = {}
    if method == "shape_discover":
        cfg = LearnConfig(**{**params, "n_cov": budget, "seed": seed, "max_dim": max_dim})
        cover, trace = shape_discover(X, cfg)
        stages.update(trace.timings)
        t0 = clock()
        K = fuzzy_nerve_filtration(cover, max_dim)
        stages["nerve"] = clock() - t0
    elif method == "rips":
        t0 = clock()
        idx = furthest_point_subsample(X, budget, seed)
        stages["subsample"] = clock() - t0
        t0 = clock()
        K = vietoris_rips(X.points[idx], max_dim, float(params.get("max_radius", np.inf)))
        stages["complex"] = clock() - t0
    elif method == "witness":
        t0 = clock()
        idx = furthest_point_subsample(X, budget, seed)
        stages["subsample"] = clock() - t0
        t0 = clock()
        K = witness_v0(X, idx, max_dim)
        stages["complex"] = clock() - t0
    else:
        raise ParameterError(f"unknown method {method!r}")
    return K, stages


def inference_harness(dataset, method, budget: int, target: Sequence[int],
                      seeds: Sequence[int] = (0, 1, 2), max_dim: int | None = None) -> HarnessReport:
    """Run one (dataset, method, vertex budget) cell and score it against ``target``.

    Every seed is run; the quotient, sizes and timings reported are medians.
    ``max_dim`` defaults to ``len(target)`` so that classes in the top target
    dimension can die.
    """
    if budget < 1:
        raise ParameterError("vertex budget must be positive")
    name, X = _load_dataset(dataset)
    key, params = _method_spec(method)
    target = list(target)
    if max_dim is None:
        max_dim = len(target)
    quotients, sizes, totals, stage_runs = [], [], [], []
    for seed in seeds:
        start = time.perf_counter()
        K, stages = filtration_for(key, X, budget, max_dim, int(seed), params)
        t0 = time.perf_counter()
        bc = reduce_barcode(K, max_hom_dim=len(target) - 1)
        stages["barcode"] = time.perf_counter() - t0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            quotients.append(homology_recovery_quotient(bc, target))
        sizes.append(complex_size(K))
        totals.append(time.perf_counter() - start)
        stage_runs.append(stages)
    stage_names = sorted({s for run in stage_runs for s in run})
    stages = {s: statistics.median(run.get(s, 0.0) for run in stage_runs) for s in stage_names}
    return HarnessReport(
        method=key,
        dataset=name,
        budget=budget,
        vertices=int(statistics.median(v for v, _ in sizes)),
        simplices=int(statistics.median(s for _, s in sizes)),
        quotient=float(statistics.median(quotients)),
        seconds=float(statistics.median(totals)),
        stages=stages,
        quotients=quotients,
    )
