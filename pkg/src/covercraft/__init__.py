"""Cover learning for point clouds, with nerve and persistence tooling."""

from covercraft.geometry import (
    PointCloud,
    WeightedGraph,
    knn_graph,
    umap_graph,
    epsilon_net,
    furthest_point_subsample,
    sample_sphere,
    sample_circle,
    sample_blobs,
)
from covercraft.complex import (
    Cover,
    SimplicialComplex,
    FilteredComplex,
    threshold,
    nerve,
    fuzzy_nerve_filtration,
)
from covercraft.persistence import Barcode, h0_suplevel, h0_subgradient, reduce_barcode, betti_curve
from covercraft.losses import LossWeights, LossReport, combined_loss
from covercraft.learner import LearnConfig, TrainTrace, shape_discover
from covercraft.baselines import ball_mapper, witness_v0, mapper_1d, vietoris_rips, uniform_cover
from covercraft.evaluation import homology_recovery_quotient, complex_size, inference_harness

__version__ = "0.1.0"

__all__ = [
    "PointCloud",
    "WeightedGraph",
    "knn_graph",
    "umap_graph",
    "epsilon_net",
    "furthest_point_subsample",
    "sample_sphere",
    "sample_circle",
    "sample_blobs",
    "Cover",
    "SimplicialComplex",
    "FilteredComplex",
    "threshold",
    "nerve",
    "fuzzy_nerve_filtration",
    "Barcode",
    "h0_suplevel",
    "h0_subgradient",
    "reduce_barcode",
    "betti_curve",
    "LossWeights",
    "LossReport",
    "combined_loss",
    "LearnConfig",
    "TrainTrace",
    "shape_discover",
    "ball_mapper",
    "witness_v0",
    "mapper_1d",
    "vietoris_rips",
    "uniform_cover",
    "homology_recovery_quotient",
    "complex_size",
    "inference_harness",
]
