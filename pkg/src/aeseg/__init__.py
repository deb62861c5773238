"""Joint image segmentation and figure/ground layering.

Pairwise pixel relations (boundary and figural probabilities over a
multiscale stencil) are assembled into a sparse complex Hermitian
affinity matrix whose leading generalized eigenvectors encode both
grouping and a global depth-layer ordering. Decoding yields a per-pixel
rank map, soft boundaries, and an ultrametric segmentation hierarchy.
"""

from .affinity import (
    AffinityParams,
    assemble,
    degree_vector,
    pair_affinity,
    pair_energies,
    rescale_theta,
)
from .decoder import (
    BoundaryMap,
    RankMap,
    SegmentationHierarchy,
    SegmentationMap,
    cut_hierarchy,
    fg_order,
    spectral_boundaries,
    transfer_fg,
    watershed_hierarchy,
)
from .eigensolver import (
    ConvergenceError,
    EmbeddingResult,
    SolverConfig,
    ZeroDegreeError,
    dense_oracle,
    embedding_error,
    solve,
)
from .groundtruth import (
    OwnershipLabels,
    TargetTensors,
    globalize,
    gt_affinity,
    make_targets,
)
from .metrics import BenchmarkReport, adjacent_region_pairs, aggregate_reports, evaluate
from .stencil import (
    GridDomain,
    RelationMap,
    Stencil,
    boundary_prob,
    default_stencil,
    neighbor_of,
)
from .synth import SceneSpec, ShapeSpec, random_scene, render

__version__ = "0.1.0"

__all__ = [
    "AffinityParams",
    "BenchmarkReport",
    "BoundaryMap",
    "ConvergenceError",
    "EmbeddingResult",
    "GridDomain",
    "OwnershipLabels",
    "RankMap",
    "RelationMap",
    "SceneSpec",
    "SegmentationHierarchy",
    "SegmentationMap",
    "ShapeSpec",
    "SolverConfig",
    "Stencil",
    "TargetTensors",
    "ZeroDegreeError",
    "adjacent_region_pairs",
    "aggregate_reports",
    "assemble",
    "boundary_prob",
    "cut_hierarchy",
    "default_stencil",
    "degree_vector",
    "dense_oracle",
    "embedding_error",
    "evaluate",
    "fg_order",
    "globalize",
    "gt_affinity",
    "make_targets",
    "neighbor_of",
    "pair_affinity",
    "pair_energies",
    "random_scene",
    "render",
    "rescale_theta",
    "solve",
    "spectral_boundaries",
    "transfer_fg",
    "watershed_hierarchy",
]
