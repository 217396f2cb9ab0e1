"""Rotation-invariant sketches of star-shaped planar outlines."""

from .analysis import (
    ClusterResult,
    SketchIndex,
    kmeans,
    knn,
    r_star_distance,
    rotation_cluster_accuracy,
    sketch_distance,
    star_distance,
)
from .circfn import (
    CircleFunction,
    canonical_form,
    difference_table,
    equivalent,
    general_position,
    lag_homometric,
    roc,
    roc_canonical_form,
    rotate,
    shift,
    verify_injectivity,
)
from .errors import (
    DegenerateShapeError,
    GeneralPositionError,
    InputError,
    MismatchError,
    NotStarShapedError,
    NumericalRejection,
    OverflowRiskError,
    StarSketchError,
)
from .geometry import (
    Outline,
    StandardizedOutline,
    StarFunction,
    rotate_outline,
    standardize,
    star_discretize,
)
from .sketch import (
    PhiSpec,
    RandomSketch,
    Sketch,
    gram_matrix,
    hoeffding_samples,
    kernel,
    phi_range_bound,
    sketch,
    sketch_direct,
    sketch_fft,
    sketch_random,
)
from .synthesis import StarShapeParams, synthesize_star_shape

__version__ = "0.1.0"

__all__ = [
    "CircleFunction",
    "ClusterResult",
    "DegenerateShapeError",
    "GeneralPositionError",
    "InputError",
    "MismatchError",
    "NotStarShapedError",
    "NumericalRejection",
    "Outline",
    "OverflowRiskError",
    "PhiSpec",
    "RandomSketch",
    "Sketch",
    "SketchIndex",
    "StandardizedOutline",
    "StarFunction",
    "StarShapeParams",
    "StarSketchError",
    "canonical_form",
    "difference_table",
    "equivalent",
    "general_position",
    "gram_matrix",
    "hoeffding_samples",
    "kernel",
    "kmeans",
    "knn",
    "lag_homometric",
    "phi_range_bound",
    "r_star_distance",
    "roc",
    "roc_canonical_form",
    "rotate",
    "rotate_outline",
    "rotation_cluster_accuracy",
    "shift",
    "sketch",
    "sketch_direct",
    "sketch_distance",
    "sketch_fft",
    "sketch_random",
    "standardize",
    "star_discretize",
    "star_distance",
    "synthesize_star_shape",
    "verify_injectivity",
]
