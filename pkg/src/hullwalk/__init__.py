"""Convex hulls of planar random walks: exact geometry, exact expectation
formulas, rigorous variance bounds, and a deterministic parallel Monte
Carlo engine for the scaling-limit constants."""

__version__ = "0.1.0"

from .geometry import (
    ConvexPolygon,
    PolyPath,
    Vec2,
    area,
    cauchy_perimeter,
    convex_hull,
    hausdorff,
    hull_of_path,
    merge_hulls,
    parallel_body_area_mc,
    path_sup_distance,
    perimeter,
    support_function,
)
from .walks import (
    Atoms,
    BUILTIN_MODELS,
    Gaussian,
    IncrementModel,
    PathSample,
    SpaceTime,
    WalkStats,
    increment_stats,
    matrix_sqrt,
    sample_increments,
    sample_path,
    scale_drift,
    scale_zero_drift,
    walk_hull,
)
from .oracles import (
    BoundsReport,
    LIMITS,
    LimitConstants,
    asymptotic_predictions,
    bnb_EA,
    expected_norm_atoms,
    expected_norm_gaussian,
    pi_sum_check,
    spitzer_widom_EL,
    variance_bounds,
)
from .montecarlo import (
    EstimatorReport,
    ExperimentConfig,
    Sample,
    brownian_reference,
    ks_distance,
    moment_growth_diagnostic,
    run_experiment,
    snyder_steele_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
