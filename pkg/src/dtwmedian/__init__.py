"""Clustering of point sequences under the p-dynamic-time-warping distance:
exact and quantized distances, curve simplification, metric closures,
bicriteria and coreset-backed (k,l)-median."""

from .curves import (
    Curve,
    CurveSet,
    ParseError,
    PipelineConfig,
    ResourceGuardError,
    ValidationError,
    WeightedCurveSet,
    gen_synthetic,
    load_curves,
    load_weighted,
    save_curves,
    save_weighted,
)
from .dtw import (
    DtwResult,
    QuantizedDistance,
    Traversal,
    adtw,
    ball_membership,
    dtw,
    dtw_brute,
    dtw_matrix,
    dtw_self_matrix,
    dtw_value,
)
from .simplify import (
    simplify_2approx,
    simplify_eps_p1,
    simplify_exact_p2,
    simplify_vertex_restricted,
)
from .closure import MetricClosure, build_closure, distances_from_set
from .kmedian import (
    FiniteMetricInstance,
    MedianSolution,
    kmedian_brute,
    kmedian_local_search,
)
from .bicriteria import BicriteriaSolution, bicriteria_klmedian, k_median_sampled, k_routine
from .coreset import (
    CoresetSizeReport,
    SensitivityProfile,
    coreset_sample,
    coreset_size,
    cost,
    sensitivity_bounds,
    verify_coreset,
)
from .pipeline import ClusteringResult, cluster_via_closure, emit_coreset_only, evaluate, kl_median

__version__ = "0.1.0"
