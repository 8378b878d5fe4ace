"""Robust K-medians clustering with automatic selection of the number of clusters.

Geometric-median estimation (Weiszfeld fixed point and averaged
stochastic gradient), offline / semi-online / online K-medians plus a
K-means baseline, a slope-calibrated penalized criterion for choosing k
(with gap-statistic and silhouette alternatives), synthetic contaminated
benchmarks, and evaluation metrics.
"""

from .clustering import (
    ALGORITHMS,
    ClusteringResult,
    InitMethod,
    assign,
    empirical_distortion,
    init_centers,
    kmeans_baseline,
    lloyd_kmedians,
    online_kmedians,
    run_clustering,
)
from .evaluation import TrialSummary, adjusted_rand_index, centroid_l1_error, summarize_trials
from .geomedian import AsgConfig, MedianEstimate, asg_median, l1_objective, weiszfeld_median
from .selection import (
    DistortionCurve,
    SelectionReport,
    distortion_curve,
    gap_select,
    mean_silhouette,
    penalty_shape,
    run_selection,
    silhouette_select,
    slope_select,
)
from .simulation import (
    ContaminationSpec,
    LabeledDataset,
    MixtureSpec,
    contaminate,
    make_scenario,
    sample_mixture,
    sphere_centers,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AsgConfig",
    "ClusteringResult",
    "ContaminationSpec",
    "DistortionCurve",
    "InitMethod",
    "LabeledDataset",
    "MedianEstimate",
    "MixtureSpec",
    "SelectionReport",
    "TrialSummary",
    "adjusted_rand_index",
    "asg_median",
    "assign",
    "centroid_l1_error",
    "contaminate",
    "distortion_curve",
    "empirical_distortion",
    "gap_select",
    "init_centers",
    "kmeans_baseline",
    "l1_objective",
    "lloyd_kmedians",
    "make_scenario",
    "mean_silhouette",
    "online_kmedians",
    "penalty_shape",
    "run_clustering",
    "run_selection",
    "sample_mixture",
    "silhouette_select",
    "slope_select",
    "sphere_centers",
    "summarize_trials",
    "weiszfeld_median",
]
