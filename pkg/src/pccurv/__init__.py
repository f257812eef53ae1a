"""Adaptive local-PCA curvature estimation for 3-D point clouds."""

from .curvature import (
    CurvatureConfig,
    CurvatureResult,
    DirectionalSamples,
    directional_samples,
    estimate_all,
    estimate_point,
    principal_from_samples,
    results_arrays,
)
from .errors import CurvatureError
from .frames import LocalFrame, orient_normal, weighted_local_pca
from .geometry import Kernel, NeighborSet, PointCloud, build_cloud, data_bound, kernel_eval, neighbors_within
from .metrics import MetricReport, energy_distance, pearson, rmse, run_benchmark, summarize
from .scales import ScalePair, SweepConfig, VarianceProfile, select_scales, variance_profile
from .surfaces import (
    Ellipsoid,
    GroundTruth,
    HyperbolicParaboloid,
    Plane,
    Sphere,
    Torus,
    add_noise,
    analytic_curvature,
    parse_surface,
    sample_surface,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureConfig", "CurvatureError", "CurvatureResult", "DirectionalSamples",
    "Ellipsoid", "GroundTruth", "HyperbolicParaboloid", "Kernel", "LocalFrame",
    "MetricReport", "NeighborSet", "Plane", "PointCloud", "ScalePair", "Sphere",
    "SweepConfig", "Torus", "VarianceProfile", "add_noise", "analytic_curvature",
    "build_cloud", "data_bound", "directional_samples", "energy_distance",
    "estimate_all", "estimate_point", "kernel_eval", "neighbors_within",
    "orient_normal", "parse_surface", "pearson", "principal_from_samples",
    "results_arrays", "rmse", "run_benchmark", "sample_surface", "select_scales",
    "summarize", "variance_profile", "weighted_local_pca",
]
