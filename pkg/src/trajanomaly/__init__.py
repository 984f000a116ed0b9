"""Crowd-trajectory anomaly detection toolkit.

Clusters scene trajectories independently in four feature spaces (density,
shape, mean position, dispersion) with mean-shift, scores each trajectory by
the Shannon entropy of its distance distribution over cluster centers, and
majority-votes the final anomaly set. Ships a synthetic labeled-scene
generator, an evaluation harness, and a CLI that emits JSON reports and SVG
panels.
"""

from .detector import AnomalyReport, DetectorConfig, detect
from .features import FeatureConfig, FeatureSpace
from .harness import (
    AnomalySpec,
    GroundTruth,
    LaneSpec,
    Metrics,
    SynthConfig,
    benchmark_config,
    evaluate,
    generate_scene,
    run_benchmark,
)
from .meanshift import ClusterConfig, ClusterModel, KernelProfile, mean_shift_cluster
from .plots import PlotSpec, render_panels
from .trajmodel import (
    ParseResult,
    ResampledTrajectory,
    Sample,
    Scene,
    Trajectory,
    parse_trajectories,
    resample,
    scene_digest,
    scene_to_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AnomalyReport",
    "AnomalySpec",
    "ClusterConfig",
    "ClusterModel",
    "DetectorConfig",
    "FeatureConfig",
    "FeatureSpace",
    "GroundTruth",
    "KernelProfile",
    "LaneSpec",
    "Metrics",
    "ParseResult",
    "PlotSpec",
    "ResampledTrajectory",
    "Sample",
    "Scene",
    "SynthConfig",
    "Trajectory",
    "benchmark_config",
    "detect",
    "evaluate",
    "generate_scene",
    "mean_shift_cluster",
    "parse_trajectories",
    "render_panels",
    "resample",
    "run_benchmark",
    "scene_digest",
    "scene_to_csv",
]
