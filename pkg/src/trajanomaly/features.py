"""Per-trajectory feature spaces: density, shape, mean position, dispersion.

Each feature space embeds every trajectory of a scene as one numeric row.
The four spaces are clustered independently downstream, so each matrix is
z-scored before any distance is taken on it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchedResolution
from .trajmodel import (
    RESAMPLE_N_DEFAULT,
    ResampledTrajectory,
    Scene,
    Trajectory,
    resample,
    scene_diagonal,
)


class FeatureSpace(enum.Enum):
    """The four trajectory embeddings the detector votes over."""

    DENSITY = "density"
    SHAPE = "shape"
    MEAN_POSITION = "mean_position"
    STD_DEV = "stddev"


SPACE_ORDER = (
    FeatureSpace.DENSITY,
    FeatureSpace.SHAPE,
    FeatureSpace.MEAN_POSITION,
    FeatureSpace.STD_DEV,
)

FEATURE_DIMS = {
    FeatureSpace.DENSITY: 3,
    FeatureSpace.SHAPE: 8,
    FeatureSpace.MEAN_POSITION: 2,
    FeatureSpace.STD_DEV: 2,
}


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs for feature extraction.

    epsilon_fractions are multiplied by the scene diagonal to obtain the
    three increasing neighbourhood radii of the density feature.
    """

    epsilon_fractions: tuple[float, float, float] = (0.05, 0.10, 0.20)
    resample_n: int = RESAMPLE_N_DEFAULT

    def __post_init__(self):
        fr = tuple(float(f) for f in self.epsilon_fractions)
        object.__setattr__(self, "epsilon_fractions", fr)
        if len(fr) != 3:
            raise ValueError("exactly three epsilon fractions required")
        if not all(0.0 < f <= 1.0 for f in fr):
            raise ValueError("epsilon fractions must lie in (0, 1]")
        if not (fr[0] < fr[1] < fr[2]):
            raise ValueError("epsilon fractions must be strictly increasing")
        if self.resample_n < 4:
            raise ValueError("resample_n must be at least 4 for a cubic fit")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """One numeric row per trajectory, in scene trajectory order.

    mean/std are populated once the matrix has been z-scored; they record
    the per-column normalization actually applied.
    """

    space: FeatureSpace
    rows: np.ndarray = field(repr=False)
    mean: np.ndarray | None = field(default=None, repr=False)
    std: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError(f"feature rows must be 2-D, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError(f"{self.space.value} feature matrix has non-finite entries")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def normalized(self) -> bool:
        return self.mean is not None


def st_distance(r1: ResampledTrajectory, r2: ResampledTrajectory) -> float:
    """Spatio-temporal distance: mean pointwise Euclidean gap between two
    lifespan-aligned trajectories."""
    if r1.n != r2.n:
        raise MismatchedResolution(f"resample counts differ: {r1.n} vs {r2.n}")
    diff = r1.points - r2.points
    return float(np.sqrt((diff * diff).sum(axis=1)).mean())


def pairwise_st_distances(resampled: list[ResampledTrajectory]) -> np.ndarray:
    """Full symmetric matrix of spatio-temporal distances.

    Row blocks are computed independently, so the result is identical no
    matter how callers partition the work.
    """
    n = len(resampled)
    if n == 0:
        return np.zeros((0, 0))
    counts = {r.n for r in resampled}
    if len(counts) > 1:
        raise MismatchedResolution(f"mixed resample counts: {sorted(counts)}")
    stack = np.stack([r.points for r in resampled])  # (n, N, 2)
    out = np.empty((n, n))
    block = max(1, 2_000_000 // (stack.shape[1] * max(n, 1)))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        diff = stack[lo:hi, None, :, :] - stack[None, :, :, :]
        out[lo:hi] = np.sqrt((diff * diff).sum(axis=3)).mean(axis=2)
    return out


def density_feature(
    scene: Scene,
    cfg: FeatureConfig,
    resampled: list[ResampledTrajectory] | None = None,
) -> FeatureMatrix:
    """Neighbour counts at three radii scaled off the scene diagonal.

    Row j counts the other trajectories whose spatio-temporal distance to
    trajectory j is strictly below each epsilon.
    """
    if resampled is None:
        resampled = [resample(t, cfg.resample_n) for t in scene.trajectories]
    eps = np.array(cfg.epsilon_fractions) * scene_diagonal(scene)
    dist = pairwise_st_distances(resampled)
    np.fill_diagonal(dist, np.inf)  # a trajectory is not its own neighbour
    rows = (dist[:, :, None] < eps[None, None, :]).sum(axis=1)
    return FeatureMatrix(FeatureSpace.DENSITY, rows.astype(float))


def shape_feature(r: ResampledTrajectory) -> np.ndarray:
    """Least-squares cubic coefficients of x(u) and y(u) on u in [0, 1].

    Returns [a0, a1, a2, a3, b0, b1, b2, b3] where x(u) = a0 + a1 u + a2 u^2
    + a3 u^3 and likewise b for y.
    """
    u = np.linspace(0.0, 1.0, r.n)
    basis = np.vander(u, 4, increasing=True)
    ax, _, _, _ = np.linalg.lstsq(basis, r.points[:, 0], rcond=None)
    by, _, _, _ = np.linalg.lstsq(basis, r.points[:, 1], rcond=None)
    return np.concatenate([ax, by])


def shape_matrix(resampled: list[ResampledTrajectory]) -> FeatureMatrix:
    rows = np.stack([shape_feature(r) for r in resampled])
    return FeatureMatrix(FeatureSpace.SHAPE, rows)


def mean_position_feature(traj: Trajectory) -> np.ndarray:
    """Arithmetic mean of the raw sample positions."""
    pos = traj.positions()
    return pos.mean(axis=0)


def mean_position_matrix(scene: Scene) -> FeatureMatrix:
    rows = np.stack([mean_position_feature(t) for t in scene.trajectories])
    return FeatureMatrix(FeatureSpace.MEAN_POSITION, rows)


def stddev_feature(traj: Trajectory) -> np.ndarray:
    """Per-coordinate population standard deviation of the raw samples."""
    pos = traj.positions()
    return pos.std(axis=0)


def stddev_matrix(scene: Scene) -> FeatureMatrix:
    rows = np.stack([stddev_feature(t) for t in scene.trajectories])
    return FeatureMatrix(FeatureSpace.STD_DEV, rows)


def zscore_normalize(m: FeatureMatrix) -> FeatureMatrix:
    """Shift each column by its mean and divide by its population std.

    Zero-variance columns become all zeros rather than dividing by zero;
    the recorded std keeps the raw zero so the transform is reproducible.
    """
    mu = m.rows.mean(axis=0)
    sd = m.rows.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)
    rows = (m.rows - mu) / safe
    return FeatureMatrix(m.space, rows, mean=mu, std=sd)


def extract_features(scene: Scene, cfg: FeatureConfig) -> dict[FeatureSpace, FeatureMatrix]:
    """All four raw (un-normalized) feature matrices for a scene."""
    resampled = [resample(t, cfg.resample_n) for t in scene.trajectories]
    return {
        FeatureSpace.DENSITY: density_feature(scene, cfg, resampled),
        FeatureSpace.SHAPE: shape_matrix(resampled),
        FeatureSpace.MEAN_POSITION: mean_position_matrix(scene),
        FeatureSpace.STD_DEV: stddev_matrix(scene),
    }
