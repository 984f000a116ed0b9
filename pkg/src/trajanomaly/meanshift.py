"""Mean-shift mode seeking over a feature matrix.

A kernel density estimate is implied over the rows; every row is iterated
uphill by repeatedly replacing it with the kernel-weighted mean of all rows
inside its window. Iteration stops when the shift magnitude drops below the
convergence tolerance. Converged positions that land within half a
bandwidth of each other are merged into a single mode, and each input row
is assigned to its nearest mode.

The iteration weights are always taken against the original data, never the
moving points, so every row's path is independent of every other row's; the
batch implementation below is exactly the per-row recurrence run in
lockstep, which keeps results deterministic and safely parallelizable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroWeight
from .features import FeatureMatrix, FeatureSpace


class KernelProfile(enum.Enum):
    """Kernel profile plus the weight profile used in the shift step.

    weights() is the negated derivative of the density profile, so a step
    under weights() moves uphill on the density built from profile().
    """

    GAUSSIAN = "gaussian"
    EPANECHNIKOV = "epanechnikov"

    def profile(self, r2: np.ndarray) -> np.ndarray:
        """Density profile applied to squared scaled distances."""
        r2 = np.asarray(r2, dtype=float)
        if self is KernelProfile.GAUSSIAN:
            return np.exp(-0.5 * r2)
        return np.maximum(1.0 - r2, 0.0)

    def weights(self, r2: np.ndarray) -> np.ndarray:
        """Shift-step weights: non-negative, non-increasing in r2."""
        r2 = np.asarray(r2, dtype=float)
        if self is KernelProfile.GAUSSIAN:
            return np.exp(-0.5 * r2)
        return (r2 <= 1.0).astype(float)


@dataclass(frozen=True)
class ClusterConfig:
    """Mean-shift knobs.

    The bandwidth is data-adaptive: bandwidth_factor times the median
    pairwise Euclidean distance of the matrix being clustered.
    """

    kernel: KernelProfile = KernelProfile.GAUSSIAN
    bandwidth_factor: float = 0.3
    max_iterations: int = 300
    convergence_tol: float = 1e-6
    merge_radius_factor: float = 0.5

    def __post_init__(self):
        if self.bandwidth_factor <= 0:
            raise ValueError("bandwidth_factor must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if not (0.0 < self.merge_radius_factor < 1.0):
            raise ValueError("merge_radius_factor must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Modes found for one feature matrix plus per-row assignments."""

    centers: np.ndarray = field(repr=False)      # (k, d)
    assignments: np.ndarray = field(repr=False)  # (n,) index into centers
    bandwidth: float
    degenerate: bool = False
    space: FeatureSpace | None = None

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        assignments = np.asarray(self.assignments, dtype=int)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise ValueError("centers must be a non-empty (k, d) array")
        if assignments.min(initial=0) < 0 or assignments.max(initial=0) >= centers.shape[0]:
            raise ValueError("assignment index out of range")
        centers.flags.writeable = False
        assignments.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "assignments", assignments)

    @property
    def k(self) -> int:
        return self.centers.shape[0]


def median_pairwise_distance(data: np.ndarray) -> float:
    """Median Euclidean distance over all unordered row pairs."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    n = X.shape[0]
    if n < 2:
        return 0.0
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    iu = np.triu_indices(n, k=1)
    return float(np.median(dist[iu]))


def resolve_bandwidth(data: np.ndarray, cfg: ClusterConfig) -> float:
    """Data-adaptive bandwidth; 0.0 signals fully degenerate data."""
    return cfg.bandwidth_factor * median_pairwise_distance(data)


def mean_shift_step(x, data, cfg: ClusterConfig, *, bandwidth: float | None = None):
    """One shift: the kernel-weighted mean of data seen from x.

    With a Gaussian kernel every weight is positive, so the step is always
    defined; a truncated kernel raises ZeroWeight when no datum falls in
    the window. Passing bandwidth skips the median-distance computation.
    """
    X = np.atleast_2d(np.asarray(data, dtype=float))
    x = np.asarray(x, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("mean shift step needs non-empty data")
    h = resolve_bandwidth(X, cfg) if bandwidth is None else float(bandwidth)
    if h <= 0.0:
        # Degenerate or single-point data: the weighted mean is the mean.
        return X.mean(axis=0)
    r2 = ((x[None, :] - X) / h) ** 2
    w = cfg.kernel.weights(r2.sum(axis=1))
    total = w.sum()
    if total <= 0.0:
        raise ZeroWeight("no datum inside the kernel window")
    return (w[:, None] * X).sum(axis=0) / total


def kde_value(x, data, bandwidth: float, kernel: KernelProfile = KernelProfile.GAUSSIAN) -> float:
    """Unnormalized kernel density estimate at x (constants dropped)."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    x = np.asarray(x, dtype=float)
    r2 = (((x[None, :] - X) / bandwidth) ** 2).sum(axis=1)
    return float(kernel.profile(r2).sum())


def _iterate_modes(X: np.ndarray, h: float, cfg: ClusterConfig) -> np.ndarray:
    """Run the shift recurrence from every row until convergence or cap.

    Rows whose last shift fell below the tolerance are frozen; the rest
    keep iterating. Weights are computed against the original X throughout.
    """
    Y = X.copy()
    active = np.ones(X.shape[0], dtype=bool)
    for _ in range(cfg.max_iterations):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        diff = (Y[idx][:, None, :] - X[None, :, :]) / h
        w = cfg.kernel.weights((diff * diff).sum(axis=2))
        totals = w.sum(axis=1)
        if np.any(totals <= 0.0):
            raise ZeroWeight("no datum inside the kernel window during iteration")
        new = (w @ X) / totals[:, None]
        shift = np.sqrt(((new - Y[idx]) ** 2).sum(axis=1))
        Y[idx] = new
        active[idx] = shift >= cfg.convergence_tol
    return Y


def _merge_converged(points: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Group converged points within radius of a running mode mean.

    Scans in row order for determinism; a final pass re-merges any mode
    pair that ended up within the radius, so returned centers are always
    mutually farther apart than the radius.
    """
    centers: list[np.ndarray] = []
    sums: list[np.ndarray] = []
    counts: list[int] = []
    for p in points:
        if centers:
            d = np.sqrt(((np.array(centers) - p) ** 2).sum(axis=1))
            j = int(np.argmin(d))
            if d[j] <= radius:
                sums[j] = sums[j] + p
                counts[j] += 1
                centers[j] = sums[j] / counts[j]
                continue
        centers.append(p.copy())
        sums.append(p.copy())
        counts.append(1)

    merged = True
    while merged and len(centers) > 1:
        merged = False
        arr = np.array(centers)
        for i in range(len(centers)):
            d = np.sqrt(((arr[i + 1:] - arr[i]) ** 2).sum(axis=1))
            hits = np.flatnonzero(d <= radius)
            if hits.size:
                j = i + 1 + int(hits[0])
                sums[i] = sums[i] + sums[j]
                counts[i] += counts[j]
                centers[i] = sums[i] / counts[i]
                del centers[j], sums[j], counts[j]
                merged = True
                break
    return np.array(centers), np.array(counts)


def mean_shift_cluster(m, cfg: ClusterConfig = ClusterConfig()) -> ClusterModel:
    """Cluster a feature matrix (or plain array) by mean-shift mode seeking.

    If the median pairwise distance is zero the data carry no usable scale;
    a single trivial mode at the row mean is returned and flagged
    degenerate rather than failing.
    """
    space = m.space if isinstance(m, FeatureMatrix) else None
    X = np.atleast_2d(np.asarray(m.rows if isinstance(m, FeatureMatrix) else m, dtype=float))
    if X.shape[0] < 2:
        raise ValueError("mean shift needs at least 2 rows")

    h = resolve_bandwidth(X, cfg)
    if h == 0.0:
        centers = X.mean(axis=0, keepdims=True)
        return ClusterModel(
            centers=centers,
            assignments=np.zeros(X.shape[0], dtype=int),
            bandwidth=0.0,
            degenerate=True,
            space=space,
        )

    converged = _iterate_modes(X, h, cfg)
    centers, _ = _merge_converged(converged, cfg.merge_radius_factor * h)
    d = np.sqrt(((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
    assignments = d.argmin(axis=1)
    return ClusterModel(
        centers=centers,
        assignments=assignments,
        bandwidth=h,
        degenerate=False,
        space=space,
    )
