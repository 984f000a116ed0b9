"""Entropy scoring over cluster centers, adaptive thresholds, and voting.

Per feature space, each trajectory's distances to the cluster centers are
normalized into a probability distribution whose Shannon entropy (log base
k, so scores live in [0, 1]) measures how evenly far the trajectory sits
from every center. Trajectories scoring above a data-adaptive threshold are
flagged per space; a strict majority over the non-abstaining spaces yields
the final anomaly set.

A space that collapses to a single cluster abstains: with one center the
distance distribution is trivial and carries no information.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroDistances,
    DimensionMismatch,
    NoVotingSpaces,
    SingleCluster,
)
from .features import (
    SPACE_ORDER,
    FeatureConfig,
    FeatureSpace,
    extract_features,
    zscore_normalize,
)
from .meanshift import ClusterConfig, ClusterModel, KernelProfile, mean_shift_cluster
from .trajmodel import Scene, scene_digest

NO_VOTING_WARNING = "no voting feature spaces: every space collapsed to a single cluster"


@dataclass(frozen=True)
class DetectorConfig:
    """End-to-end pipeline configuration.

    The flag threshold is mean(H) + kappa * std(H) unless
    threshold_quantile is set, in which case that quantile of H is used
    instead (the two rules are mutually exclusive).
    """

    kappa: float = 1.5
    threshold_quantile: float | None = None
    features: FeatureConfig = FeatureConfig()
    cluster: ClusterConfig = ClusterConfig()

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.threshold_quantile is not None and not (0.0 < self.threshold_quantile < 1.0):
            raise ValueError("threshold_quantile must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "features": {
                "epsilon_fractions": list(self.features.epsilon_fractions),
                "resample_n": self.features.resample_n,
            },
            "cluster": {
                "kernel": self.cluster.kernel.value,
                "bandwidth_factor": self.cluster.bandwidth_factor,
                "max_iterations": self.cluster.max_iterations,
                "convergence_tol": self.cluster.convergence_tol,
                "merge_radius_factor": self.cluster.merge_radius_factor,
            },
            "detector": {
                "kappa": self.kappa,
                "threshold_quantile": self.threshold_quantile,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(
            kappa=d["detector"]["kappa"],
            threshold_quantile=d["detector"]["threshold_quantile"],
            features=FeatureConfig(
                epsilon_fractions=tuple(d["features"]["epsilon_fractions"]),
                resample_n=d["features"]["resample_n"],
            ),
            cluster=ClusterConfig(
                kernel=KernelProfile(d["cluster"]["kernel"]),
                bandwidth_factor=d["cluster"]["bandwidth_factor"],
                max_iterations=d["cluster"]["max_iterations"],
                convergence_tol=d["cluster"]["convergence_tol"],
                merge_radius_factor=d["cluster"]["merge_radius_factor"],
            ),
        )


@dataclass(frozen=True, eq=False)
class EntropyVector:
    """Per-trajectory entropy scores for one feature space."""

    space: FeatureSpace
    H: np.ndarray = field(repr=False)
    k: int = 1
    abstained: bool = False

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 1:
            raise ValueError("entropy vector must be 1-D")
        if not self.abstained and (np.any(H < 0.0) or np.any(H > 1.0)):
            raise ValueError("entropy scores must lie in [0, 1]")
        H.flags.writeable = False
        object.__setattr__(self, "H", H)


@dataclass(frozen=True, eq=False)
class SpaceResult:
    """Everything one feature space contributed to a detection run."""

    space: FeatureSpace
    model: ClusterModel = field(repr=False)
    entropy: EntropyVector = field(repr=False)
    thresh: float | None
    flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        flags.flags.writeable = False
        object.__setattr__(self, "flags", flags)

    @property
    def abstained(self) -> bool:
        return self.entropy.abstained

    @property
    def k(self) -> int:
        return self.model.k


@dataclass(frozen=True, eq=False)
class AnomalyReport:
    """Full output of one detection run, serializable to stable JSON."""

    scene_digest: str
    config: DetectorConfig
    ids: tuple[str, ...]
    spaces: tuple[SpaceResult, ...]
    votes: np.ndarray = field(repr=False)
    n_voting: int = 0
    anomalies: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        votes = np.asarray(self.votes, dtype=int)
        votes.flags.writeable = False
        object.__setattr__(self, "votes", votes)

    def to_dict(self) -> dict:
        return {
            "scene_digest": self.scene_digest,
            "config": self.config.to_dict(),
            "n_trajectories": len(self.ids),
            "ids": list(self.ids),
            "per_space": [
                {
                    "space": s.space.value,
                    "k": s.k,
                    "abstained": s.abstained,
                    "bandwidth": s.model.bandwidth,
                    "centers": [[float(v) for v in c] for c in s.model.centers],
                    "assignments": [int(a) for a in s.model.assignments],
                    "H": [float(h) for h in s.entropy.H],
                    "thresh": s.thresh,
                    "flags": [bool(f) for f in s.flags],
                }
                for s in self.spaces
            ],
            "votes": [int(v) for v in self.votes],
            "n_voting": self.n_voting,
            "anomalies": list(self.anomalies),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def distance_to_centers(fvec: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Euclidean distance from one feature row to every cluster center."""
    fvec = np.asarray(fvec, dtype=float)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if fvec.shape[-1] != centers.shape[1]:
        raise DimensionMismatch(
            f"feature dim {fvec.shape[-1]} vs center dim {centers.shape[1]}"
        )
    return np.sqrt(((centers - fvec[None, :]) ** 2).sum(axis=1))


def entropy_score(distvec: np.ndarray) -> float:
    """Shannon entropy of the distance-normalized distribution, in [0, 1].

    Distances are normalized to probabilities by their sum; entropy is
    taken with log base k so a trajectory equidistant from all centers
    scores exactly 1. Zero probabilities contribute nothing.
    """
    d = np.asarray(distvec, dtype=float)
    k = d.size
    if k < 2:
        raise SingleCluster("entropy needs at least 2 centers")
    if np.any(d < 0.0):
        raise ValueError("distances must be non-negative")
    total = d.sum()
    if total == 0.0:
        raise AllZeroDistances("all center distances are zero for k >= 2")
    p = d / total
    nz = p[p > 0.0]
    h = float(-(nz * (np.log(nz) / np.log(k))).sum())
    # Clip floating-point overshoot at the uniform maximum.
    return min(max(h, 0.0), 1.0)


def adaptive_threshold(H: np.ndarray, kappa: float) -> float:
    """mean + kappa * population std of the entropy scores, capped at 1."""
    H = np.asarray(H, dtype=float)
    return float(min(H.mean() + kappa * H.std(), 1.0))


def quantile_threshold(H: np.ndarray, q: float) -> float:
    """Entropy quantile alternative to the mean + kappa * std rule."""
    H = np.asarray(H, dtype=float)
    return float(min(np.quantile(H, q), 1.0))


def feature_anomalies(H: np.ndarray, thresh: float) -> np.ndarray:
    """Boolean flags: strictly above the threshold."""
    return np.asarray(H, dtype=float) > thresh


def vote(flag_rows: list[np.ndarray], n_voting: int) -> np.ndarray:
    """Strict-majority vote across the non-abstaining feature spaces."""
    if n_voting < 1:
        raise NoVotingSpaces("no feature space is eligible to vote")
    if len(flag_rows) != n_voting:
        raise ValueError("flag rows must come from exactly the voting spaces")
    counts = np.zeros(len(flag_rows[0]), dtype=int)
    for flags in flag_rows:
        counts += np.asarray(flags, dtype=bool).astype(int)
    return counts > (n_voting / 2.0)


def _score_space(norm_rows: np.ndarray, model: ClusterModel, cfg: DetectorConfig) -> SpaceResult:
    n = norm_rows.shape[0]
    if model.k == 1:
        entropy = EntropyVector(model.space, np.zeros(n), k=1, abstained=True)
        return SpaceResult(model.space, model, entropy, None, np.zeros(n, dtype=bool))
    H = np.array([
        entropy_score(distance_to_centers(norm_rows[i], model.centers))
        for i in range(n)
    ])
    entropy = EntropyVector(model.space, H, k=model.k, abstained=False)
    if cfg.threshold_quantile is not None:
        thresh = quantile_threshold(H, cfg.threshold_quantile)
    else:
        thresh = adaptive_threshold(H, cfg.kappa)
    flags = feature_anomalies(H, thresh)
    return SpaceResult(model.space, model, entropy, thresh, flags)


def detect(scene: Scene, cfg: DetectorConfig = DetectorConfig()) -> AnomalyReport:
    """Run the full pipeline on a scene and assemble the report.

    Features -> z-score -> mean-shift -> entropy -> threshold -> flags per
    space, then a strict-majority vote over the spaces that produced more
    than one cluster.
    """
    raw = extract_features(scene, cfg.features)
    results = []
    for space in SPACE_ORDER:
        norm = zscore_normalize(raw[space])
        model = mean_shift_cluster(norm, cfg.cluster)
        results.append(_score_space(norm.rows, model, cfg))

    voting = [r for r in results if not r.abstained]
    n_voting = len(voting)
    votes = np.zeros(len(scene.trajectories), dtype=int)
    for r in voting:
        votes += r.flags.astype(int)
    warnings: tuple[str, ...] = ()
    if n_voting == 0:
        anomalous = np.zeros(len(scene.trajectories), dtype=bool)
        warnings = (NO_VOTING_WARNING,)
    else:
        anomalous = vote([r.flags for r in voting], n_voting)

    ids = scene.ids()
    anomalies = tuple(sorted(ids[i] for i in np.flatnonzero(anomalous)))
    return AnomalyReport(
        scene_digest=scene_digest(scene),
        config=cfg,
        ids=ids,
        spaces=tuple(results),
        votes=votes,
        n_voting=n_voting,
        anomalies=anomalies,
        warnings=warnings,
    )
