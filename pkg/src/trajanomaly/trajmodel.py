"""Trajectory data model, CSV ingestion, and normalized-time resampling.

A scene is a set of time-stamped 2-D trajectories. All pairwise math in the
toolkit runs on fixed-length resampled renderings: each trajectory is
interpolated at N uniform points of its own normalized lifespan u in [0, 1],
which makes trajectories with different start times and durations directly
comparable index-by-index.

Everything here is immutable after construction and every function is pure.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateScene,
    EmptyInput,
    MalformedRow,
    NonMonotonicTime,
)

MIN_SAMPLES_DEFAULT = 8
RESAMPLE_N_DEFAULT = 32

_CSV_HEADER = ("id", "t", "x", "y")


@dataclass(frozen=True)
class Sample:
    """One time-stamped position: t seconds, (x, y) in scene units."""

    t: float
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"sample fields must be finite, got {self!r}")


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples for one tracked object, strictly increasing in t."""

    id: str
    samples: tuple[Sample, ...]

    def __post_init__(self):
        if not self.id or "," in self.id or "\n" in self.id or "\r" in self.id:
            raise ValueError(f"trajectory id must be non-empty CSV-safe text, got {self.id!r}")
        if len(self.samples) < 2:
            raise ValueError(f"trajectory {self.id!r} needs at least 2 samples")
        for a, b in zip(self.samples, self.samples[1:]):
            if b.t <= a.t:
                raise ValueError(f"trajectory {self.id!r} has non-increasing time")
        if self.samples[0].t < 0:
            raise ValueError(f"trajectory {self.id!r} has negative start time")

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def xs(self) -> np.ndarray:
        return np.array([s.x for s in self.samples], dtype=float)

    def ys(self) -> np.ndarray:
        return np.array([s.y for s in self.samples], dtype=float)

    def positions(self) -> np.ndarray:
        """(n, 2) array of sample positions in time order."""
        return np.array([(s.x, s.y) for s in self.samples], dtype=float)


@dataclass(frozen=True)
class Scene:
    """A set of trajectories plus its bounding box and diagonal scale."""

    trajectories: tuple[Trajectory, ...]
    bbox: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max
    diagonal: float

    def __post_init__(self):
        if len(self.trajectories) < 2:
            raise DegenerateScene(
                f"a scene needs at least 2 trajectories, got {len(self.trajectories)}"
            )
        if not self.diagonal > 0:
            raise DegenerateScene("scene bounding box has zero diagonal")
        ids = [t.id for t in self.trajectories]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate trajectory ids in scene")

    @classmethod
    def from_trajectories(cls, trajectories) -> "Scene":
        trajectories = tuple(trajectories)
        if len(trajectories) < 2:
            raise DegenerateScene(
                f"a scene needs at least 2 trajectories, got {len(trajectories)}"
            )
        xs = np.concatenate([t.xs() for t in trajectories])
        ys = np.concatenate([t.ys() for t in trajectories])
        bbox = (float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max()))
        diagonal = math.hypot(bbox[1] - bbox[0], bbox[3] - bbox[2])
        if diagonal == 0.0:
            raise DegenerateScene("all samples coincide: zero scene extent")
        return cls(trajectories, bbox, diagonal)

    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.trajectories)


@dataclass(frozen=True, eq=False)
class ResampledTrajectory:
    """Exactly n points interpolated at uniform normalized lifespan."""

    id: str
    points: np.ndarray = field(repr=False)  # (n, 2), read-only

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError(f"resampled points must be (n >= 2, 2), got {pts.shape}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class ParseResult:
    """Parsed scene plus the ids dropped for having too few samples."""

    scene: Scene
    dropped: tuple[str, ...]


def parse_trajectories(text: str, min_samples: int = MIN_SAMPLES_DEFAULT) -> ParseResult:
    """Parse trajectory CSV (rows ``id,t,x,y``, optional header) into a Scene.

    Rows belonging to one id must appear in strictly increasing time order;
    whole-trajectory blocks may appear in any order. Trajectories with fewer
    than ``min_samples`` samples are dropped and reported, not fatal.
    """
    if min_samples < 2:
        raise ValueError("min_samples must be at least 2")
    groups: dict[str, list[Sample]] = {}
    last_line: dict[str, int] = {}
    parsed_any = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if lineno == 1 and tuple(f.lower() for f in fields) == _CSV_HEADER:
            continue
        if len(fields) != 4:
            raise MalformedRow(lineno, f"expected 4 fields, got {len(fields)}")
        traj_id = fields[0]
        if not traj_id:
            raise MalformedRow(lineno, "empty trajectory id")
        try:
            t, x, y = (float(fields[1]), float(fields[2]), float(fields[3]))
        except ValueError:
            raise MalformedRow(lineno, f"non-numeric field in {line!r}") from None
        if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(y)):
            raise MalformedRow(lineno, "non-finite value")
        if t < 0:
            raise MalformedRow(lineno, "negative time")
        bucket = groups.setdefault(traj_id, [])
        if bucket and t <= bucket[-1].t:
            raise NonMonotonicTime(lineno, traj_id)
        bucket.append(Sample(t, x, y))
        last_line[traj_id] = lineno
        parsed_any = True
    if not parsed_any:
        raise EmptyInput("no trajectory rows found")

    kept: list[Trajectory] = []
    dropped: list[str] = []
    for traj_id, samples in groups.items():
        if len(samples) < min_samples:
            dropped.append(traj_id)
        else:
            kept.append(Trajectory(traj_id, tuple(samples)))
    if len(kept) < 2:
        raise DegenerateScene(
            f"only {len(kept)} trajectories with >= {min_samples} samples"
        )
    return ParseResult(Scene.from_trajectories(kept), tuple(dropped))


def scene_to_csv(scene: Scene) -> str:
    """Serialize a scene back to trajectory CSV.

    Floats are written with repr so a parse round trip reproduces every
    sample bit-for-bit.
    """
    lines = ["id,t,x,y"]
    for traj in scene.trajectories:
        for s in traj.samples:
            lines.append(f"{traj.id},{s.t!r},{s.x!r},{s.y!r}")
    return "\n".join(lines) + "\n"


def scene_digest(scene: Scene) -> str:
    """SHA-256 of the canonical CSV form; ties reports to their input."""
    return hashlib.sha256(scene_to_csv(scene).encode("utf-8")).hexdigest()


def resample(traj: Trajectory, n: int = RESAMPLE_N_DEFAULT) -> ResampledTrajectory:
    """Piecewise-linear resampling at n uniform points of normalized lifespan.

    Endpoints are copied from the raw first and last samples so they are
    exact regardless of floating-point interpolation error.
    """
    if n < 2:
        raise ValueError("resample count must be at least 2")
    t = traj.times()
    u = np.linspace(0.0, 1.0, n)
    tt = t[0] + u * (t[-1] - t[0])
    xs = np.interp(tt, t, traj.xs())
    ys = np.interp(tt, t, traj.ys())
    xs[0], ys[0] = traj.samples[0].x, traj.samples[0].y
    xs[-1], ys[-1] = traj.samples[-1].x, traj.samples[-1].y
    return ResampledTrajectory(traj.id, np.column_stack([xs, ys]))


def scene_diagonal(scene: Scene) -> float:
    """Euclidean length of the scene bounding-box diagonal."""
    x_min, x_max, y_min, y_max = scene.bbox
    d = math.hypot(x_max - x_min, y_max - y_min)
    if d == 0.0:
        raise DegenerateScene("scene bounding box has zero diagonal")
    return d
