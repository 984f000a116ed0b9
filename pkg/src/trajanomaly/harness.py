"""Synthetic labeled scenes with planted anomalies, plus evaluation metrics.

The generator lays out pedestrian lanes (gently S-curved corridors with
per-agent start jitter and speed variation) and plants a configurable mix
of four anomaly archetypes:

  counter_flow   weaves against its lane's direction on a laterally
                 displaced track between lanes
  erratic_speed  alternates between 0.2x and 3x the lane's mean speed
  off_lane       follows a high-curvature sinusoidal path crossing lanes
  loiter         near-stationary, pacing a small closed loop with jitter

Everything is driven by one seeded generator, so a config reproduces its
scene and labels bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .detector import AnomalyReport, DetectorConfig, detect
from .errors import IdMismatch, InvalidConfig
from .trajmodel import Sample, Scene, Trajectory

ARCHETYPES = ("counter_flow", "erratic_speed", "off_lane", "loiter")

# Nominal layout scale the default lane templates are drawn on.
_NOMINAL_EXTENT = 100.0

# How far back an erratic agent starts along its lane, as a fraction of the
# lane traversal, to keep its faster average from inflating the scene much.
_ERRATIC_BACKSHIFT = 0.1

# Off-lane path: lateral swing amplitude as a fraction of path length, and
# number of full sine periods over the lifespan.
_OFF_LANE_AMP = 0.08
_OFF_LANE_PERIODS = 2.5

# Counter-flow agents weave against the stream: their track carries a much
# wider S-curve than any lane's, in scene units.
_COUNTER_FLOW_BOW = (26.0, 32.0)

# Fraction of the gap toward the other lanes at which the counter-flow
# track is displaced sideways.
_COUNTER_FLOW_LATERAL = (0.55, 0.75)

# Loiterers pace a small closed loop around one spot; radius range in scene
# units. Net displacement stays near zero while they mill about.
_LOITER_RADIUS = (8.0, 11.0)


@dataclass(frozen=True)
class LaneSpec:
    """One pedestrian lane: a corridor with an optional lateral bow.

    start_box is (x_min, x_max, y_min, y_max); direction is normalized at
    construction. curve_amp bows the corridor sideways (peak deviation in
    scene units at mid-path), giving each lane a distinct path shape.
    """

    start_box: tuple[float, float, float, float]
    direction: tuple[float, float]
    speed_mean: float
    speed_std: float
    count: int
    curve_amp: float = 0.0

    def __post_init__(self):
        x0, x1, y0, y1 = self.start_box
        if x1 < x0 or y1 < y0:
            raise InvalidConfig(f"malformed start box {self.start_box}")
        norm = math.hypot(*self.direction)
        if norm == 0.0:
            raise InvalidConfig("lane direction must be non-zero")
        object.__setattr__(
            self, "direction", (self.direction[0] / norm, self.direction[1] / norm)
        )
        if self.speed_mean <= 0:
            raise InvalidConfig("lane speed_mean must be positive")
        if self.speed_std < 0:
            raise InvalidConfig("lane speed_std must be non-negative")
        if self.count < 0:
            raise InvalidConfig("lane count must be non-negative")

    def bow(self, arc_fraction: np.ndarray) -> np.ndarray:
        """Lateral S-curve offsets for positions at the given arc fractions.

        One full sine period: zero at both ends and zero mean, so bowing a
        lane changes its path shape without moving its mean position.
        """
        lateral = self.curve_amp * np.sin(2.0 * math.pi * arc_fraction)
        return np.outer(lateral, _perp(self.direction))

    def traversal(self, duration: float) -> float:
        return self.speed_mean * duration

    def corridor_center(self, duration: float) -> np.ndarray:
        x0, x1, y0, y1 = self.start_box
        start = np.array([(x0 + x1) / 2.0, (y0 + y1) / 2.0])
        return start + np.array(self.direction) * (0.5 * self.traversal(duration))


@dataclass(frozen=True)
class AnomalySpec:
    archetype: str
    count: int

    def __post_init__(self):
        if self.archetype not in ARCHETYPES:
            raise InvalidConfig(
                f"unknown archetype {self.archetype!r}; expected one of {ARCHETYPES}"
            )
        if self.count < 0:
            raise InvalidConfig("anomaly count must be non-negative")


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    lanes: tuple[LaneSpec, ...]
    anomalies: tuple[AnomalySpec, ...] = ()
    noise_std: float = 1.0
    duration: float = 12.0
    sample_rate: float = 2.5

    def __post_init__(self):
        if len(self.lanes) < 1:
            raise InvalidConfig("at least one lane is required")
        if self.noise_std < 0:
            raise InvalidConfig("noise_std must be non-negative")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise InvalidConfig("duration and sample_rate must be positive")
        if self.n_samples < 2:
            raise InvalidConfig("config yields fewer than 2 samples per trajectory")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate)) + 1

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "lanes": [
                {
                    "start_box": list(l.start_box),
                    "direction": list(l.direction),
                    "speed_mean": l.speed_mean,
                    "speed_std": l.speed_std,
                    "count": l.count,
                    "curve_amp": l.curve_amp,
                }
                for l in self.lanes
            ],
            "anomalies": [
                {"archetype": a.archetype, "count": a.count} for a in self.anomalies
            ],
            "noise_std": self.noise_std,
            "duration": self.duration,
            "sample_rate": self.sample_rate,
        }


@dataclass(frozen=True)
class GroundTruth:
    """Binary labels, 1 marking a planted anomaly, keyed by trajectory id."""

    labels: dict[str, int]

    def positives(self) -> set[str]:
        return {tid for tid, lab in self.labels.items() if lab == 1}


_LANE_TEMPLATES = (
    LaneSpec((4.0, 10.0, 24.0, 30.0), (1.0, 0.0), 4.2, 0.35, 1, curve_amp=10.0),
    LaneSpec((86.0, 98.0, 68.0, 78.0), (-1.0, 0.0), 7.0, 0.35, 1, curve_amp=14.0),
    LaneSpec((64.0, 86.0, 2.0, 14.0), (0.0, 1.0), 8.6, 0.35, 1, curve_amp=18.0),
    LaneSpec((26.0, 38.0, 86.0, 98.0), (0.0, -1.0), 6.2, 0.35, 1, curve_amp=12.0),
    LaneSpec((2.0, 14.0, 2.0, 14.0), (1.0, 1.0), 7.8, 0.35, 1, curve_amp=16.0),
    LaneSpec((86.0, 98.0, 44.0, 52.0), (-1.0, 0.0), 9.4, 0.35, 1, curve_amp=8.0),
)


def make_lane_layout(lane_count: int, per_lane: int) -> tuple[LaneSpec, ...]:
    """Deterministic lane layout cycling through the built-in templates."""
    if lane_count < 1:
        raise InvalidConfig("lane_count must be at least 1")
    if lane_count > len(_LANE_TEMPLATES):
        raise InvalidConfig(f"at most {len(_LANE_TEMPLATES)} lanes are supported")
    return tuple(
        replace(_LANE_TEMPLATES[i], count=per_lane) for i in range(lane_count)
    )


def benchmark_config(
    seed: int = 0,
    lane_count: int = 3,
    per_lane: int = 50,
    counter_flow: int = 2,
    erratic_speed: int = 1,
    off_lane: int = 1,
    loiter: int = 1,
    noise_frac: float = 0.01,
    duration: float = 12.0,
    sample_rate: float = 2.5,
) -> SynthConfig:
    """The default planted-anomaly benchmark scene configuration."""
    anomalies = tuple(
        AnomalySpec(name, count)
        for name, count in (
            ("counter_flow", counter_flow),
            ("erratic_speed", erratic_speed),
            ("loiter", loiter),
            ("off_lane", off_lane),
        )
        if count > 0
    )
    return SynthConfig(
        seed=seed,
        lanes=make_lane_layout(lane_count, per_lane),
        anomalies=anomalies,
        noise_std=noise_frac * _NOMINAL_EXTENT,
        duration=duration,
        sample_rate=sample_rate,
    )


def _times(cfg: SynthConfig) -> np.ndarray:
    return np.arange(cfg.n_samples) / cfg.sample_rate


def _make_trajectory(tid: str, times: np.ndarray, pos: np.ndarray) -> Trajectory:
    samples = tuple(
        Sample(float(t), float(p[0]), float(p[1])) for t, p in zip(times, pos)
    )
    return Trajectory(tid, samples)


def _draw_speed(mean: float, std: float, rng: np.random.Generator) -> float:
    """Speed draw clipped to two sigma so no member is an extreme straggler."""
    speed = float(np.clip(rng.normal(mean, std), mean - 2.0 * std, mean + 2.0 * std))
    return max(0.2 * mean, speed)


def _lane_member(lane: LaneSpec, cfg: SynthConfig, rng: np.random.Generator, times) -> np.ndarray:
    x0, x1, y0, y1 = lane.start_box
    start = rng.uniform((x0, y0), (x1, y1))
    speed = _draw_speed(lane.speed_mean, lane.speed_std, rng)
    u = times / cfg.duration
    pos = start[None, :] + np.outer(times * speed, np.array(lane.direction)) + lane.bow(u)
    return pos + rng.normal(0.0, cfg.noise_std, pos.shape)


def _scene_centroid(cfg: SynthConfig) -> np.ndarray:
    centers = np.array([l.corridor_center(cfg.duration) for l in cfg.lanes])
    return centers.mean(axis=0)


def _perp(direction) -> np.ndarray:
    return np.array([-direction[1], direction[0]])


def _counter_flow(lane: LaneSpec, cfg: SynthConfig, rng, times) -> np.ndarray:
    """Against the lane's flow: a displaced track with a wide weaving swing."""
    x0, x1, y0, y1 = lane.start_box
    d = np.array(lane.direction)
    shift = d * lane.traversal(cfg.duration)
    exit_point = rng.uniform((x0, y0), (x1, y1)) + shift
    perp = _perp(lane.direction)
    own_center = lane.corridor_center(cfg.duration)
    others = [l for l in cfg.lanes if l is not lane]
    if others:
        other_mid = np.array([l.corridor_center(cfg.duration) for l in others]).mean(axis=0)
        lateral = float(np.dot(other_mid - own_center, perp))
    else:
        lateral = 0.3 * lane.traversal(cfg.duration)
    start = exit_point + perp * lateral * rng.uniform(*_COUNTER_FLOW_LATERAL)
    speed = _draw_speed(lane.speed_mean, lane.speed_std, rng)
    u = times / cfg.duration
    weave = rng.uniform(*_COUNTER_FLOW_BOW) * np.sin(2.0 * math.pi * u)
    pos = start[None, :] + np.outer(times * speed, -d) + np.outer(weave, perp)
    return pos + rng.normal(0.0, cfg.noise_std, pos.shape)


def _erratic_speed(lane: LaneSpec, cfg: SynthConfig, rng, times) -> np.ndarray:
    """Lane direction, alternating between 0.2x and 3x the lane mean speed."""
    x0, x1, y0, y1 = lane.start_box
    d = np.array(lane.direction)
    start = rng.uniform((x0, y0), (x1, y1)) - d * (
        _ERRATIC_BACKSHIFT * lane.traversal(cfg.duration)
    )
    n = times.size
    block = max(2, n // 4)
    factors = np.where((np.arange(n - 1) // block) % 2 == 0, 3.0, 0.2)
    step_speeds = factors * lane.speed_mean
    dt = np.diff(times)
    along = np.concatenate([[0.0], np.cumsum(step_speeds * dt)])
    pos = start[None, :] + np.outer(along, d) + lane.bow(along / along[-1])
    return pos + rng.normal(0.0, cfg.noise_std, pos.shape)


def _off_lane(lane: LaneSpec, cfg: SynthConfig, rng, times) -> np.ndarray:
    """High-curvature sinusoidal path cutting across the lanes."""
    centroid = _scene_centroid(cfg)
    cross = _perp(lane.direction)
    # Point the crossing direction into the scene, not away from it.
    if float(np.dot(centroid - lane.corridor_center(cfg.duration), cross)) < 0:
        cross = -cross
    speed = max(0.2 * lane.speed_mean, rng.normal(lane.speed_mean, lane.speed_std))
    length = speed * cfg.duration
    start = centroid - cross * (length / 2.0) + rng.uniform(-4.0, 4.0, 2)
    swing = _perp(cross)
    u = times / cfg.duration
    amp = _OFF_LANE_AMP * length
    pos = (
        start[None, :]
        + np.outer(times * speed, cross)
        + np.outer(amp * np.sin(2.0 * math.pi * _OFF_LANE_PERIODS * u), swing)
    )
    return pos + rng.normal(0.0, cfg.noise_std, pos.shape)


def _loiter(lane: LaneSpec, cfg: SynthConfig, rng, times) -> np.ndarray:
    """Milling in place: a small closed loop around one spot, plus jitter.

    The loop closes over the lifespan, so net displacement is jitter-sized
    even though the agent keeps shuffling around.
    """
    spot = _scene_centroid(cfg) + rng.uniform(-6.0, 6.0, 2)
    radius = rng.uniform(*_LOITER_RADIUS)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    u = times / cfg.duration
    angle = 2.0 * math.pi * u + phase
    loop = radius * np.column_stack([np.cos(angle) - math.cos(phase),
                                     np.sin(angle) - math.sin(phase)])
    return spot[None, :] + loop + rng.normal(0.0, cfg.noise_std, (times.size, 2))


_ARCHETYPE_BUILDERS = {
    "counter_flow": _counter_flow,
    "erratic_speed": _erratic_speed,
    "off_lane": _off_lane,
    "loiter": _loiter,
}


def generate_scene(cfg: SynthConfig) -> tuple[Scene, GroundTruth]:
    """Build a labeled scene: lane members first, then planted anomalies.

    Anomaly instances are assigned to lanes round-robin in the order the
    anomaly specs expand. Fully deterministic per seed.
    """
    rng = np.random.default_rng(cfg.seed)
    times = _times(cfg)
    total = sum(l.count for l in cfg.lanes) + sum(a.count for a in cfg.anomalies)
    if total < 2:
        raise InvalidConfig("config yields fewer than 2 trajectories")
    width = max(3, len(str(total - 1)))

    trajectories: list[Trajectory] = []
    labels: dict[str, int] = {}
    idx = 0
    for lane in cfg.lanes:
        for _ in range(lane.count):
            tid = f"t{idx:0{width}d}"
            trajectories.append(_make_trajectory(tid, times, _lane_member(lane, cfg, rng, times)))
            labels[tid] = 0
            idx += 1

    instances = [a.archetype for a in cfg.anomalies for _ in range(a.count)]
    for j, archetype in enumerate(instances):
        lane = cfg.lanes[j % len(cfg.lanes)]
        tid = f"t{idx:0{width}d}"
        pos = _ARCHETYPE_BUILDERS[archetype](lane, cfg, rng, times)
        trajectories.append(_make_trajectory(tid, times, pos))
        labels[tid] = 1
        idx += 1

    return Scene.from_trajectories(trajectories), GroundTruth(labels)


def labels_to_csv(truth: GroundTruth) -> str:
    lines = ["id,label"]
    lines.extend(f"{tid},{lab}" for tid, lab in truth.labels.items())
    return "\n".join(lines) + "\n"


def parse_labels(text: str) -> GroundTruth:
    """Parse a ground-truth CSV of ``id,label`` rows, label in {0, 1}."""
    labels: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if lineno == 1 and tuple(f.lower() for f in fields) == ("id", "label"):
            continue
        if len(fields) != 2 or fields[1] not in ("0", "1"):
            raise InvalidConfig(f"label line {lineno}: expected 'id,label' with label 0 or 1")
        labels[fields[0]] = int(fields[1])
    if not labels:
        raise InvalidConfig("no label rows found")
    return GroundTruth(labels)


@dataclass(frozen=True)
class Metrics:
    """Confusion counts and the derived detection scores."""

    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f_score: float
    accuracy: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
        recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
        f_score = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        total = tp + fp + fn + tn
        accuracy = (tp + tn) / total if total else 1.0
        return cls(tp, fp, fn, tn, precision, recall, f_score, accuracy)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "accuracy": self.accuracy,
        }


def evaluate(predicted, truth: GroundTruth) -> Metrics:
    """Score a predicted anomaly id set against the ground truth."""
    predicted = set(predicted)
    universe = set(truth.labels)
    unknown = predicted - universe
    if unknown:
        raise IdMismatch(f"predicted ids not in ground truth: {sorted(unknown)[:5]}")
    positives = truth.positives()
    tp = len(predicted & positives)
    fp = len(predicted - positives)
    fn = len(positives - predicted)
    tn = len(universe) - tp - fp - fn
    return Metrics.from_counts(tp, fp, fn, tn)


@dataclass(frozen=True)
class BenchmarkResult:
    synth: SynthConfig
    detector: DetectorConfig
    per_seed: tuple[tuple[int, Metrics], ...]

    def aggregate(self) -> dict:
        out = {}
        for name in ("precision", "recall", "f_score", "accuracy"):
            vals = np.array([getattr(m, name) for _, m in self.per_seed])
            out[name] = {"mean": float(vals.mean()), "std": float(vals.std())}
        return out

    def to_dict(self) -> dict:
        return {
            "synth": self.synth.to_dict(),
            "detector": self.detector.to_dict(),
            "per_seed": [
                {"seed": seed, **metrics.to_dict()} for seed, metrics in self.per_seed
            ],
            "aggregate": self.aggregate(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def run_benchmark(
    synth: SynthConfig,
    detector_cfg: DetectorConfig = DetectorConfig(),
    n_seeds: int = 20,
) -> BenchmarkResult:
    """Generate, detect, and score over consecutive seeds."""
    if n_seeds < 1:
        raise InvalidConfig("n_seeds must be at least 1")
    rows = []
    for i in range(n_seeds):
        cfg = replace(synth, seed=synth.seed + i)
        scene, truth = generate_scene(cfg)
        report: AnomalyReport = detect(scene, detector_cfg)
        rows.append((cfg.seed, evaluate(set(report.anomalies), truth)))
    return BenchmarkResult(synth, detector_cfg, tuple(rows))
