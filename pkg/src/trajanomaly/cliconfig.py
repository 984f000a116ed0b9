"""Flat key=value configuration files for the CLI.

One setting per line, ``#`` starts a comment, unknown keys are rejected.
Every key is optional; omitted keys fall back to the module defaults. The
synthetic-scene keys parameterize the built-in lane layout rather than
spelling out per-lane geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detector import DetectorConfig
from .errors import InvalidValue, UnknownKey
from .features import FeatureConfig
from .harness import SynthConfig, benchmark_config
from .meanshift import ClusterConfig, KernelProfile
from .trajmodel import MIN_SAMPLES_DEFAULT


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise InvalidValue(key, f"expected a real number, got {raw!r}") from None


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise InvalidValue(key, f"expected an integer, got {raw!r}") from None


def _parse_fractions(key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if len(parts) != 3:
        raise InvalidValue(key, "expected three comma-separated fractions")
    return tuple(_parse_float(key, p) for p in parts)


def _parse_kernel(key, raw):
    try:
        return KernelProfile(raw.strip().lower())
    except ValueError:
        choices = ", ".join(k.value for k in KernelProfile)
        raise InvalidValue(key, f"expected one of: {choices}") from None


def _parse_quantile(key, raw):
    if raw.strip().lower() == "none":
        return None
    return _parse_float(key, raw)


# key -> (parser, constraint description, constraint check on parsed value)
_KEY_TABLE = {
    "features.epsilon_fractions": (
        _parse_fractions,
        "three strictly increasing fractions in (0, 1]",
        lambda v: all(0 < f <= 1 for f in v) and v[0] < v[1] < v[2],
    ),
    "features.resample_n": (_parse_int, "integer >= 4", lambda v: v >= 4),
    "cluster.kernel": (_parse_kernel, "gaussian or epanechnikov", lambda v: True),
    "cluster.bandwidth_factor": (_parse_float, "> 0", lambda v: v > 0),
    "cluster.max_iterations": (_parse_int, ">= 1", lambda v: v >= 1),
    "cluster.convergence_tol": (_parse_float, "> 0", lambda v: v > 0),
    "cluster.merge_radius_factor": (_parse_float, "in (0, 1)", lambda v: 0 < v < 1),
    "detector.kappa": (_parse_float, ">= 0", lambda v: v >= 0),
    "detector.threshold_quantile": (
        _parse_quantile,
        "in (0, 1) or 'none'",
        lambda v: v is None or 0 < v < 1,
    ),
    "scene.min_samples": (_parse_int, ">= 2", lambda v: v >= 2),
    "synth.seed": (_parse_int, ">= 0", lambda v: v >= 0),
    "synth.lanes": (_parse_int, "1 to 6", lambda v: 1 <= v <= 6),
    "synth.per_lane": (_parse_int, ">= 1", lambda v: v >= 1),
    "synth.counter_flow": (_parse_int, ">= 0", lambda v: v >= 0),
    "synth.erratic_speed": (_parse_int, ">= 0", lambda v: v >= 0),
    "synth.off_lane": (_parse_int, ">= 0", lambda v: v >= 0),
    "synth.loiter": (_parse_int, ">= 0", lambda v: v >= 0),
    "synth.noise_frac": (_parse_float, ">= 0", lambda v: v >= 0),
    "synth.duration": (_parse_float, "> 0", lambda v: v > 0),
    "synth.sample_rate": (_parse_float, "> 0", lambda v: v > 0),
    "bench.seeds": (_parse_int, ">= 1", lambda v: v >= 1),
}

_DEFAULTS = {
    "features.epsilon_fractions": FeatureConfig().epsilon_fractions,
    "features.resample_n": FeatureConfig().resample_n,
    "cluster.kernel": ClusterConfig().kernel,
    "cluster.bandwidth_factor": ClusterConfig().bandwidth_factor,
    "cluster.max_iterations": ClusterConfig().max_iterations,
    "cluster.convergence_tol": ClusterConfig().convergence_tol,
    "cluster.merge_radius_factor": ClusterConfig().merge_radius_factor,
    "detector.kappa": DetectorConfig().kappa,
    "detector.threshold_quantile": DetectorConfig().threshold_quantile,
    "scene.min_samples": MIN_SAMPLES_DEFAULT,
    "synth.seed": 0,
    "synth.lanes": 3,
    "synth.per_lane": 50,
    "synth.counter_flow": 2,
    "synth.erratic_speed": 1,
    "synth.off_lane": 1,
    "synth.loiter": 1,
    "synth.noise_frac": 0.01,
    "synth.duration": 12.0,
    "synth.sample_rate": 2.5,
    "bench.seeds": 20,
}


@dataclass(frozen=True)
class CliConfig:
    """Validated settings merged over defaults, ready to drive commands."""

    values: dict = field(repr=False)

    def __getitem__(self, key):
        return self.values[key]

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig(
            kappa=self["detector.kappa"],
            threshold_quantile=self["detector.threshold_quantile"],
            features=FeatureConfig(
                epsilon_fractions=self["features.epsilon_fractions"],
                resample_n=self["features.resample_n"],
            ),
            cluster=ClusterConfig(
                kernel=self["cluster.kernel"],
                bandwidth_factor=self["cluster.bandwidth_factor"],
                max_iterations=self["cluster.max_iterations"],
                convergence_tol=self["cluster.convergence_tol"],
                merge_radius_factor=self["cluster.merge_radius_factor"],
            ),
        )

    def synth_config(self, seed: int | None = None) -> SynthConfig:
        return benchmark_config(
            seed=self["synth.seed"] if seed is None else seed,
            lane_count=self["synth.lanes"],
            per_lane=self["synth.per_lane"],
            counter_flow=self["synth.counter_flow"],
            erratic_speed=self["synth.erratic_speed"],
            off_lane=self["synth.off_lane"],
            loiter=self["synth.loiter"],
            noise_frac=self["synth.noise_frac"],
            duration=self["synth.duration"],
            sample_rate=self["synth.sample_rate"],
        )

    @property
    def min_samples(self) -> int:
        return self["scene.min_samples"]

    @property
    def bench_seeds(self) -> int:
        return self["bench.seeds"]

    def effective(self) -> dict:
        """Flat echo of every setting, kernel spelled as its name."""
        out = {}
        for key in sorted(self.values):
            v = self.values[key]
            if isinstance(v, KernelProfile):
                v = v.value
            elif isinstance(v, tuple):
                v = list(v)
            out[key] = v
        return out


def parse_config(text: str) -> CliConfig:
    """Parse key=value lines over defaults; reject unknown keys and values."""
    values = dict(_DEFAULTS)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidValue(f"line {lineno}", f"expected key=value, got {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _KEY_TABLE:
            raise UnknownKey(key)
        parser, constraint, check = _KEY_TABLE[key]
        value = parser(key, raw_value)
        if not check(value):
            raise InvalidValue(key, constraint)
        values[key] = value
        seen.add(key)
    if (
        "detector.threshold_quantile" in seen
        and values["detector.threshold_quantile"] is not None
        and "detector.kappa" in seen
    ):
        raise InvalidValue(
            "detector.threshold_quantile", "mutually exclusive with detector.kappa"
        )
    return CliConfig(values)
