"""Synthetic scene generator self-tests and evaluation metrics."""

import numpy as np
import pytest

from trajanomaly.errors import IdMismatch, InvalidConfig
from trajanomaly.harness import (
    AnomalySpec,
    GroundTruth,
    LaneSpec,
    Metrics,
    SynthConfig,
    benchmark_config,
    evaluate,
    generate_scene,
    labels_to_csv,
    make_lane_layout,
    parse_labels,
    run_benchmark,
)
from trajanomaly.detector import DetectorConfig
from trajanomaly.trajmodel import scene_to_csv


def archetype_of(cfg: SynthConfig) -> dict[str, str]:
    """Map generated anomaly ids to archetypes, mirroring expansion order."""
    n_lane = sum(l.count for l in cfg.lanes)
    width = max(3, len(str(n_lane + sum(a.count for a in cfg.anomalies) - 1)))
    instances = [a.archetype for a in cfg.anomalies for _ in range(a.count)]
    return {f"t{n_lane + j:0{width}d}": arch for j, arch in enumerate(instances)}


def lane_of(cfg: SynthConfig) -> dict[str, LaneSpec]:
    n_lane = sum(l.count for l in cfg.lanes)
    width = max(3, len(str(n_lane + sum(a.count for a in cfg.anomalies) - 1)))
    instances = [a.archetype for a in cfg.anomalies for _ in range(a.count)]
    return {
        f"t{n_lane + j:0{width}d}": cfg.lanes[j % len(cfg.lanes)]
        for j in range(len(instances))
    }


def velocities(traj):
    pos = traj.positions()
    dt = np.diff(traj.times())
    return np.diff(pos, axis=0) / dt[:, None]


class TestGenerator:
    def test_lane_only_scene(self):
        cfg = SynthConfig(seed=0, lanes=make_lane_layout(1, 10), anomalies=())
        scene, truth = generate_scene(cfg)
        assert len(scene.trajectories) == 10
        assert set(truth.labels.values()) == {0}

    def test_same_seed_bit_identical(self):
        cfg = benchmark_config(seed=11, per_lane=10)
        s1, t1 = generate_scene(cfg)
        s2, t2 = generate_scene(cfg)
        assert scene_to_csv(s1) == scene_to_csv(s2)
        assert t1.labels == t2.labels

    def test_different_seeds_differ(self):
        a, _ = generate_scene(benchmark_config(seed=0, per_lane=5))
        b, _ = generate_scene(benchmark_config(seed=1, per_lane=5))
        assert scene_to_csv(a) != scene_to_csv(b)

    def test_labels_mark_exactly_the_planted(self):
        cfg = benchmark_config(seed=2, per_lane=8)
        scene, truth = generate_scene(cfg)
        n_anom = sum(a.count for a in cfg.anomalies)
        assert sum(truth.labels.values()) == n_anom
        assert set(truth.labels) == set(scene.ids())

    def test_scene_invariants_across_seeds(self):
        for seed in range(5):
            cfg = benchmark_config(seed=seed, per_lane=6)
            scene, _ = generate_scene(cfg)
            assert scene.diagonal > 0
            for t in scene.trajectories:
                assert len(t.samples) == cfg.n_samples
                assert len(t.samples) >= 8

    def test_counter_flow_opposes_lane(self):
        for seed in range(6):
            cfg = benchmark_config(seed=seed, per_lane=10)
            scene, _ = generate_scene(cfg)
            by_id = {t.id: t for t in scene.trajectories}
            lanes = lane_of(cfg)
            for tid, arch in archetype_of(cfg).items():
                if arch != "counter_flow":
                    continue
                traj = by_id[tid]
                disp = np.array([
                    traj.samples[-1].x - traj.samples[0].x,
                    traj.samples[-1].y - traj.samples[0].y,
                ])
                assert float(disp @ np.array(lanes[tid].direction)) < 0.0

    def test_erratic_speed_variance(self):
        for seed in range(6):
            cfg = benchmark_config(seed=seed, per_lane=10)
            scene, truth = generate_scene(cfg)
            by_id = {t.id: t for t in scene.trajectories}
            archetypes = archetype_of(cfg)
            lane_vars = [
                np.var(np.linalg.norm(velocities(by_id[tid]), axis=1))
                for tid, lab in truth.labels.items()
                if lab == 0
            ]
            for tid, arch in archetypes.items():
                if arch != "erratic_speed":
                    continue
                v = np.var(np.linalg.norm(velocities(by_id[tid]), axis=1))
                assert v > 4.0 * np.mean(lane_vars)

    def test_loiter_displacement(self):
        for seed in range(6):
            cfg = benchmark_config(seed=seed, per_lane=10)
            scene, truth = generate_scene(cfg)
            by_id = {t.id: t for t in scene.trajectories}
            lane_disp = [
                np.hypot(by_id[tid].samples[-1].x - by_id[tid].samples[0].x,
                         by_id[tid].samples[-1].y - by_id[tid].samples[0].y)
                for tid, lab in truth.labels.items()
                if lab == 0
            ]
            for tid, arch in archetype_of(cfg).items():
                if arch != "loiter":
                    continue
                d = np.hypot(by_id[tid].samples[-1].x - by_id[tid].samples[0].x,
                             by_id[tid].samples[-1].y - by_id[tid].samples[0].y)
                assert d < 0.10 * np.mean(lane_disp)

    def test_off_lane_crosses_its_lane(self):
        for seed in range(6):
            cfg = benchmark_config(seed=seed, per_lane=10)
            scene, _ = generate_scene(cfg)
            by_id = {t.id: t for t in scene.trajectories}
            lanes = lane_of(cfg)
            for tid, arch in archetype_of(cfg).items():
                if arch != "off_lane":
                    continue
                traj = by_id[tid]
                disp = np.array([
                    traj.samples[-1].x - traj.samples[0].x,
                    traj.samples[-1].y - traj.samples[0].y,
                ])
                disp = disp / np.linalg.norm(disp)
                cosine = abs(float(disp @ np.array(lanes[tid].direction)))
                assert cosine < 0.3

    def test_invalid_configs(self):
        with pytest.raises(InvalidConfig):
            SynthConfig(seed=0, lanes=())
        with pytest.raises(InvalidConfig):
            AnomalySpec("teleport", 1)
        with pytest.raises(InvalidConfig):
            AnomalySpec("loiter", -1)
        with pytest.raises(InvalidConfig):
            SynthConfig(seed=0, lanes=make_lane_layout(1, 5), duration=0.0)
        with pytest.raises(InvalidConfig):
            SynthConfig(seed=0, lanes=make_lane_layout(1, 5), noise_std=-1.0)
        with pytest.raises(InvalidConfig):
            make_lane_layout(0, 5)
        with pytest.raises(InvalidConfig):
            make_lane_layout(99, 5)
        with pytest.raises(InvalidConfig):
            LaneSpec((0, 1, 0, 1), (0.0, 0.0), 1.0, 0.1, 1)

    def test_two_samples_minimum(self):
        with pytest.raises(InvalidConfig):
            SynthConfig(seed=0, lanes=make_lane_layout(1, 5), duration=0.1, sample_rate=1.0)


class TestLabelsIo:
    def test_round_trip(self):
        truth = GroundTruth({"a": 0, "b": 1, "c": 0})
        again = parse_labels(labels_to_csv(truth))
        assert again.labels == truth.labels

    def test_header_optional(self):
        assert parse_labels("x,1\ny,0").labels == {"x": 1, "y": 0}

    def test_bad_label_rejected(self):
        with pytest.raises(InvalidConfig):
            parse_labels("id,label\nx,2")
        with pytest.raises(InvalidConfig):
            parse_labels("")


class TestEvaluate:
    def truth(self, positives, total=10):
        return GroundTruth({f"t{i}": int(f"t{i}" in positives) for i in range(total)})

    def test_perfect_prediction(self):
        truth = self.truth({"t0", "t1"})
        m = evaluate({"t0", "t1"}, truth)
        assert (m.precision, m.recall, m.f_score, m.accuracy) == (1.0, 1.0, 1.0, 1.0)

    def test_known_confusion(self):
        truth = self.truth({"t0", "t1"})
        m = evaluate({"t0", "t1", "t2"}, truth)
        assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 0, 7)
        assert m.precision == pytest.approx(0.6667, abs=1e-4)
        assert m.recall == 1.0
        assert m.f_score == pytest.approx(0.8, abs=1e-12)
        assert m.accuracy == pytest.approx(0.9, abs=1e-12)

    def test_empty_empty_conventions(self):
        m = evaluate(set(), self.truth(set()))
        assert (m.precision, m.recall, m.accuracy) == (1.0, 1.0, 1.0)

    def test_f_zero_when_both_zero(self):
        m = Metrics.from_counts(tp=0, fp=3, fn=2, tn=5)
        assert m.precision == 0.0 and m.recall == 0.0 and m.f_score == 0.0

    def test_accuracy_identity(self, rng):
        for _ in range(20):
            truth = self.truth({f"t{i}" for i in rng.choice(10, 3, replace=False)})
            pred = {f"t{i}" for i in rng.choice(10, rng.integers(0, 6), replace=False)}
            m = evaluate(pred, truth)
            total = m.tp + m.fp + m.fn + m.tn
            assert m.accuracy == pytest.approx(1.0 - (m.fp + m.fn) / total, abs=1e-12)

    def test_permutation_invariant(self):
        labels = {"a": 1, "b": 0, "c": 1, "d": 0}
        m1 = evaluate({"a", "b"}, GroundTruth(labels))
        m2 = evaluate({"b", "a"}, GroundTruth(dict(reversed(list(labels.items())))))
        assert m1 == m2

    def test_id_mismatch(self):
        with pytest.raises(IdMismatch):
            evaluate({"zzz"}, self.truth({"t0"}))


class TestBenchmark:
    def test_single_seed_aggregates_equal_row(self):
        cfg = benchmark_config(seed=0, per_lane=10)
        result = run_benchmark(cfg, DetectorConfig(), n_seeds=1)
        assert len(result.per_seed) == 1
        agg = result.aggregate()
        seed, metrics = result.per_seed[0]
        assert seed == 0
        for name in ("precision", "recall", "f_score", "accuracy"):
            assert agg[name]["mean"] == getattr(metrics, name)
            assert agg[name]["std"] == 0.0

    def test_no_anomalies_recall_convention(self):
        cfg = benchmark_config(
            seed=0, per_lane=10, counter_flow=0, erratic_speed=0, off_lane=0, loiter=0
        )
        result = run_benchmark(cfg, DetectorConfig(), n_seeds=2)
        for _, metrics in result.per_seed:
            assert metrics.recall == 1.0

    def test_seed_count_validated(self):
        with pytest.raises(InvalidConfig):
            run_benchmark(benchmark_config(per_lane=5), DetectorConfig(), n_seeds=0)

    def test_json_document(self):
        cfg = benchmark_config(seed=0, per_lane=8)
        result = run_benchmark(cfg, DetectorConfig(), n_seeds=2)
        doc = result.to_dict()
        assert set(doc) == {"synth", "detector", "per_seed", "aggregate"}
        assert [row["seed"] for row in doc["per_seed"]] == [0, 1]
        assert set(doc["aggregate"]) == {"precision", "recall", "f_score", "accuracy"}
