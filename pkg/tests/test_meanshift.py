"""Mean-shift: step formula, mode finding, ascent properties, oracles."""

import math

import numpy as np
import pytest

from trajanomaly.errors import ZeroWeight
from trajanomaly.meanshift import (
    ClusterConfig,
    KernelProfile,
    kde_value,
    mean_shift_cluster,
    mean_shift_step,
    median_pairwise_distance,
    resolve_bandwidth,
)


def step_oracle(x, data, h):
    """Direct plain-python evaluation of the Gaussian-weighted mean."""
    num = np.zeros_like(np.asarray(x, dtype=float))
    den = 0.0
    for xi in np.asarray(data, dtype=float):
        r2 = float(((np.asarray(x) - xi) / h) ** 2 @ np.ones(len(xi)))
        w = math.exp(-0.5 * r2)
        num = num + w * xi
        den += w
    return num / den


def grid_argmax_1d(data, h, start):
    """Hill-climb a dense-grid KDE from start; returns the basin argmax."""
    lo, hi = data.min() - h, data.max() + h
    grid = np.linspace(lo, hi, 10_000)
    kde = np.exp(-0.5 * ((grid[:, None] - data[None, :]) / h) ** 2).sum(axis=1)
    i = int(np.clip(np.searchsorted(grid, start), 1, len(grid) - 2))
    while True:
        if kde[i + 1] > kde[i]:
            i += 1
        elif kde[i - 1] > kde[i]:
            i -= 1
        else:
            return grid[i]
        if i in (0, len(grid) - 1):
            return grid[i]


class TestStep:
    def test_single_datum_fixed_point(self):
        p = np.array([3.0, -2.0])
        got = mean_shift_step(np.array([100.0, 100.0]), p[None, :], ClusterConfig())
        assert np.array_equal(got, p)

    def test_symmetric_pair(self):
        data = np.array([[-1.0], [1.0]])
        got = mean_shift_step(np.array([0.0]), data, ClusterConfig())
        assert got[0] == 0.0

    def test_matches_direct_formula(self, rng):
        cfg = ClusterConfig()
        for _ in range(10):
            data = rng.normal(0, 2, (30, 2))
            x = rng.normal(0, 2, 2)
            h = resolve_bandwidth(data, cfg)
            got = mean_shift_step(x, data, cfg)
            expected = step_oracle(x, data, h)
            assert np.max(np.abs(got - expected)) < 1e-12

    def test_explicit_bandwidth_override(self, rng):
        data = rng.normal(0, 1, (20, 2))
        x = rng.normal(0, 1, 2)
        got = mean_shift_step(x, data, ClusterConfig(), bandwidth=0.7)
        assert np.max(np.abs(got - step_oracle(x, data, 0.7))) < 1e-12

    def test_truncated_kernel_zero_weight(self):
        cfg = ClusterConfig(kernel=KernelProfile.EPANECHNIKOV)
        data = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ZeroWeight):
            mean_shift_step(np.array([50.0, 50.0]), data, cfg)


def two_blob_data(rng, n=30, centers=((0.0, 0.0), (10.0, 10.0)), sigma=0.1):
    points = [rng.normal(c, sigma, (n, 2)) for c in centers]
    return np.vstack(points)


class TestCluster:
    def test_two_blobs_k2_against_grid_oracle(self, rng):
        data = two_blob_data(rng)
        med = median_pairwise_distance(data)
        cfg = ClusterConfig(bandwidth_factor=1.0 / med)  # forces h = 1.0
        model = mean_shift_cluster(data, cfg)
        assert model.k == 2
        assert model.bandwidth == pytest.approx(1.0, abs=1e-12)
        blob_means = [data[:30].mean(axis=0), data[30:].mean(axis=0)]
        for center in model.centers:
            d = [np.linalg.norm(center - bm) for bm in blob_means]
            assert min(d) < 0.1
        # 2-D mesh KDE argmax oracle: each center sits at its basin's peak.
        xs = np.linspace(-2, 12, 281)
        ys = np.linspace(-2, 12, 281)
        gx, gy = np.meshgrid(xs, ys)
        mesh = np.column_stack([gx.ravel(), gy.ravel()])
        kde = np.exp(
            -0.5 * ((mesh[:, None, :] - data[None, :, :]) ** 2).sum(axis=2)
        ).sum(axis=1)
        kde = kde.reshape(gy.shape)
        for center in model.centers:
            j = int(np.argmin(np.abs(xs - center[0])))
            i = int(np.argmin(np.abs(ys - center[1])))
            window = kde[max(0, i - 10):i + 11, max(0, j - 10):j + 11]
            peak = np.unravel_index(np.argmax(window), window.shape)
            px = xs[max(0, j - 10) + peak[1]]
            py = ys[max(0, i - 10) + peak[0]]
            assert math.hypot(center[0] - px, center[1] - py) < 0.11

    def test_identical_rows_degenerate(self):
        data = np.tile([2.5, -1.0], (10, 1))
        model = mean_shift_cluster(data, ClusterConfig())
        assert model.k == 1
        assert model.degenerate
        assert np.array_equal(model.centers[0], [2.5, -1.0])
        assert np.array_equal(model.assignments, np.zeros(10, dtype=int))

    def test_huge_bandwidth_single_mode_at_grand_mean(self, rng):
        data = rng.normal(0, 3, (50, 2))
        model = mean_shift_cluster(data, ClusterConfig(bandwidth_factor=1e3))
        assert model.k == 1
        assert np.linalg.norm(model.centers[0] - data.mean(axis=0)) < 1e-3

    def test_assignments_are_nearest_center(self, rng):
        data = two_blob_data(rng, n=20)
        model = mean_shift_cluster(data, ClusterConfig())
        d = np.linalg.norm(data[:, None, :] - model.centers[None, :, :], axis=2)
        assert np.array_equal(model.assignments, d.argmin(axis=1))

    def test_centers_farther_than_merge_radius(self, rng):
        data = rng.normal(0, 1.5, (60, 2))
        cfg = ClusterConfig()
        model = mean_shift_cluster(data, cfg)
        radius = cfg.merge_radius_factor * model.bandwidth
        for i in range(model.k):
            for j in range(i + 1, model.k):
                assert np.linalg.norm(model.centers[i] - model.centers[j]) > radius


class TestAscentProperties:
    def iterate_with_step(self, data, cfg):
        """Drive the public step op from every row; yield each iterate path."""
        h = resolve_bandwidth(data, cfg)
        for start in data:
            path = [np.asarray(start, dtype=float)]
            for _ in range(cfg.max_iterations):
                nxt = mean_shift_step(path[-1], data, cfg, bandwidth=h)
                shift = np.linalg.norm(nxt - path[-1])
                path.append(nxt)
                if shift < cfg.convergence_tol:
                    break
            yield h, path

    def test_kde_non_decreasing_along_paths(self, rng):
        cfg = ClusterConfig()
        for _ in range(3):
            data = rng.normal(0, 1, (40, 2))
            for h, path in self.iterate_with_step(data, cfg):
                values = [kde_value(p, data, h) for p in path]
                for a, b in zip(values, values[1:]):
                    assert b >= a - 1e-12

    def test_step_points_uphill(self, rng):
        cfg = ClusterConfig()
        data = rng.normal(0, 1, (50, 2))
        h = resolve_bandwidth(data, cfg)
        checked = 0
        for x in rng.normal(0, 1, (100, 2)):
            nxt = mean_shift_step(x, data, cfg, bandwidth=h)
            disp = nxt - x
            if np.linalg.norm(disp) < 1e-9:
                continue
            eps = 1e-6
            grad = np.array([
                (kde_value(x + [eps, 0], data, h) - kde_value(x - [eps, 0], data, h)) / (2 * eps),
                (kde_value(x + [0, eps], data, h) - kde_value(x - [0, eps], data, h)) / (2 * eps),
            ])
            assert float(disp @ grad) > 0.0
            checked += 1
        assert checked >= 90

    def test_centers_are_stationary_points(self, rng):
        cfg = ClusterConfig()
        data = two_blob_data(rng, n=25, centers=((0, 0), (6, 1)), sigma=0.4)
        model = mean_shift_cluster(data, cfg)
        h = model.bandwidth
        for center in model.centers:
            # Displacement implied by the finite-difference density gradient.
            eps = 1e-5
            grad = np.array([
                (kde_value(center + [eps, 0], data, h) - kde_value(center - [eps, 0], data, h))
                / (2 * eps),
                (kde_value(center + [0, eps], data, h) - kde_value(center - [0, eps], data, h))
                / (2 * eps),
            ])
            r2 = (((center[None, :] - data) / h) ** 2).sum(axis=1)
            total_weight = cfg.kernel.weights(r2).sum()
            implied_shift = (h * h) * grad / total_weight
            assert np.linalg.norm(implied_shift) < 10 * cfg.convergence_tol


class TestOneDimensionalOracle:
    def test_modes_match_grid_argmax(self, rng):
        cfg = ClusterConfig()
        for _ in range(5):
            parts = [
                rng.normal(rng.uniform(-5, 5), rng.uniform(0.3, 1.2), rng.integers(40, 110))
                for _ in range(rng.integers(1, 4))
            ]
            data = np.concatenate(parts)[:, None]
            model = mean_shift_cluster(data, cfg)
            h = model.bandwidth
            flat = data.ravel()
            for center in model.centers:
                peak = grid_argmax_1d(flat, h, center[0])
                assert abs(center[0] - peak) < h / 10


class TestStability:
    def test_permutation_stable(self, rng):
        data = two_blob_data(rng, n=25)
        cfg = ClusterConfig()
        base = mean_shift_cluster(data, cfg)
        perm = rng.permutation(len(data))
        permuted = mean_shift_cluster(data[perm], cfg)
        assert base.k == permuted.k
        # Match center sets within tolerance.
        used = set()
        mapping = {}
        for i, c in enumerate(base.centers):
            d = np.linalg.norm(permuted.centers - c, axis=1)
            j = int(np.argmin(d))
            assert d[j] < 1e-9 and j not in used
            used.add(j)
            mapping[i] = j
        for row, a in enumerate(base.assignments):
            where = int(np.argwhere(perm == row)[0][0])
            assert permuted.assignments[where] == mapping[int(a)]

    def test_deterministic(self, rng):
        data = rng.normal(0, 2, (45, 3))
        m1 = mean_shift_cluster(data, ClusterConfig())
        m2 = mean_shift_cluster(data.copy(), ClusterConfig())
        assert m1.centers.tobytes() == m2.centers.tobytes()
        assert m1.assignments.tobytes() == m2.assignments.tobytes()
        assert m1.bandwidth == m2.bandwidth

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            mean_shift_cluster(np.array([[1.0, 2.0]]), ClusterConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ClusterConfig(bandwidth_factor=0.0)
        with pytest.raises(ValueError):
            ClusterConfig(merge_radius_factor=1.0)
        with pytest.raises(ValueError):
            ClusterConfig(convergence_tol=-1e-6)
