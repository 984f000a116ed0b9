"""Shared builders for scenes and trajectories used across test modules."""

import numpy as np
import pytest

from trajanomaly.trajmodel import Sample, Scene, Trajectory


def make_traj(tid, points, times=None):
    """Trajectory from a list of (x, y) points, default unit-step times."""
    if times is None:
        times = list(range(len(points)))
    samples = tuple(Sample(float(t), float(x), float(y)) for t, (x, y) in zip(times, points))
    return Trajectory(tid, samples)


def line_traj(tid, start, end, n=8, t0=0.0, t1=None):
    """Straight constant-speed trajectory from start to end with n samples."""
    if t1 is None:
        t1 = t0 + n - 1
    ts = np.linspace(t0, t1, n)
    xs = np.linspace(start[0], end[0], n)
    ys = np.linspace(start[1], end[1], n)
    return make_traj(tid, list(zip(xs, ys)), times=ts)


def random_traj(rng, tid, n=12, scale=10.0):
    """Random-walk trajectory with strictly increasing times."""
    ts = np.cumsum(rng.uniform(0.2, 1.0, n))
    xy = np.cumsum(rng.normal(0.0, scale / np.sqrt(n), (n, 2)), axis=0)
    return make_traj(tid, xy.tolist(), times=ts)


def random_scene(rng, n_traj=10, n=12, spread=40.0):
    """Scene of random-walk trajectories with scattered origins."""
    trajs = []
    for i in range(n_traj):
        base = random_traj(rng, f"r{i:03d}", n=n)
        offset = rng.uniform(-spread, spread, 2)
        moved = make_traj(
            base.id,
            [(s.x + offset[0], s.y + offset[1]) for s in base.samples],
            times=[s.t for s in base.samples],
        )
        trajs.append(moved)
    return Scene.from_trajectories(trajs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
