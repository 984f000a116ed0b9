"""Figure panels rendered to SVG files from a detection report.

Four panel families mirror the pipeline stages: per-space cluster coloring,
per-space anomaly flags, the overall vote outcome, and the scene overview.
Output bytes are deterministic: the SVG hash salt is pinned, creation dates
are stripped, and files are written atomically (temp file then rename).

Every trajectory polyline carries a ``traj-<id>`` group id and every start
marker a ``start-<id>`` group id, so the SVGs are machine-checkable.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from io import BytesIO
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .detector import AnomalyReport
from .errors import DigestMismatch
from .trajmodel import Scene, scene_digest

PANELS = ("clusters", "anomalies", "overall", "scene")

ANOMALY_COLOR = "#d62728"
NORMAL_COLOR = "#1f77b4"
FADE_COLOR = "#b0b0b0"
START_COLOR = "#2ca02c"

# Cluster palette, red-free so anomaly strokes stay unambiguous.
CLUSTER_PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

_SVG_HASH_SALT = "trajanomaly"
_FIGSIZE = (6.4, 5.6)


@dataclass(frozen=True)
class PlotSpec:
    """Which panel families to emit."""

    panels: tuple[str, ...] = PANELS

    def __post_init__(self):
        panels = tuple(self.panels)
        if not panels:
            raise ValueError("at least one panel must be selected")
        unknown = [p for p in panels if p not in PANELS]
        if unknown:
            raise ValueError(f"unknown panels {unknown}; expected subset of {PANELS}")
        object.__setattr__(self, "panels", panels)


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so no partial files leak."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal", adjustable="datalim")
    return fig, ax


def _draw_trajectory(ax, traj, color: str, zorder: int = 2, width: float = 1.0):
    ax.plot(
        traj.xs(),
        traj.ys(),
        color=color,
        linewidth=width,
        zorder=zorder,
        gid=f"traj-{traj.id}",
        solid_capstyle="round",
    )


def _draw_start(ax, traj, zorder: int = 5):
    ax.scatter(
        [traj.samples[0].x],
        [traj.samples[0].y],
        s=12,
        color=START_COLOR,
        zorder=zorder,
        gid=f"start-{traj.id}",
    )


def _render(fig) -> bytes:
    buf = BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _cluster_panel(scene: Scene, space_result) -> bytes:
    fig, ax = _new_axes(
        f"clusters: {space_result.space.value} (k={space_result.k})"
    )
    for traj, assign in zip(scene.trajectories, space_result.model.assignments):
        _draw_trajectory(ax, traj, CLUSTER_PALETTE[int(assign) % len(CLUSTER_PALETTE)])
    return _render(fig)


def _anomaly_panel(scene: Scene, space_result) -> bytes:
    fig, ax = _new_axes(f"anomalies: {space_result.space.value}")
    for traj, flagged in zip(scene.trajectories, space_result.flags):
        if not flagged:
            _draw_trajectory(ax, traj, FADE_COLOR, zorder=2)
    for traj, flagged in zip(scene.trajectories, space_result.flags):
        if flagged:
            _draw_trajectory(ax, traj, ANOMALY_COLOR, zorder=3, width=1.6)
    return _render(fig)


def _overall_panel(scene: Scene, anomalous: set[str]) -> bytes:
    fig, ax = _new_axes(f"overall anomalies ({len(anomalous)})")
    for traj in scene.trajectories:
        if traj.id not in anomalous:
            _draw_trajectory(ax, traj, NORMAL_COLOR, zorder=2)
    for traj in scene.trajectories:
        if traj.id in anomalous:
            _draw_trajectory(ax, traj, ANOMALY_COLOR, zorder=3, width=1.6)
        _draw_start(ax, traj)
    return _render(fig)


def _scene_panel(scene: Scene, anomalous: set[str]) -> bytes:
    fig, ax = _new_axes("scene")
    for traj in scene.trajectories:
        if traj.id not in anomalous:
            _draw_trajectory(ax, traj, NORMAL_COLOR, zorder=2)
    for traj in scene.trajectories:
        if traj.id in anomalous:
            _draw_trajectory(ax, traj, ANOMALY_COLOR, zorder=3, width=1.6)
    return _render(fig)


def render_panels(
    report: AnomalyReport,
    scene: Scene,
    out_dir,
    spec: PlotSpec = PlotSpec(),
) -> list[Path]:
    """Render the selected panels as SVG files under out_dir.

    Refuses to mix a report with a scene it was not computed from.
    """
    if scene_digest(scene) != report.scene_digest:
        raise DigestMismatch("scene does not match the report's scene digest")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    anomalous = set(report.anomalies)

    jobs: list[tuple[str, bytes]] = []
    with plt.rc_context({"svg.hashsalt": _SVG_HASH_SALT}):
        if "clusters" in spec.panels:
            for sr in report.spaces:
                jobs.append((f"clusters_{sr.space.value}.svg", _cluster_panel(scene, sr)))
        if "anomalies" in spec.panels:
            for sr in report.spaces:
                jobs.append((f"anomalies_{sr.space.value}.svg", _anomaly_panel(scene, sr)))
        if "overall" in spec.panels:
            jobs.append(("overall.svg", _overall_panel(scene, anomalous)))
        if "scene" in spec.panels:
            jobs.append(("scene.svg", _scene_panel(scene, anomalous)))

    written = []
    for name, data in jobs:
        path = out_dir / name
        atomic_write_bytes(path, data)
        written.append(path)
    return written
