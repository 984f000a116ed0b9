"""Command-line front end.

Three subcommands:

  detect   score a trajectory CSV, write the JSON report, optionally
           render SVG panels
  bench    run the planted-anomaly benchmark over several seeds
  synth    write a synthetic labeled scene to CSV files

Exit codes: 0 success, 2 usage, 3 file system, 4 bad input data,
5 bad configuration, 6 pipeline failure, 7 report/scene mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .cliconfig import CliConfig, parse_config
from .detector import detect
from .errors import (
    AllZeroDistances,
    DegenerateScene,
    DigestMismatch,
    DimensionMismatch,
    EmptyInput,
    IdMismatch,
    InvalidConfig,
    InvalidValue,
    MalformedRow,
    MismatchedResolution,
    NonMonotonicTime,
    SingleCluster,
    TrajAnomalyError,
    UnknownKey,
    ZeroWeight,
)
from .harness import generate_scene, labels_to_csv, run_benchmark
from .plots import PANELS, PlotSpec, atomic_write_bytes, render_panels
from .trajmodel import parse_trajectories, scene_to_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_CONFIG = 5
EXIT_PIPELINE = 6
EXIT_PLOT = 7

_ERROR_CODES = (
    (OSError, EXIT_IO),
    ((EmptyInput, MalformedRow, NonMonotonicTime, DegenerateScene, IdMismatch), EXIT_DATA),
    ((UnknownKey, InvalidValue, InvalidConfig, ValueError), EXIT_CONFIG),
    (
        (MismatchedResolution, DimensionMismatch, SingleCluster, AllZeroDistances, ZeroWeight),
        EXIT_PIPELINE,
    ),
    (DigestMismatch, EXIT_PLOT),
)


def _exit_code(exc: BaseException) -> int:
    for types, code in _ERROR_CODES:
        if isinstance(exc, types):
            return code
    return EXIT_PIPELINE if isinstance(exc, TrajAnomalyError) else EXIT_PIPELINE


def _load_config(path: str | None) -> CliConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _cmd_detect(args) -> int:
    cfg = _load_config(args.config)
    input_path = Path(args.input)
    text = input_path.read_text(encoding="utf-8")
    parsed = parse_trajectories(text, min_samples=cfg.min_samples)
    scene = parsed.scene

    report = detect(scene, cfg.detector_config())
    atomic_write_bytes(Path(args.report), report.to_json().encode("utf-8"))

    if args.svg_dir is not None:
        panels = tuple(p.strip() for p in args.panels.split(",")) if args.panels else PANELS
        render_panels(report, scene, args.svg_dir, PlotSpec(panels))

    n = len(scene.trajectories)
    print(f"trajectories: {n} ({len(parsed.dropped)} dropped as too short)")
    print(
        "clusters: "
        + ", ".join(f"{s.space.value} k={s.k}" for s in report.spaces)
    )
    shown = " ".join(report.anomalies)
    print(f"anomalies: {len(report.anomalies)} of {n}" + (f": {shown}" if shown else ""))
    for w in report.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load_config(args.config)
    result = run_benchmark(cfg.synth_config(), cfg.detector_config(), n_seeds=cfg.bench_seeds)
    atomic_write_bytes(Path(args.out), result.to_json().encode("utf-8"))
    agg = result.aggregate()
    print(
        f"seeds: {cfg.bench_seeds} | "
        f"precision {agg['precision']['mean']:.3f}±{agg['precision']['std']:.3f} | "
        f"recall {agg['recall']['mean']:.3f}±{agg['recall']['std']:.3f} | "
        f"f {agg['f_score']['mean']:.3f} | accuracy {agg['accuracy']['mean']:.4f}"
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    scene, truth = generate_scene(cfg.synth_config())
    atomic_write_bytes(Path(args.out_scene), scene_to_csv(scene).encode("utf-8"))
    atomic_write_bytes(Path(args.out_labels), labels_to_csv(truth).encode("utf-8"))
    n_anom = sum(truth.labels.values())
    print(
        f"wrote {len(scene.trajectories)} trajectories "
        f"({n_anom} anomalous) to {args.out_scene}; labels to {args.out_labels}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajanomaly",
        description="Crowd-trajectory anomaly detection via multi-feature "
        "mean-shift clustering and entropy voting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect anomalies in a trajectory CSV")
    p.add_argument("--input", required=True, help="trajectory CSV (rows id,t,x,y)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--report", required=True, help="output JSON report path")
    p.add_argument("--svg-dir", help="directory for SVG panels")
    p.add_argument(
        "--panels",
        help=f"comma-separated panel families (default all): {','.join(PANELS)}",
    )
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("bench", help="run the planted-anomaly benchmark")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic labeled scene")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out-scene", required=True, help="output trajectory CSV path")
    p.add_argument("--out-labels", required=True, help="output label CSV path")
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # mapped to documented exit codes
        detail = str(exc) or exc.__class__.__name__
        print(f"error: {detail}", file=sys.stderr)
        return _exit_code(exc)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
