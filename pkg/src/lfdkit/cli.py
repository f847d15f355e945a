"""Command-line pipeline: teach, plan, eval, sample-views, dataset, validate.

Exit codes: 0 success, 2 invalid input or configuration, 3 numeric failure.
Results go to stdout; set LFD_LOG=debug|info for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import poses as ps
from . import tasks as tk
from .dmp import DmpParams, reproduction_rmse
from .errors import LfdError, NumericError
from .trajectory import read_trajectory_file, rmse, write_trajectory_file

log = logging.getLogger("lfdkit")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DEFAULT_ELEVATION = (math.radians(20.0), math.radians(70.0))


def _configure_logging() -> None:
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(
        os.environ.get("LFD_LOG", "").lower(), logging.WARNING
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(message)s")


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")])
    except ValueError:
        raise LfdError(f"expected comma-separated numbers, got {text!r}") from None


def _load_program(path: str) -> tk.TaskProgram:
    return tk.load_program(Path(path).read_text(encoding="utf-8"))


def _load_symmetry(path: str):
    return ps.load_symmetry_config(Path(path).read_text(encoding="utf-8"))


def cmd_teach(args: argparse.Namespace) -> int:
    demo = read_trajectory_file(args.demo)
    program_path = Path(args.program)
    if program_path.exists():
        program = _load_program(args.program)
    else:
        program = tk.TaskProgram()
        log.info("creating new program %s", args.program)
    params = DmpParams(alpha_z=args.alpha_z, n_basis=args.n_basis, dt=args.dt)
    goal = None
    if args.goal_mode == "absolute":
        goal = tk.GoalSpec.absolute(demo.end)
    program = tk.add_subtask(program, demo, args.name, params, goal)
    program_path.write_text(tk.save_program(program), encoding="utf-8")
    sub = program.subtasks[-1]
    errors = reproduction_rmse(sub.model, demo)
    print(f"taught {args.name}: {demo.channel_count} channels, tau {sub.model.params.tau:.6g} s")
    print("reproduction rmse: " + " ".join(f"q{c}={e:.6g}" for c, e in enumerate(errors)))
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    program = _load_program(args.program)
    start = _parse_vector(args.start)
    trajectory, segments = tk.plan_task_segments(program, start, args.tau_scale)
    if args.out:
        write_trajectory_file(args.out, trajectory)
        log.info("wrote %d samples to %s", trajectory.sample_count, args.out)
    for seg in segments:
        print(f"subtask {seg.name}: goal error {seg.goal_error:.6g}")
    final = " ".join(repr(float(v)) for v in trajectory.positions[-1])
    print(f"final position: {final}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    a = read_trajectory_file(args.reference)
    b = read_trajectory_file(args.candidate)
    for c, value in enumerate(rmse(a, b)):
        print(f"q{c} {float(value)!r}")
    return EXIT_OK


def _sample(args: argparse.Namespace) -> ps.ViewpointSet:
    sym, _ = _load_symmetry(args.symmetry)
    elevation = (args.elevation_min, args.elevation_max)
    return ps.sample_viewpoints(
        args.count, args.radius, elevation, sym, args.seed, roll=args.roll
    )


def cmd_sample_views(args: argparse.Namespace) -> int:
    views = _sample(args)
    doc = {
        "schema": "lfd_viewpoints/1",
        "radius": views.radius,
        "elevation": list(views.elevation),
        "poses": [ps.pose_to_dict(p) for p in views.poses],
    }
    text = json.dumps(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(views)} viewpoints to {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_dataset(args: argparse.Namespace) -> int:
    views = _sample(args)
    # object sits at the world origin, so object-in-camera = camera pose inverted
    records = [ds.PoseRecord.from_pose(ps.invert(p)) for p in views.poses]
    layout = ds.build_dataset_layout(args.out, records)
    print(f"dataset scaffold at {layout.root}: {layout.count} poses "
          f"(pose/pose0.npy .. pose/pose{layout.count - 1}.npy)")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = ds.validate_dataset(args.root, require_images=args.require_images)
    for violation in report.violations:
        print(violation)
    if report.ok:
        print(f"ok: {report.count} entries, no violations")
        return EXIT_OK
    print(f"{len(report.violations)} violation(s) in {report.root}")
    return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfdkit",
        description="Teach motions from demonstrations, replan them, and scaffold pose datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    teach = sub.add_parser("teach", help="train a sub-task from a demo CSV and append it")
    teach.add_argument("--demo", required=True, help="demonstration CSV (t,q0,q1,...)")
    teach.add_argument("--program", required=True, help="program JSON (created if absent)")
    teach.add_argument("--name", required=True, help="sub-task name, unique in the program")
    teach.add_argument("--alpha-z", type=float, default=25.0, dest="alpha_z")
    teach.add_argument("--n-basis", type=int, default=50, dest="n_basis")
    teach.add_argument("--dt", type=float, default=None)
    teach.add_argument("--goal-mode", choices=["relative", "absolute"], default="relative")
    teach.set_defaults(func=cmd_teach)

    plan = sub.add_parser("plan", help="plan the task from a new start configuration")
    plan.add_argument("--program", required=True)
    plan.add_argument("--start", required=True, help='start configuration "v0,v1,..."')
    plan.add_argument("--tau-scale", type=float, default=1.0, dest="tau_scale")
    plan.add_argument("--out", default=None, help="output trajectory CSV")
    plan.set_defaults(func=cmd_plan)

    ev = sub.add_parser("eval", help="per-channel RMSE between two trajectory CSVs")
    ev.add_argument("reference")
    ev.add_argument("candidate")
    ev.set_defaults(func=cmd_eval)

    def sampling_flags(p):
        p.add_argument("--count", type=int, required=True)
        p.add_argument("--radius", type=float, required=True, help="camera distance in meters")
        p.add_argument("--symmetry", required=True, help="object symmetry config JSON")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--elevation-min", type=float, default=DEFAULT_ELEVATION[0],
                       dest="elevation_min", help="radians above the horizon")
        p.add_argument("--elevation-max", type=float, default=DEFAULT_ELEVATION[1],
                       dest="elevation_max")
        p.add_argument("--roll", action="store_true",
                       help="seeded in-plane roll (revolution symmetry only)")

    views = sub.add_parser("sample-views", help="sample symmetry-aware camera viewpoints")
    sampling_flags(views)
    views.add_argument("--out", default=None, help="output JSON (stdout if omitted)")
    views.set_defaults(func=cmd_sample_views)

    data = sub.add_parser("dataset", help="build the pose/rgb/mask dataset scaffold")
    sampling_flags(data)
    data.add_argument("--out", required=True, help="dataset root directory")
    data.set_defaults(func=cmd_dataset)

    val = sub.add_parser("validate", help="check a dataset directory against the template")
    val.add_argument("root")
    val.add_argument("--require-images", action="store_true", dest="require_images")
    val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LfdError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
