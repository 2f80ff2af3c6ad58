"""Headless command line: inspect frames, run seeded operator simulations,
compute reports, replay logs, and serve live sessions.

Exit codes: 0 on success, 1 on runtime failure, 2 on bad flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import logs as logmod
from .frames import FRAME_NAMES, frame_from_name
from .metrics import (TrialRow, combined_objective, frame_diagnostics,
                      write_report_csv)
from .operator import OperatorModel, natural_belief, run_episode
from .scene import default_scene, load_scene, save_scene
from .session import SessionCore, run_qualification


def _load_scene_arg(path: str | None, scenario: str | None = None,
                    frame: str | None = None):
    scene = load_scene(path) if path else default_scene()
    if scenario or frame:
        from dataclasses import replace
        changes = {}
        if scenario:
            if scenario == "tracing" and scene.whiteboard is None:
                scene = default_scene(scenario="tracing",
                                      frame=frame or scene.frame_name)
            changes["scenario"] = scenario
        if frame:
            changes["frame_name"] = frame
        scene = replace(scene, **changes)
    return scene


def _frame_report(scene, name: str) -> dict:
    frame = frame_from_name(name, scene)
    diag = frame_diagnostics(frame, scene, constraint=scene.whiteboard)
    report = {
        "frame": name,
        "kind": frame.kind,
        "device_dim": frame.device_dim,
        "wheel_z": frame.wheel_z,
        "columns": [list(c) for c in frame.columns],
        "misalignment_deg": math.degrees(diag.misalignment_total),
        "misalignment_rpy_deg": [math.degrees(a) for a in diag.misalignment_rpy],
        "weighted_misalignment": diag.weighted_misalignment,
        "naturalness_deg": math.degrees(diag.naturalness_angle),
        "semantics_residual": diag.semantics_residual,
    }
    if frame.raw_columns is not None:
        report["raw_columns"] = [list(c) for c in frame.raw_columns]
    return report


def cmd_frames(args) -> int:
    scene = _load_scene_arg(args.scene)
    names = [args.frame] if args.frame else list(FRAME_NAMES)
    reports = []
    for name in names:
        try:
            reports.append(_frame_report(scene, name))
        except Exception as exc:  # unbuildable frames are reported, not fatal
            reports.append({"frame": name, "error": str(exc)})
    if args.format == "json":
        print(json.dumps(reports, indent=2))
    else:
        for r in reports:
            if "error" in r:
                print(f"{r['frame']:>15}: unavailable ({r['error']})")
                continue
            cols = "; ".join("[" + ", ".join(f"{x:+.3f}" for x in c) + "]"
                             for c in r["columns"])
            print(f"{r['frame']:>15}: misalign {r['misalignment_deg']:6.1f} deg  "
                  f"natural {r['naturalness_deg']:6.1f} deg  columns {cols}")
    return 0


def cmd_simulate(args) -> int:
    scene = _load_scene_arg(args.scene, args.scenario, args.frame)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.operator_belief == "natural":
        believed = natural_belief(scene)
    else:
        believed = frame_from_name(args.operator_belief, scene)
    model = OperatorModel(believed_frame=believed, gain=args.gain,
                          noise_std=args.noise,
                          depth_strategy="wheel" if scene.device_wheel
                          else "device_axis")
    summary = []
    for i in range(args.trials):
        seed = args.seed + i
        trial = run_episode(scene, scene.scenario, scene.frame_name, model, seed)
        path = out / f"{scene.frame_name}_{scene.scenario}_seed{seed}.jsonl"
        logmod.write_trial_log(path, trial)
        summary.append({"log": str(path), "seed": seed,
                        "outcome": trial.outcome,
                        "ticks": trial.completion_tick,
                        "path_length_m": trial.path_length_m})
        print(f"{path}: outcome={trial.outcome} "
              f"ticks={trial.completion_tick} "
              f"path={trial.path_length_m:.3f} m", file=sys.stderr)
    if args.format == "json":
        print(json.dumps(summary, indent=2))
    return 0


def cmd_report(args) -> int:
    files = sorted(Path(args.logs).glob("*.jsonl"))
    if not files:
        print(f"no .jsonl logs under {args.logs}", file=sys.stderr)
        return 1
    rows = []
    for path in files:
        header, ticks, final = logmod.read_log(path)
        metrics = final["metrics"]
        if metrics["scenario"] == "pick_place":
            error = float(metrics["collisions"]) + (0.0 if metrics["success"] else 1.0)
        else:
            traj = metrics.get("trajectory_error")
            error = traj["total"] if traj else 2.0
        rows.append(TrialRow(participant=f"seed{header['seed']}",
                             condition=header["frame"],
                             time_s=metrics["time_s"], error=error))
    combined = combined_objective(rows)
    write_report_csv(combined, args.out)
    if args.format == "json":
        print(json.dumps([r.__dict__ for r in combined], indent=2))
    else:
        for r in combined:
            print(f"{r.participant:>8} {r.condition:>15} time={r.time_s:7.2f} "
                  f"error={r.error:6.3f} raw={r.raw:6.3f} rel={r.relative:+7.3f}")
    return 0


def cmd_replay(args) -> int:
    stored, recomputed = logmod.replay(args.log)
    payload = {"stored": stored, "recomputed": recomputed,
               "match": all(stored.get(k) == v for k, v in recomputed.items())}
    print(json.dumps(payload, indent=2))
    return 0 if payload["match"] else 1


def cmd_qualify(args) -> int:
    scene = _load_scene_arg(args.scene)
    session = SessionCore(scene)
    session.handle_message({"type": "hello"}, 0)
    passed, max_rtt = run_qualification(session, args.rtt)
    print(json.dumps({"pass": passed, "max_rtt_ms": max_rtt}))
    return 0 if passed else 1


def cmd_serve(args) -> int:
    from .server import run_server

    scene = _load_scene_arg(args.scene)
    run_server(scene, host=args.host, port=args.port, logs_override=args.log_dir)
    return 0


def cmd_init_scene(args) -> int:
    scene = default_scene(scenario=args.scenario, frame=args.frame,
                          camera_yaw=math.radians(args.camera_yaw_deg),
                          camera_pitch=math.radians(args.camera_pitch_deg),
                          seed=args.seed)
    save_scene(scene, args.out)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleframe",
        description="Control-frame engine and teleoperation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frames", help="print frame matrices and diagnostics")
    p.add_argument("--scene", help="scene JSON (default: built-in scene)")
    p.add_argument("--frame", choices=FRAME_NAMES, help="single frame to show")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("simulate", help="run seeded operator episodes")
    p.add_argument("--scene")
    p.add_argument("--scenario", choices=("pick_place", "tracing"))
    p.add_argument("--frame", choices=FRAME_NAMES)
    p.add_argument("--operator-belief", default="natural",
                   help="frame the synthetic operator believes in "
                        "('natural' or any frame name)")
    p.add_argument("--gain", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output log directory")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="combined objective measure over logs")
    p.add_argument("--logs", required=True, help="directory of .jsonl logs")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("replay", help="recompute metrics from a log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("qualify", help="simulate the latency qualification")
    p.add_argument("--scene")
    p.add_argument("--rtt", type=int, default=50, help="simulated RTT in ms")
    p.set_defaults(func=cmd_qualify)

    p = sub.add_parser("serve", help="run the websocket teleoperation server")
    p.add_argument("--scene")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--log-dir", help="overrides TELEFRAME_LOG_DIR")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("init-scene", help="write a default scene JSON")
    p.add_argument("--scenario", choices=("pick_place", "tracing"),
                   default="pick_place")
    p.add_argument("--frame", choices=FRAME_NAMES, default="camera")
    p.add_argument("--camera-yaw-deg", type=float, default=30.0)
    p.add_argument("--camera-pitch-deg", type=float, default=-35.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init_scene)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
