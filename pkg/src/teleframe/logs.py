"""JSONL trial logs: streamable, diff-able, replayable.

Line 1 is a header object (schema, scene, frame, mapping, seed); every
following line but the last is one tick; the last line carries the final
metrics.  Replaying a log recomputes the metrics from the tick lines and
must reproduce the stored ones bit for bit.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .metrics import trajectory_error
from .scenarios import reset
from .scene import scene_from_json

TICK_HZ = 30

LOG_DIR_ENV = "TELEFRAME_LOG_DIR"


class LogError(ValueError):
    pass


def dumps(obj) -> str:
    """Canonical one-line JSON used everywhere logs must be byte-stable."""
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def log_dir(override=None) -> Path:
    path = Path(override or os.environ.get(LOG_DIR_ENV, "logs"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_log(path, header: dict, ticks: list, final: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(header) + "\n")
        for tick in ticks:
            f.write(dumps(tick) + "\n")
        f.write(dumps(final) + "\n")


def write_trial_log(path, trial) -> None:
    """Write an operator TrialLog (see operator.run_episode)."""
    write_log(path, trial.header, trial.ticks,
              {"metrics": trial.metrics, "outcome": trial.outcome})


def read_log(path) -> tuple[dict, list, dict]:
    with open(path, "r", encoding="utf-8") as f:
        lines = [json.loads(line) for line in f if line.strip()]
    if len(lines) < 2:
        raise LogError(f"log {path} is truncated")
    header, final = lines[0], lines[-1]
    if "schema" not in header:
        raise LogError(f"log {path} has no header line")
    if "metrics" not in final:
        raise LogError(f"log {path} has no final metrics line")
    return header, lines[1:-1], final


def completion_tick(ticks: list) -> int:
    """1-based index of the tick that ended the trial (success/done/timeout),
    or the tick count if it ran out."""
    for i, tick in enumerate(ticks):
        events = tick.get("events", [])
        if any(e in ("success", "done", "timeout") for e in events):
            return i + 1
    return len(ticks)


def metrics_from_ticks(header: dict, ticks: list) -> dict:
    """Recompute trial metrics from the logged ticks (the replay oracle)."""
    scenario = header["scenario"]
    done = completion_tick(ticks)
    time_s = done / TICK_HZ
    all_events = [e for t in ticks for e in t.get("events", [])]
    if scenario == "pick_place":
        return {"scenario": "pick_place", "time_s": time_s,
                "collisions": all_events.count("collision"),
                "success": "success" in all_events}
    if scenario == "tracing":
        pen = [t["pen"] for t in ticks if "pen" in t]
        scene = scene_from_json(header["scene"])
        world = reset("tracing", scene, header["seed"])
        err = trajectory_error(np.array(pen), world.target_curve) if pen else None
        return {"scenario": "tracing", "time_s": time_s,
                "trajectory_error": None if err is None else {
                    "accuracy": err.accuracy, "incompleteness": err.incompleteness,
                    "total": err.total},
                "completed": "done" in all_events}
    raise LogError(f"unknown scenario {scenario!r} in log header")


def replay(path) -> tuple[dict, dict]:
    """(stored final metrics, recomputed metrics) for a log file."""
    header, ticks, final = read_log(path)
    return final["metrics"], metrics_from_ticks(header, ticks)
