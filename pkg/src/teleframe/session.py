"""Transport-agnostic teleoperation session core.

One session = one client connection = one virtual robot.  The core is a
deterministic state machine driven by ``handle_message(msg, now_ms)`` and
``tick(now_ms)`` (called at 30 Hz by the transport shell); both return the
messages to send.  Phases move along
connected -> qualifying -> ready -> in_trial -> done only.

The qualification screen sends 300 pings at 30 Hz and requires every
two-way latency to be strictly below 125 ms.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .frames import DYNAMIC_FRAME_NAMES, FRAME_NAMES, frame_from_name
from .geometry import GeometryError
from .kinematics import ArmModel, ArmState, arm_to_json, default_arm, fk, ik_step
from .logs import metrics_from_ticks
from .mapping import DeviceInput, MappingError, map_input
from .scenarios import TracingWorld, reset, step
from .scene import Scene, scene_to_json

PROTO_VERSION = 1
TICK_HZ = 30
QUAL_PING_COUNT = 300
QUAL_RTT_LIMIT_MS = 125   # strict: exactly 125 ms fails
QUAL_TIMEOUT_MS = 2000

CLIENT_TYPES = ("hello", "qualify_begin", "qualify_echo", "input", "clutch",
                "start_trial", "stop")


def _tick_ms(index: int) -> int:
    return (1000 * index) // TICK_HZ


class SessionCore:
    def __init__(self, scene: Scene, session_id: str = "session-0000",
                 arm: ArmModel | None = None):
        self.scene = scene
        self.session_id = session_id
        self.arm = arm or default_arm()
        self.phase = "connected"
        self.max_rtt_ms: int | None = None

        self._qual = None
        self._frame = None
        self._arm_state: ArmState | None = None
        self._world = None
        self._tick_index = 0
        self._queue: list[dict] = []
        self._clutched = False
        self._log_header: dict | None = None
        self._tick_lines: list[dict] = []
        self._final_line: dict | None = None

    # -- log access -------------------------------------------------------

    def log_lines(self) -> list[dict]:
        lines: list[dict] = []
        if self._log_header is not None:
            lines.append(self._log_header)
        lines.extend(self._tick_lines)
        if self._final_line is not None:
            lines.append(self._final_line)
        return lines

    # -- message handling --------------------------------------------------

    def _error(self, message: str) -> dict:
        return {"type": "error", "message": message}

    def _violation(self, message: str) -> dict:
        return {"type": "error", "error": "protocol_violation", "message": message}

    def handle_message(self, msg, now_ms: int) -> list[dict]:
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            return [self._error("message must be an object with a string 'type'")]
        mtype = msg["type"]
        if mtype not in CLIENT_TYPES:
            return [self._error(f"unknown message type {mtype!r}")]
        handler = getattr(self, f"_on_{mtype}")
        return handler(msg, now_ms)

    def _on_hello(self, msg, now_ms) -> list[dict]:
        if self.phase != "connected":
            return [self._violation("hello is only valid once, when connected")]
        # optional condition selection (study conditions per connection)
        frame = msg.get("frame")
        scenario = msg.get("scenario")
        if frame is not None and frame not in FRAME_NAMES:
            return [self._error(f"unknown frame {frame!r}")]
        if scenario is not None and scenario not in ("pick_place", "tracing"):
            return [self._error(f"unknown scenario {scenario!r}")]
        if scenario == "tracing" and self.scene.whiteboard is None:
            return [self._error("this scene has no whiteboard for tracing")]
        changes = {}
        if frame is not None:
            changes["frame_name"] = frame
        if scenario is not None:
            changes["scenario"] = scenario
        if changes:
            self.scene = replace(self.scene, **changes)
        self.phase = "qualifying"
        return [{
            "type": "scene",
            "proto": PROTO_VERSION,
            "session": self.session_id,
            "scene": scene_to_json(self.scene),
            "arm": arm_to_json(self.arm),
            "home_state": {"joints": list(self.arm.home_q)},
        }]

    def _on_qualify_begin(self, msg, now_ms) -> list[dict]:
        if self.phase != "qualifying":
            return [self._violation("qualification requires the qualifying phase")]
        if self._qual is not None:
            return [self._violation("qualification already running")]
        self._qual = {"start_ms": now_ms, "next_seq": 0, "sent": {},
                      "rtts": [], "last_echo_ms": now_ms}
        return []

    def _on_qualify_echo(self, msg, now_ms) -> list[dict]:
        qual = self._qual
        if self.phase != "qualifying" or qual is None:
            return [self._violation("no qualification in progress")]
        seq = msg.get("seq")
        if seq not in qual["sent"]:
            return [self._error(f"echo for unknown ping seq {seq!r}")]
        rtt = now_ms - qual["sent"].pop(seq)
        qual["rtts"].append(rtt)
        qual["last_echo_ms"] = now_ms
        if len(qual["rtts"]) == QUAL_PING_COUNT:
            return [self._finish_qualification()]
        return []

    def _finish_qualification(self, timed_out: bool = False) -> dict:
        qual = self._qual
        self._qual = None
        max_rtt = max(qual["rtts"]) if qual["rtts"] else None
        self.max_rtt_ms = max_rtt
        passed = (not timed_out and len(qual["rtts"]) == QUAL_PING_COUNT
                  and max_rtt < QUAL_RTT_LIMIT_MS)
        self.phase = "ready" if passed else "done"
        result = {"type": "qualify_result", "pass": passed,
                  "max_rtt_ms": max_rtt, "count": len(qual["rtts"])}
        if timed_out:
            result["reason"] = "qualification_timeout"
        return result

    def _on_start_trial(self, msg, now_ms) -> list[dict]:
        if self.phase != "ready":
            return [self._violation("start_trial requires the ready phase")]
        scene = self.scene
        self._world = reset(scene.scenario, scene, scene.seed)
        self._arm_state = ArmState(self.arm.home_q)
        home = fk(self.arm, self.arm.home_q)
        self._frame = frame_from_name(scene.frame_name, scene,
                                      eef_position=home.eef.translation,
                                      eef_rotation=home.eef.rotation)
        self._tick_index = 0
        self._queue = []
        self._clutched = False
        self._log_header = {
            "schema": 1,
            "kind": "session",
            "session": self.session_id,
            "scenario": scene.scenario,
            "frame": scene.frame_name,
            "seed": scene.seed,
            "mapping": scene_to_json(scene)["mapping"],
            "scene": scene_to_json(scene),
        }
        self._tick_lines = []
        self._final_line = None
        self.phase = "in_trial"
        return [{"type": "event", "event": "trial_start"}]

    def _on_input(self, msg, now_ms) -> list[dict]:
        if self.phase != "in_trial":
            return [self._violation("input is only accepted during a trial")]
        try:
            entry = {"dx": float(msg.get("dx", 0.0)),
                     "dy": float(msg.get("dy", 0.0)),
                     "dz": float(msg.get("dz", 0.0)),
                     "wheel": float(msg.get("wheel", 0.0))}
        except (TypeError, ValueError):
            return [self._error("input deltas must be numbers")]
        if not all(np.isfinite(list(entry.values()))):
            return [self._error("input deltas must be finite")]
        if "clutched" in msg:
            self._clutched = bool(msg["clutched"])
        self._queue.append(entry)
        return []

    def _on_clutch(self, msg, now_ms) -> list[dict]:
        if self.phase not in ("ready", "in_trial"):
            return [self._violation("clutch requires an active session")]
        self._clutched = bool(msg.get("on", False))
        return []

    def _on_stop(self, msg, now_ms) -> list[dict]:
        if self.phase != "in_trial":
            return [self._violation("stop requires an active trial")]
        return [self._end_trial("stop")]

    # -- ticking ------------------------------------------------------------

    def tick(self, now_ms: int) -> list[dict]:
        out: list[dict] = []
        if self.phase == "qualifying" and self._qual is not None:
            out.extend(self._qualification_tick(now_ms))
        elif self.phase == "in_trial":
            out.extend(self._trial_tick(now_ms))
        return out

    def _qualification_tick(self, now_ms: int) -> list[dict]:
        qual = self._qual
        out = []
        while (qual["next_seq"] < QUAL_PING_COUNT
               and now_ms >= qual["start_ms"] + _tick_ms(qual["next_seq"])):
            seq = qual["next_seq"]
            qual["sent"][seq] = now_ms
            qual["next_seq"] += 1
            out.append({"type": "qualify_ping", "seq": seq, "t_ms": now_ms})
        if now_ms - qual["last_echo_ms"] > QUAL_TIMEOUT_MS:
            out.append(self._finish_qualification(timed_out=True))
        return out

    def _drain_inputs(self) -> DeviceInput:
        dx = sum(e["dx"] for e in self._queue)
        dy = sum(e["dy"] for e in self._queue)
        dz = sum(e["dz"] for e in self._queue)
        wheel = sum(e["wheel"] for e in self._queue)
        self._queue = []
        if self.scene.device_wheel or self.scene.device_dim == 2:
            translation = np.array([dx, dy])
        else:
            translation = np.array([dx, dy, dz])
        if not self.scene.device_wheel:
            wheel = 0.0
        return DeviceInput(translation, dt=1.0 / TICK_HZ, wheel=wheel,
                           clutched=self._clutched)

    def _trial_tick(self, now_ms: int) -> list[dict]:
        self._tick_index += 1
        t_ms = _tick_ms(self._tick_index)
        dt = 1.0 / TICK_HZ
        events: list[str] = []
        inp = self._drain_inputs()

        state = self._arm_state
        try:
            frame = self._frame
            if self.scene.frame_name in DYNAMIC_FRAME_NAMES:
                pose = fk(self.arm, state.q)
                frame = frame_from_name(self.scene.frame_name, self.scene,
                                        eef_position=pose.eef.translation,
                                        eef_rotation=pose.eef.rotation)
            twist = map_input(frame, inp, self.scene.mapping)
            state = ik_step(self.arm, state, twist, dt, table=self.scene.table)
            if state.halted:
                events.append("halt")
        except (MappingError, GeometryError, ValueError) as exc:
            events.append(f"error:{exc}")
        self._arm_state = state

        pose = fk(self.arm, state.q)
        self._world, world_events = step(self._world, pose.eef, pose.fingertip, dt)
        events.extend(world_events)

        line = {"t_ms": t_ms,
                "input": {"translation": list(inp.translation),
                          "wheel": inp.wheel, "clutched": inp.clutched},
                "q": list(state.q), "eef": list(pose.eef.translation),
                "tip": list(pose.fingertip)}
        objects = self._objects_state()
        if isinstance(self._world, TracingWorld) and self._world.pen_trace:
            line["pen"] = list(self._world.pen_trace[-1])
        if events:
            line["events"] = events
        self._tick_lines.append(line)

        out = [{"type": "state", "t_ms": t_ms, "joints": list(state.q),
                "eef": {"position": list(pose.eef.translation),
                        "rotation": [list(row) for row in pose.eef.rotation]},
                "fingertip": list(pose.fingertip),
                "objects": objects, "events": events}]
        if self._world.finished:
            reason = "timeout" if self._world.timed_out else "completed"
            out.append(self._end_trial(reason))
        return out

    def _objects_state(self) -> dict:
        world = self._world
        if isinstance(world, TracingWorld):
            return {"kind": "tracing",
                    "completeness": world.completeness,
                    "board_point": list(world.board.point)}
        return {"kind": "pick_place",
                "block": list(world.block_center),
                "block_half_extent": world.half_extent,
                "target": list(world.target_center),
                "target_radius": world.target_radius,
                "held": world.held}

    def _end_trial(self, reason: str) -> dict:
        metrics = metrics_from_ticks(self._log_header, self._tick_lines)
        self._final_line = {"metrics": metrics, "outcome": reason}
        self.phase = "done"
        return {"type": "trial_end", "reason": reason, "metrics": metrics}


def run_qualification(session: SessionCore, rtt_ms: int,
                      start_ms: int = 0) -> tuple[bool, int | None]:
    """Drive a session's qualification against a loopback link with a fixed
    round-trip latency, stepping virtual time at the 30 Hz tick rate.

    Returns (passed, max observed RTT).  The session must be in the
    qualifying phase (i.e. hello was already handled).
    """
    session.handle_message({"type": "qualify_begin"}, start_ms)
    pending: list[tuple[int, dict]] = []  # (delivery time, echo)
    result = None
    for i in range(QUAL_PING_COUNT + rtt_ms // 33 + 10):
        now = start_ms + _tick_ms(i)
        for sent in session.tick(now):
            if sent["type"] == "qualify_ping":
                pending.append((sent["t_ms"] + rtt_ms,
                                {"type": "qualify_echo", "seq": sent["seq"]}))
            elif sent["type"] == "qualify_result":
                result = sent
        due = sorted((e for e in pending if e[0] <= now), key=lambda e: e[0])
        pending = [e for e in pending if e[0] > now]
        for at, echo in due:
            for sent in session.handle_message(echo, at):
                if sent["type"] == "qualify_result":
                    result = sent
        if result is not None:
            return result["pass"], result["max_rtt_ms"]
    return False, session.max_rtt_ms
