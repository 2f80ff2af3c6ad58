"""Task worlds and rules: pick-and-place (3D) and letter tracing (planar).

Worlds are immutable; ``step`` returns a new world plus the events raised
during the tick.  Event names: grasp, collision, release, success, done,
timeout, halt (the last is attached by the session when the collision
guard suppresses a step).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import Plane, Pose, vec3
from .letters import tracing_target
from .metrics import PolylineIndex
from .scene import Scene

TIME_LIMIT_S = 90.0
GRASP_RADIUS = 0.02        # m, auto-grasp when the gripper is this close
BLOCK_HALF_EXTENT = 0.025  # m
TARGET_RADIUS = 0.05       # m
PLACE_HEIGHT_TOL = 0.02    # m, block bottom must be this close to the table
PLACE_DWELL_S = 0.5
COLLISION_REARM_CLEARANCE = 0.01  # m above the table
COLLISION_REARM_S = 0.2
MIN_BLOCK_TARGET_DIST = 0.1
TRACE_DONE_COMPLETENESS = 0.99


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class PickPlaceWorld:
    block_center: np.ndarray
    target_center: np.ndarray
    table: Plane
    half_extent: float = BLOCK_HALF_EXTENT
    target_radius: float = TARGET_RADIUS
    held: bool = False
    grasp_offset: np.ndarray | None = None  # block center relative to fingertip
    collisions: int = 0
    collision_armed: bool = True
    clearance_s: float = 0.0
    place_dwell_s: float = 0.0
    elapsed: float = 0.0
    timed_out: bool = False
    succeeded: bool = False

    @property
    def finished(self) -> bool:
        return self.succeeded or self.timed_out

    def block_bottom_height(self) -> float:
        return self.table.height(self.block_center) - self.half_extent


@dataclass(frozen=True)
class TracingWorld:
    board: Plane
    board_rotation: np.ndarray           # columns: board right, board up, normal
    target_curve: np.ndarray             # (N, 2) board coordinates, m
    target_index: PolylineIndex
    pen_trace: tuple[tuple[float, float], ...] = ()
    completeness: float = 0.0
    elapsed: float = 0.0
    timed_out: bool = False
    traced: bool = False

    @property
    def finished(self) -> bool:
        return self.traced or self.timed_out

    def board_point(self, uv) -> np.ndarray:
        """Lift 2D board coordinates back into the robot frame."""
        u, v = uv
        return (self.board.point + u * self.board_rotation[:, 0]
                + v * self.board_rotation[:, 1])


def reset(scenario: str, scene: Scene, seed: int):
    """Deterministic world setup for a seed.

    Pick-and-place samples the block and target inside the scene workspace
    box, at least MIN_BLOCK_TARGET_DIST apart.  Tracing selects the letter
    set by seed, cycling hri -> ros -> lab.
    """
    if scenario == "pick_place":
        rng = np.random.default_rng(seed)
        (x0, x1), (y0, y1) = scene.workspace
        while True:
            bx, tx = rng.uniform(x0, x1, size=2)
            by, ty = rng.uniform(y0, y1, size=2)
            if np.hypot(bx - tx, by - ty) >= MIN_BLOCK_TARGET_DIST:
                break
        up = scene.table.normal
        block = scene.table.project(vec3(bx, by, 0.0)) + BLOCK_HALF_EXTENT * up
        target = scene.table.project(vec3(tx, ty, 0.0))
        return PickPlaceWorld(block_center=block, target_center=target,
                              table=scene.table)
    if scenario == "tracing":
        if scene.whiteboard is None or scene.task_rotation is None:
            raise ScenarioError("tracing requires a whiteboard in the scene")
        sets = ("hri", "ros", "lab")
        curve = tracing_target(sets[seed % len(sets)])
        return TracingWorld(board=scene.whiteboard,
                            board_rotation=scene.task_rotation,
                            target_curve=curve,
                            target_index=PolylineIndex.build(curve))
    raise ScenarioError(f"unknown scenario {scenario!r}")


def _tick_clock(world, dt: float):
    events = []
    elapsed = world.elapsed + dt
    timed_out = world.timed_out
    # 1e-9 absorbs float drift from summing dt tick by tick
    if not timed_out and not world.finished and elapsed >= TIME_LIMIT_S - 1e-9:
        timed_out = True
        events.append("timeout")
    return elapsed, timed_out, events


def step_pick_place(world: PickPlaceWorld, eef: Pose, fingertip: np.ndarray,
                    dt: float) -> tuple[PickPlaceWorld, list[str]]:
    if dt <= 0:
        raise ScenarioError("dt must be positive")
    elapsed, timed_out, events = _tick_clock(world, dt)
    if world.finished:
        return replace(world, elapsed=elapsed), []

    held = world.held
    grasp_offset = world.grasp_offset
    block = world.block_center
    if not held and np.linalg.norm(fingertip - block) < GRASP_RADIUS:
        held = True
        grasp_offset = block - fingertip
        events.append("grasp")
    if held:
        block = fingertip + grasp_offset

    table = world.table
    bottom = table.height(block) - world.half_extent
    penetrating = table.height(fingertip) < 0.0 or (held and bottom < 0.0)
    collisions = world.collisions
    armed = world.collision_armed
    clearance_s = world.clearance_s
    if penetrating:
        clearance_s = 0.0
        if armed:
            collisions += 1
            armed = False
            events.append("collision")
    else:
        clear = min(table.height(fingertip),
                    bottom if held else np.inf) > COLLISION_REARM_CLEARANCE
        clearance_s = clearance_s + dt if clear else 0.0
        if clearance_s >= COLLISION_REARM_S:
            armed = True

    succeeded = world.succeeded
    dwell = world.place_dwell_s
    if held:
        offset = block - world.target_center
        horizontal = offset - np.dot(offset, table.normal) * table.normal
        in_target = np.linalg.norm(horizontal) <= world.target_radius
        at_height = abs(bottom) <= PLACE_HEIGHT_TOL
        if in_target and at_height:
            dwell += dt
            if dwell >= PLACE_DWELL_S:
                held = False
                grasp_offset = None
                succeeded = True
                events.append("release")
                events.append("success")
        else:
            dwell = 0.0
    else:
        dwell = 0.0

    new = replace(world, block_center=block, held=held, grasp_offset=grasp_offset,
                  collisions=collisions, collision_armed=armed,
                  clearance_s=clearance_s, place_dwell_s=dwell,
                  elapsed=elapsed, timed_out=timed_out, succeeded=succeeded)
    return new, events


def step_tracing(world: TracingWorld, eef: Pose, fingertip: np.ndarray,
                 dt: float) -> tuple[TracingWorld, list[str]]:
    if dt <= 0:
        raise ScenarioError("dt must be positive")
    elapsed, timed_out, events = _tick_clock(world, dt)
    if world.finished:
        return replace(world, elapsed=elapsed), []

    pen3 = world.board.project(fingertip)
    assert abs(world.board.height(pen3)) < 1e-6
    rel = pen3 - world.board.point
    uv = (float(np.dot(rel, world.board_rotation[:, 0])),
          float(np.dot(rel, world.board_rotation[:, 1])))
    _, param = world.target_index.closest(np.array(uv))
    completeness = max(world.completeness, param)
    traced = world.traced
    if completeness >= TRACE_DONE_COMPLETENESS and not traced:
        traced = True
        events.append("done")
    new = replace(world, pen_trace=world.pen_trace + (uv,),
                  completeness=completeness, elapsed=elapsed,
                  timed_out=timed_out, traced=traced)
    return new, events


def step(world, eef: Pose, fingertip: np.ndarray, dt: float):
    if isinstance(world, PickPlaceWorld):
        return step_pick_place(world, eef, fingertip, dt)
    if isinstance(world, TracingWorld):
        return step_tracing(world, eef, fingertip, dt)
    raise ScenarioError(f"unknown world type {type(world).__name__}")
