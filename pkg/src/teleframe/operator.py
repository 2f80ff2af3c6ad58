"""Synthetic screen-feedback operator closing the teleoperation loop.

The operator watches the screen, believes inputs map through some control
frame, and commands the least-squares input that should move the observed
point toward the goal on screen.  Depth is handled through either the
scroll wheel or the device axis that (under the belief) best moves along
the camera viewing direction.

Screen-direction reasoning uses the orthographic image-plane projection;
observations come from the pinhole camera.  Episode tests keep the
workspace well inside the field of view so the two stay close.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .frames import IMAGE_PLANE_PROJECTION, ControlFrame, frame_from_name, frame_matrix
from .geometry import GeometryError, Pose, point_depth, project_point
from .kinematics import ArmModel, _chain, default_arm, dls_velocity
from .mapping import DeviceInput, map_input
from .metrics import trajectory_error
from .scenarios import PickPlaceWorld, TracingWorld, reset, step
from .scene import Scene, scene_to_json

TICK_HZ = 30
TICK_DT = 1.0 / TICK_HZ
MAX_TRIAL_TICKS = int(TICK_HZ * 90.0)
TRACE_WAYPOINT_RADIUS = 0.01  # m on the board
PLACE_CLEARANCE = 0.01        # m the block bottom is aimed above the table
APPROACH_HEIGHT = 0.06        # m: hover here until horizontally aligned
APPROACH_RADIUS = 0.04        # m of horizontal alignment before descending


class OperatorError(ValueError):
    pass


class UnobservableDirection(OperatorError):
    pass


@dataclass(frozen=True)
class OperatorModel:
    """Parameters of the synthetic operator.

    believed_frame is the operator's internal model of the mapping; it may
    differ from the frame actually driving the robot.
    """

    believed_frame: ControlFrame
    gain: float = 3.0             # 1/s
    max_input_speed: float = 0.5  # m/s
    reaction_delay: int = 0       # ticks
    noise_std: float = 0.0        # m/s
    depth_strategy: str = "wheel"  # "wheel" | "device_axis"

    def __post_init__(self):
        if self.gain <= 0 or self.max_input_speed <= 0:
            raise OperatorError("gain and max_input_speed must be positive")
        if self.reaction_delay < 0:
            raise OperatorError("reaction_delay must be >= 0")
        if self.depth_strategy not in ("wheel", "device_axis"):
            raise OperatorError(f"unknown depth strategy {self.depth_strategy!r}")


@dataclass(frozen=True)
class Observation:
    """What the operator perceives each tick.

    Pixel positions come from the rendered view; depth_error and eef_depth
    model egocentric distance perception along the camera viewing axis.
    """

    eef_screen: np.ndarray     # px
    target_screen: np.ndarray  # px
    depth_error: float         # m along the viewing axis, target minus eef
    eef_depth: float = 1.0     # m, perceived distance of the end effector


class OperatorController:
    """Stateful operator: precomputed believed-frame inverse, reaction delay,
    and seeded input noise.

    Each tick the operator reconstructs the 3D error it perceives (pixel
    error scaled by egocentric depth, plus the viewing-axis depth error) and
    commands the least-squares device input that would cancel it under the
    believed frame.
    """

    def __init__(self, model: OperatorModel, scene: Scene, seed: int = 0):
        self.model = model
        self.scene = scene
        r_c = scene.camera.rotation
        believed = model.believed_frame
        t_b = frame_matrix(believed)
        tdim = believed.translation_dim
        a_b = IMAGE_PLANE_PROJECTION @ r_c.T @ t_b[:, :tdim]
        smallest = np.linalg.svd(a_b, compute_uv=False)[-1]
        if smallest < 1e-9:
            raise UnobservableDirection(
                "believed frame maps the device plane to a degenerate screen image")
        self._pinv = np.linalg.pinv(t_b)  # believed-frame inverse (all columns)
        self._camera_rotation = r_c
        self._world_up = scene.world_up
        self._tdim = tdim
        self._has_wheel = believed.wheel_z
        self._rng = np.random.default_rng(seed)
        self._pending: deque[tuple[np.ndarray, float]] = deque()
        # stuck recovery: when the robot visibly stops responding (e.g. the
        # tabletop guard is holding it), lift for a moment and retry
        self._prev_screen: np.ndarray | None = None
        self._stuck_ticks = 0
        self._recovery_ticks = 0

    def tick(self, obs: Observation, dt: float) -> DeviceInput:
        """One reaction: perceived 3D error -> device input."""
        model = self.model
        cfg = self.scene.mapping
        focal = self.scene.intrinsics.focal
        px_err = obs.target_screen - obs.eef_screen
        # raster v grows downward; camera y grows upward; camera z is backward
        err_cam = np.array([px_err[0] / focal * obs.eef_depth,
                            -px_err[1] / focal * obs.eef_depth,
                            -obs.depth_error])
        err_world = self._camera_rotation @ err_cam
        err_world = self._apply_stuck_recovery(obs, err_world)
        u_full = self._pinv @ (model.gain * err_world)

        wheel_speed = 0.0
        if self._has_wheel:
            u, wheel_speed = u_full[:2], float(u_full[2])
        else:
            u = u_full
        speed = float(np.linalg.norm(u))
        if speed > model.max_input_speed:
            u = u * (model.max_input_speed / speed)
        wheel_speed = max(-model.max_input_speed,
                          min(model.max_input_speed, wheel_speed))
        if model.noise_std > 0.0:
            u = u + self._rng.normal(0.0, model.noise_std, len(u))

        # the mapping applies translation_scale; command what realizes u
        u = u / cfg.translation_scale
        wheel = wheel_speed * dt / (cfg.wheel_step * cfg.translation_scale)

        self._pending.append((u * dt, wheel))
        if len(self._pending) <= model.reaction_delay:
            return DeviceInput(np.zeros(self._tdim), dt=dt)
        translation, wheel_out = self._pending.popleft()
        return DeviceInput(translation, dt=dt, wheel=wheel_out)

    STUCK_AFTER_TICKS = 10   # ~1/3 s without visible response
    RECOVERY_TICKS = 15      # ~1/2 s of lifting before retrying
    STUCK_PIXELS = 0.25
    STUCK_DEPTH = 0.001      # m; depth-only motion is visible as looming

    def _apply_stuck_recovery(self, obs: Observation, err_world: np.ndarray):
        """Replace the error with an upward impulse while recovering from a
        visibly unresponsive robot (typically held by the tabletop guard).

        Slow motion near a goal is expected, not stuck: the detector only
        arms while the commanded speed is a sizable fraction of the cap.
        """
        commanded_speed = self.model.gain * np.linalg.norm(err_world)
        wants_motion = commanded_speed > 0.2 * self.model.max_input_speed
        was_observed = self._prev_screen is not None
        moved = was_observed and (
            np.linalg.norm(obs.eef_screen - self._prev_screen[:2]) > self.STUCK_PIXELS
            or abs(obs.eef_depth - self._prev_screen[2]) > self.STUCK_DEPTH)
        self._prev_screen = np.array([obs.eef_screen[0], obs.eef_screen[1],
                                      obs.eef_depth])
        if self._recovery_ticks > 0:
            self._recovery_ticks -= 1
            return 0.3 * self._world_up
        if wants_motion and was_observed and not moved:
            self._stuck_ticks += 1
            if self._stuck_ticks >= self.STUCK_AFTER_TICKS:
                self._stuck_ticks = 0
                self._recovery_ticks = self.RECOVERY_TICKS
        else:
            self._stuck_ticks = 0
        return err_world


def operator_tick(model: OperatorModel, obs: Observation, dt: float,
                  scene: Scene) -> DeviceInput:
    """Single noise-free, delay-free operator reaction (stateless)."""
    bare = OperatorModel(model.believed_frame, model.gain, model.max_input_speed,
                         0, 0.0, model.depth_strategy)
    return OperatorController(bare, scene, seed=0).tick(obs, dt)


def natural_belief(scene: Scene) -> ControlFrame:
    """The mapping a person intuitively expects before any practice: screen-
    consistent motion plus gravity-consistent off-screen axes.

    For a mouse with a wheel that is horizontal motion matching the cursor
    plus a vertical wheel; for a plain mouse over a task plane, cursor-like
    motion on that plane; for a 3D controller, camera right and world up.
    """
    if scene.device_wheel:
        return frame_from_name("hybrid2", scene)
    if scene.device_dim == 2 and scene.whiteboard is not None:
        return frame_from_name("hybrid3", scene)
    if scene.device_dim == 2:
        return frame_from_name("camera", scene)
    return frame_from_name("hybrid1", scene)


# ---------------------------------------------------------------------------
# closed-loop episodes

@dataclass
class TrialLog:
    header: dict
    ticks: list
    events: list        # (tick index, event name)
    outcome: str        # success | done | timeout | max_ticks | failure:<msg>
    completion_tick: int
    path_length_m: float
    metrics: dict
    world: object = field(default=None, repr=False)


def _horizontal(v, up):
    return v - np.dot(v, up) * up


def _goal_point(world, fingertip, trace_state):
    """Current 3D goal and observed point for the operator.

    Pick-and-place goals are staged like a human approach: hover above the
    block (or the target) until horizontally aligned, then descend.
    """
    if isinstance(world, PickPlaceWorld):
        up = world.table.normal
        if not world.held:
            goal = world.block_center
            aligned = np.linalg.norm(
                _horizontal(fingertip - goal, up)) < APPROACH_RADIUS
        else:
            block_goal = world.target_center + \
                (world.half_extent + PLACE_CLEARANCE) * up
            goal = block_goal - world.grasp_offset
            aligned = np.linalg.norm(
                _horizontal(world.block_center - world.target_center,
                            up)) < APPROACH_RADIUS
        if not aligned:
            goal = goal + APPROACH_HEIGHT * up
        return goal, fingertip
    # tracing: observe the pen (the board projection of the fingertip) and
    # chase waypoints along the target curve
    pen3 = world.board.project(fingertip)
    rel = pen3 - world.board.point
    uv = np.array([np.dot(rel, world.board_rotation[:, 0]),
                   np.dot(rel, world.board_rotation[:, 1])])
    curve = world.target_curve
    idx = trace_state["waypoint"]
    while idx < len(curve) - 1 and np.linalg.norm(uv - curve[idx]) < TRACE_WAYPOINT_RADIUS:
        idx += 1
    trace_state["waypoint"] = idx
    return world.board_point(curve[idx]), pen3


def run_episode(scene: Scene, scenario: str, actual_frame: ControlFrame | str,
                operator: OperatorModel, seed: int,
                max_ticks: int = MAX_TRIAL_TICKS, arm: ArmModel | None = None,
                log_ticks: bool = True) -> TrialLog:
    """Deterministic closed-loop rollout at 30 Hz.

    observe -> operator -> input mapping -> velocity IK -> world step, until
    the world finishes or max_ticks elapse.  Module errors abort the episode
    with a failure outcome instead of raising.
    """
    arm = arm or default_arm()
    world = reset(scenario, scene, seed)
    try:
        controller = OperatorController(operator, scene, seed)
        if isinstance(actual_frame, str):
            actual_frame = frame_from_name(actual_frame, scene)
    except (GeometryError, OperatorError) as exc:
        header = {"schema": 1, "kind": "episode", "scenario": scenario,
                  "frame": str(actual_frame), "seed": seed,
                  "believed_frame": operator.believed_frame.kind,
                  "scene": scene_to_json(scene)}
        return TrialLog(header, [{"t_ms": 0, "events": ["failure"]}],
                        [(1, "failure")], f"failure:{exc}", 0, 0.0,
                        episode_metrics(world, 0, f"failure:{exc}", 0.0),
                        world=world)
    dt = TICK_DT
    damping = 0.01
    table = scene.table
    clearance = 0.01

    q = arm.home_q
    chain = _chain(arm, q, True)
    ticks: list[dict] = []
    events: list[tuple[int, str]] = []
    trace_state = {"waypoint": 0}
    outcome = "max_ticks"
    completion = max_ticks
    path = 0.0
    camera = scene.camera
    intr = scene.intrinsics

    for k in range(1, max_ticks + 1):
        _, _, eef_r, eef_p, tip, jac = chain
        try:
            goal3, observed = _goal_point(world, tip, trace_state)
            eef_px = project_point(camera, intr, observed)
            goal_px = project_point(camera, intr, goal3)
            eef_depth = point_depth(camera, observed)
            depth_err = point_depth(camera, goal3) - eef_depth
            obs = Observation(eef_px, goal_px, depth_err, eef_depth)
            inp = controller.tick(obs, dt)
            twist = map_input(actual_frame, inp, scene.mapping)
            qdot = dls_velocity(jac, twist, damping)
        except (GeometryError, OperatorError, ValueError) as exc:
            outcome = f"failure:{exc}"
            completion = k
            events.append((k, "failure"))
            if log_ticks:
                ticks.append({"t_ms": (1000 * k) // TICK_HZ,
                              "events": ["failure"]})
            break

        q_new = arm.clamp(q + qdot * dt)
        new_chain = _chain(arm, q_new, True)
        tick_events = []
        h_after = table.height(new_chain[4])
        if h_after < clearance and h_after < table.height(tip):
            # tabletop guard: suppress this step's translation
            q_new = q
            new_chain = chain
            tick_events.append("halt")
        tip_new = new_chain[4]
        eef_pose = Pose(new_chain[2], new_chain[3])
        world, world_events = step(world, eef_pose, tip_new, dt)
        tick_events.extend(world_events)

        path += float(np.linalg.norm(tip_new - tip))
        t_ms = (1000 * k) // TICK_HZ
        if log_ticks:
            line = {"t_ms": t_ms,
                    "input": {"translation": list(inp.translation),
                              "wheel": inp.wheel, "clutched": inp.clutched},
                    "q": list(q_new), "eef": list(new_chain[3]),
                    "tip": list(tip_new)}
            if isinstance(world, TracingWorld):
                line["pen"] = list(world.pen_trace[-1])
            if tick_events:
                line["events"] = tick_events
            ticks.append(line)
        for name in tick_events:
            events.append((k, name))

        q = q_new
        chain = new_chain
        if isinstance(world, PickPlaceWorld) and world.succeeded:
            outcome = "success"
            completion = k
            break
        if isinstance(world, TracingWorld) and world.traced:
            outcome = "done"
            completion = k
            break
        if world.timed_out:
            outcome = "timeout"
            completion = k
            break

    metrics = episode_metrics(world, completion, outcome, path)
    header = {
        "schema": 1,
        "kind": "episode",
        "scenario": scenario,
        "frame": actual_frame.kind,
        "seed": seed,
        "believed_frame": operator.believed_frame.kind,
        "scene": scene_to_json(scene),
    }
    return TrialLog(header, ticks, events, outcome, completion, path, metrics,
                    world=world)


def episode_metrics(world, completion_tick: int, outcome: str,
                    path_length: float) -> dict:
    time_s = completion_tick / TICK_HZ
    if isinstance(world, PickPlaceWorld):
        return {"scenario": "pick_place", "time_s": time_s,
                "collisions": world.collisions, "success": world.succeeded,
                "path_length_m": path_length, "outcome": outcome}
    err = trajectory_error(np.array(world.pen_trace), world.target_curve) \
        if world.pen_trace else None
    return {"scenario": "tracing", "time_s": time_s,
            "trajectory_error": None if err is None else {
                "accuracy": err.accuracy, "incompleteness": err.incompleteness,
                "total": err.total},
            "completed": world.traced, "path_length_m": path_length,
            "outcome": outcome}
