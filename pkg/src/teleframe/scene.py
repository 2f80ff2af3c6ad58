"""Scene description and its JSON file format (schema version 1).

A scene fixes everything a session needs besides the arm state: camera
pose and intrinsics, the world orientation, the table plane, the optional
whiteboard (task) plane, the mapping config, the frame name, the scenario,
and the placement seed.  All poses are expressed in the robot base frame;
schema v1 keeps the robot base at the identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import CameraIntrinsics, Plane, Pose, require_rotation, vec3
from .mapping import MappingConfig

SCENE_SCHEMA = 1

# The reference camera (yaw=0, pitch=0) stands behind the robot looking
# along +y with its up axis on world up: columns x=e1 (right), y=e3 (up),
# z=-e2 (backward).
_CAMERA_REFERENCE = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0],
    [0.0, 1.0, 0.0],
])


class SceneError(ValueError):
    pass


def camera_orientation(yaw: float, pitch: float, roll: float = 0.0) -> np.ndarray:
    """Camera rotation from yaw about world up, then pitch about the camera
    right axis (negative pitch looks down), then roll about the viewing
    direction.  yaw=pitch=0 looks horizontally along +y."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    yaw_m = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    cp, sp = math.cos(pitch), math.sin(pitch)
    pitch_m = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    cr, sr = math.cos(roll), math.sin(roll)
    roll_m = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return yaw_m @ _CAMERA_REFERENCE @ pitch_m @ roll_m


@dataclass(frozen=True)
class Scene:
    camera: Pose
    intrinsics: CameraIntrinsics
    table: Plane
    world_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    robot_base: Pose = field(default_factory=Pose.identity)
    whiteboard: Plane | None = None
    task_rotation: np.ndarray | None = None
    eef_rotation: np.ndarray | None = None
    mapping: MappingConfig = field(default_factory=MappingConfig)
    frame_name: str = "camera"
    scenario: str = "pick_place"
    seed: int = 0
    device_dim: int = 3
    device_wheel: bool = True
    orbit_focus: np.ndarray = field(default_factory=lambda: vec3(0.45, 0.0, 0.1))
    workspace: tuple[tuple[float, float], ...] = (
        (0.30, 0.60), (-0.25, 0.25))  # x/y sampling box for pick-place, m

    def __post_init__(self):
        rw = require_rotation(self.world_rotation, "world rotation")
        rw.flags.writeable = False
        object.__setattr__(self, "world_rotation", rw)
        if self.task_rotation is not None:
            rt = require_rotation(self.task_rotation, "task rotation")
            rt.flags.writeable = False
            object.__setattr__(self, "task_rotation", rt)
        if self.eef_rotation is not None:
            re = require_rotation(self.eef_rotation, "eef rotation")
            re.flags.writeable = False
            object.__setattr__(self, "eef_rotation", re)
        focus = vec3(self.orbit_focus)
        focus.flags.writeable = False
        object.__setattr__(self, "orbit_focus", focus)
        if self.device_dim not in (2, 3):
            raise SceneError("device_dim must be 2 or 3")
        if self.device_wheel and self.device_dim != 3:
            raise SceneError("a wheel device has 3 channels")
        # camera must not sit below the table
        if self.table.height(self.camera.translation) < 0.0:
            raise SceneError("camera is below the table plane")

    def with_eef_rotation(self, rotation: np.ndarray) -> "Scene":
        return replace(self, eef_rotation=rotation)

    @property
    def world_up(self) -> np.ndarray:
        return self.world_rotation[:, 2]


def _pose_to_json(p: Pose) -> dict:
    return {"rotation": [list(row) for row in p.rotation],
            "translation": list(p.translation)}


def _pose_from_json(d: dict) -> Pose:
    return Pose(np.array(d["rotation"], dtype=float), vec3(d["translation"]))


def scene_to_json(scene: Scene) -> dict:
    data = {
        "schema": SCENE_SCHEMA,
        "robot_base": _pose_to_json(scene.robot_base),
        "camera": {
            "pose": _pose_to_json(scene.camera),
            "intrinsics": {
                "focal": scene.intrinsics.focal,
                "principal": list(scene.intrinsics.principal),
                "image_size": list(scene.intrinsics.image_size),
            },
        },
        "world_rotation": [list(row) for row in scene.world_rotation],
        "table": {"point": list(scene.table.point), "normal": list(scene.table.normal)},
        "frame": scene.frame_name,
        "mapping": {
            "mode": scene.mapping.mode,
            "translation_scale": scene.mapping.translation_scale,
            "rotation_scale": scene.mapping.rotation_scale,
            "wheel_step": scene.mapping.wheel_step,
            "speed_cap": scene.mapping.speed_cap,
        },
        "scenario": scene.scenario,
        "seed": scene.seed,
        "device": {"dim": scene.device_dim, "wheel": scene.device_wheel},
        "orbit_focus": list(scene.orbit_focus),
        "workspace": [list(b) for b in scene.workspace],
    }
    if scene.whiteboard is not None:
        data["whiteboard"] = {
            "point": list(scene.whiteboard.point),
            "normal": list(scene.whiteboard.normal),
            "rotation": [list(row) for row in scene.task_rotation],
        }
    if scene.eef_rotation is not None:
        data["eef_rotation"] = [list(row) for row in scene.eef_rotation]
    return data


def scene_from_json(data: dict) -> Scene:
    if data.get("schema") != SCENE_SCHEMA:
        raise SceneError(f"unsupported scene schema {data.get('schema')!r}")
    try:
        cam = data["camera"]
        intr = cam["intrinsics"]
        scene = Scene(
            camera=_pose_from_json(cam["pose"]),
            intrinsics=CameraIntrinsics(
                focal=float(intr["focal"]),
                principal=tuple(intr["principal"]),
                image_size=tuple(intr["image_size"]),
            ),
            table=Plane(vec3(data["table"]["point"]), vec3(data["table"]["normal"])),
            world_rotation=np.array(data["world_rotation"], dtype=float),
            robot_base=_pose_from_json(data["robot_base"]),
            whiteboard=(Plane(vec3(data["whiteboard"]["point"]),
                              vec3(data["whiteboard"]["normal"]))
                        if "whiteboard" in data else None),
            task_rotation=(np.array(data["whiteboard"]["rotation"], dtype=float)
                           if "whiteboard" in data else None),
            eef_rotation=(np.array(data["eef_rotation"], dtype=float)
                          if "eef_rotation" in data else None),
            mapping=MappingConfig(**data.get("mapping", {})),
            frame_name=data.get("frame", "camera"),
            scenario=data.get("scenario", "pick_place"),
            seed=int(data.get("seed", 0)),
            device_dim=int(data.get("device", {}).get("dim", 3)),
            device_wheel=bool(data.get("device", {}).get("wheel", True)),
            orbit_focus=vec3(data.get("orbit_focus", [0.45, 0.0, 0.1])),
            workspace=tuple(tuple(b) for b in data.get(
                "workspace", [[0.30, 0.60], [-0.25, 0.25]])),
        )
    except KeyError as exc:
        raise SceneError(f"scene file is missing key {exc}") from exc
    return scene


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as f:
        return scene_from_json(json.load(f))


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scene_to_json(scene), f, indent=2)
        f.write("\n")


def default_scene(scenario: str = "pick_place", frame: str = "camera",
                  camera_yaw: float = math.radians(30.0),
                  camera_pitch: float = math.radians(-35.0),
                  seed: int = 0) -> Scene:
    """Desk-scale scene: table plane at z=0, workspace in front of the robot,
    an elevated surveillance-style camera aimed at the workspace center, and
    (for tracing) a vertical whiteboard facing the robot."""
    r_c = camera_orientation(camera_yaw, camera_pitch)
    look_at = vec3(0.45, 0.0, 0.1)
    camera = Pose(r_c, look_at - 1.8 * (-r_c[:, 2]))  # 1.8 m back along the view ray
    intrinsics = CameraIntrinsics(focal=700.0, principal=(640.0, 360.0),
                                  image_size=(1280, 720))
    table = Plane(vec3(0, 0, 0), vec3(0, 0, 1))
    whiteboard = None
    task_rotation = None
    device_dim, device_wheel = 3, True
    if scenario == "tracing":
        # vertical board at x=0.55 facing the robot; board right is -y seen
        # from the robot, board up is world up
        task_rotation = np.column_stack([vec3(0, -1, 0), vec3(0, 0, 1), vec3(-1, 0, 0)])
        whiteboard = Plane(vec3(0.55, 0.0, 0.25), vec3(-1, 0, 0))
        device_dim, device_wheel = 2, False
    return Scene(camera=camera, intrinsics=intrinsics, table=table,
                 whiteboard=whiteboard, task_rotation=task_rotation,
                 frame_name=frame, scenario=scenario, seed=seed,
                 device_dim=device_dim, device_wheel=device_wheel)
