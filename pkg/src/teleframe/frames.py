"""Construction of control coordinate systems.

A control frame is the matrix whose columns are the remote-environment
directions assigned to each input-device axis.  Columns are always unit
vectors but need not be mutually orthogonal.

Devices come in three flavors:
  - 2D (mouse/joystick, no wheel): 2 columns
  - 3D (VR controller / space mouse): 3 columns, all driven by translation
  - 2D + wheel (mouse with scroll wheel): 3 columns, the third driven by
    wheel detents (``wheel_z`` is set on the frame)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DEGENERACY_ANGLE,
    GeometryError,
    angle_between,
    norm,
    unit,
    vec3,
)

# Orthographic operator keeping the camera-frame x/y (image plane) components.
IMAGE_PLANE_PROJECTION = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])

STANDARD_KINDS = ("robot", "camera", "end_effector", "task", "world")
FRAME_NAMES = STANDARD_KINDS + ("orbit", "view_dependent", "hybrid1", "hybrid2", "hybrid3")

# Frames whose columns depend on the current arm state, not just the scene.
DYNAMIC_FRAME_NAMES = ("end_effector", "orbit")


class FrameError(GeometryError):
    pass


class DegenerateProjection(FrameError):
    pass


class ZeroImageVector(FrameError):
    pass


class DegenerateCross(FrameError):
    pass


class AtFocus(FrameError):
    pass


class PoleSingularity(FrameError):
    pass


class MissingSceneElement(FrameError):
    pass


@dataclass(frozen=True)
class ControlFrame:
    """Columns of the input-to-motion mapping matrix.

    device_dim equals the number of columns (2 or 3).  When ``wheel_z`` is
    true the third column is a wheel axis: device translation stays 2D and
    scroll detents drive motion along that column.  ``raw_columns`` keeps
    the unnormalized vectors for projected axes (diagnostics only).
    """

    columns: tuple[np.ndarray, ...]
    kind: str
    wheel_z: bool = False
    raw_columns: tuple[np.ndarray, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        cols = tuple(vec3(c) for c in self.columns)
        if len(cols) not in (2, 3):
            raise FrameError("a control frame has 2 or 3 columns")
        for c in cols:
            if abs(norm(c) - 1.0) > 1e-9:
                raise FrameError(f"frame column {c} is not unit length")
            c.flags.writeable = False
        if self.wheel_z and len(cols) != 3:
            raise FrameError("a wheel axis requires 3 columns")
        object.__setattr__(self, "columns", cols)
        if self.raw_columns is not None:
            raw = tuple(vec3(c) for c in self.raw_columns)
            for c in raw:
                c.flags.writeable = False
            object.__setattr__(self, "raw_columns", raw)

    @property
    def device_dim(self) -> int:
        return len(self.columns)

    @property
    def translation_dim(self) -> int:
        """Number of device translation channels (excludes the wheel)."""
        return 2 if self.wheel_z else self.device_dim


def frame_matrix(frame: ControlFrame) -> np.ndarray:
    """3 x device_dim matrix with the frame columns stacked in order."""
    return np.column_stack(frame.columns)


def padded_matrix(frame: ControlFrame) -> np.ndarray:
    """Always-3x3 matrix: 2D frames are completed with the normalized cross
    product of their two columns (used by the misalignment diagnostics)."""
    m = frame_matrix(frame)
    if m.shape[1] == 3:
        return m
    third = unit(np.cross(m[:, 0], m[:, 1]))
    return np.column_stack([m[:, 0], m[:, 1], third])


def projected_camera_axis(v_c: np.ndarray, r_c: np.ndarray, v_p: np.ndarray,
                          min_angle: float = DEGENERACY_ANGLE) -> np.ndarray:
    """Solve for the 3D direction that lies in the plane normal to v_p and
    whose orthographic image in the camera equals the image axis v_c.

    The returned vector is the exact solution of the stacked 3x3 linear
    system; it is NOT normalized.

    Raises DegenerateProjection when the camera views the plane edge-on
    (v_p within ``min_angle`` of the image plane) and ZeroImageVector for a
    zero v_c.
    """
    v_c = np.asarray(v_c, dtype=float)
    if v_c.shape != (2,):
        raise FrameError("image axis must be a 2-vector")
    if norm(v_c) < 1e-12:
        raise ZeroImageVector("image axis must be nonzero")
    v_p = unit(vec3(v_p))
    z_cam = np.asarray(r_c, dtype=float)[:, 2]
    # det([P R^T; v_p^T]) = v_p . z_cam: singular when v_p lies in the image plane
    if abs(float(np.dot(v_p, z_cam))) <= math.sin(min_angle):
        raise DegenerateProjection(
            "camera views the plane edge-on; projected axis is ill-defined")
    a = np.vstack([IMAGE_PLANE_PROJECTION @ np.asarray(r_c, dtype=float).T, v_p])
    b = np.array([v_c[0], v_c[1], 0.0])
    return np.linalg.solve(a, b)


def _camera_columns_3d(r_c: np.ndarray) -> tuple[np.ndarray, ...]:
    # device right -> camera right, forward -> viewing direction, up -> camera up
    r_c = np.asarray(r_c, dtype=float)
    return (r_c[:, 0].copy(), -r_c[:, 2], r_c[:, 1].copy())


def standard_frame(kind: str, scene, device_dim: int = 3,
                   wheel: bool = False) -> ControlFrame:
    """Build one of the catalog frames (robot/camera/end_effector/task/world).

    ``wheel=True`` marks a 2D-plus-wheel device: the frame gets a third,
    wheel-driven column (camera: the camera backward axis; others: their
    usual z axis).
    """
    if kind not in STANDARD_KINDS:
        raise FrameError(f"unknown standard frame kind {kind!r}")
    if device_dim not in (2, 3):
        raise FrameError("device_dim must be 2 or 3")
    if wheel and device_dim != 3:
        raise FrameError("a wheel device has 3 channels; use device_dim=3")

    if kind == "robot":
        basis = np.eye(3)
    elif kind == "world":
        basis = np.asarray(scene.world_rotation, dtype=float)
    elif kind == "camera":
        r_c = scene.camera.rotation
        if device_dim == 3 and not wheel:
            return ControlFrame(_camera_columns_3d(r_c), kind="camera")
        basis = np.asarray(r_c, dtype=float)
    elif kind == "task":
        if scene.task_rotation is None:
            raise MissingSceneElement("scene has no task (whiteboard) rotation")
        basis = np.asarray(scene.task_rotation, dtype=float)
    else:  # end_effector
        if scene.eef_rotation is None:
            raise MissingSceneElement("scene has no end-effector rotation snapshot")
        basis = np.asarray(scene.eef_rotation, dtype=float)

    cols = tuple(basis[:, i].copy() for i in range(device_dim))
    return ControlFrame(cols, kind=kind, wheel_z=wheel)


def hybrid_frame_1(r_c: np.ndarray, r_w: np.ndarray,
                   min_angle: float = DEGENERACY_ANGLE) -> ControlFrame:
    """Camera right + world up + their cross product (3D device).

    d_x = camera right, d_z = world up, d_y = normalize(d_z x d_x).
    Raises DegenerateCross when camera right is within ``min_angle`` of
    world up (camera rolled ~90 degrees).
    """
    d_x = np.asarray(r_c, dtype=float)[:, 0]
    d_z = np.asarray(r_w, dtype=float)[:, 2]
    if min(angle_between(d_x, d_z), angle_between(d_x, -d_z)) <= min_angle:
        raise DegenerateCross("camera right is nearly parallel to world up")
    d_y = unit(np.cross(d_z, d_x))
    return ControlFrame((unit(d_x), d_y, unit(d_z)), kind="hybrid1")


def hybrid_frame_2(r_c: np.ndarray, r_w: np.ndarray,
                   min_angle: float = DEGENERACY_ANGLE) -> ControlFrame:
    """Camera axes projected onto the horizontal (world-up-normal) plane,
    plus a wheel axis along world up (mouse + wheel device)."""
    up = np.asarray(r_w, dtype=float)[:, 2]
    raw_x = projected_camera_axis(np.array([1.0, 0.0]), r_c, up, min_angle)
    raw_y = projected_camera_axis(np.array([0.0, 1.0]), r_c, up, min_angle)
    return ControlFrame((unit(raw_x), unit(raw_y), unit(up)), kind="hybrid2",
                        wheel_z=True, raw_columns=(raw_x, raw_y, up))


def hybrid_frame_3(r_c: np.ndarray, r_t: np.ndarray,
                   min_angle: float = DEGENERACY_ANGLE) -> ControlFrame:
    """Camera axes projected onto the task (whiteboard) plane (2D device)."""
    board_normal = np.asarray(r_t, dtype=float)[:, 2]
    raw_x = projected_camera_axis(np.array([1.0, 0.0]), r_c, board_normal, min_angle)
    raw_y = projected_camera_axis(np.array([0.0, 1.0]), r_c, board_normal, min_angle)
    return ControlFrame((unit(raw_x), unit(raw_y)), kind="hybrid3",
                        raw_columns=(raw_x, raw_y))


def orbit_frame(eef_position: np.ndarray, focus: np.ndarray, world_up: np.ndarray,
                min_angle: float = DEGENERACY_ANGLE) -> ControlFrame:
    """Spherical frame around a focus point: azimuth/elevation tangents plus
    the outward radial axis (device up pulls away from the focus)."""
    radial = np.asarray(eef_position, dtype=float) - np.asarray(focus, dtype=float)
    if norm(radial) <= 1e-6:
        raise AtFocus("end effector is at the orbit focus")
    d_z = unit(radial)
    up = unit(vec3(world_up))
    if min(angle_between(d_z, up), angle_between(d_z, -up)) <= min_angle:
        raise PoleSingularity("end effector is at a pole of the orbit sphere")
    d_x = unit(np.cross(up, d_z))
    d_y = np.cross(d_z, d_x)
    return ControlFrame((d_x, d_y, d_z), kind="orbit")


def view_dependent_frame(r_c: np.ndarray, r_w: np.ndarray) -> ControlFrame:
    """The signed world axes closest to camera right and camera up (2D).

    Ties break deterministically: lower axis index first, then positive sign.
    """
    r_c = np.asarray(r_c, dtype=float)
    r_w = np.asarray(r_w, dtype=float)
    candidates = []
    for i in range(3):
        for sign in (1.0, -1.0):
            candidates.append((i, sign, sign * r_w[:, i]))

    def best(target: np.ndarray, exclude: int | None) -> tuple[int, np.ndarray]:
        chosen = None
        for i, sign, axis in candidates:
            if i == exclude:
                continue
            d = float(np.dot(axis, target))
            # strict > keeps the first (lowest index, positive sign) on ties
            if chosen is None or d > chosen[0] + 1e-15:
                chosen = (d, i, axis)
        return chosen[1], chosen[2]

    ix, d_x = best(r_c[:, 0], exclude=None)
    _, d_y = best(r_c[:, 1], exclude=ix)
    return ControlFrame((d_x.copy(), d_y.copy()), kind="view_dependent")


def as_wheel_frame(frame: ControlFrame) -> ControlFrame:
    """Re-tag a 3-column frame so its third column is wheel-driven (mouse +
    wheel devices feed 2 translation channels plus scroll detents)."""
    if frame.wheel_z or frame.device_dim != 3:
        return frame
    return ControlFrame(frame.columns, kind=frame.kind, wheel_z=True,
                        raw_columns=frame.raw_columns)


def frame_from_name(name: str, scene, eef_position: np.ndarray | None = None,
                    eef_rotation: np.ndarray | None = None) -> ControlFrame:
    """Resolve a frame by its protocol/CLI name against a scene.

    ``eef_position``/``eef_rotation`` supply live arm state for the dynamic
    kinds (orbit, end_effector); otherwise the scene snapshot is used.  On
    wheel devices, 3-column frames get their third column wheel-driven.
    """
    r_c = scene.camera.rotation
    r_w = scene.world_rotation
    if name in STANDARD_KINDS:
        if name == "end_effector" and eef_rotation is not None:
            scene = scene.with_eef_rotation(eef_rotation)
        frame = standard_frame(name, scene, device_dim=scene.device_dim,
                               wheel=scene.device_wheel)
    elif name == "hybrid1":
        frame = hybrid_frame_1(r_c, r_w)
    elif name == "hybrid2":
        frame = hybrid_frame_2(r_c, r_w)
    elif name == "hybrid3":
        if scene.task_rotation is None:
            raise MissingSceneElement("hybrid3 requires a whiteboard in the scene")
        frame = hybrid_frame_3(r_c, scene.task_rotation)
    elif name == "orbit":
        pos = eef_position if eef_position is not None \
            else scene.orbit_focus + vec3(0.3, 0, 0.2)
        frame = orbit_frame(pos, scene.orbit_focus, r_w[:, 2])
    elif name == "view_dependent":
        frame = view_dependent_frame(r_c, r_w)
    else:
        raise FrameError(f"unknown frame name {name!r}")
    if scene.device_wheel:
        frame = as_wheel_frame(frame)
    return frame
