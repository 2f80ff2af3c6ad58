"""Mapping of device inputs to end-effector twists.

Position control: relative device motion over the tick maps directly to
robot velocity (translation / dt through the frame columns).  Rate control:
device displacement from its origin pose maps to robot velocity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import ControlFrame, frame_matrix
from .geometry import norm


class MappingError(ValueError):
    pass


class DimensionMismatch(MappingError):
    pass


class RotationOn2DDevice(MappingError):
    pass


@dataclass(frozen=True)
class DeviceInput:
    """One tick of device state.

    translation: device motion (position mode, m over the tick) or
    displacement from the origin pose (rate mode, m).  rotation: scaled
    axis (radians), 3D devices only.  wheel: scroll detents.
    """

    translation: np.ndarray
    dt: float
    rotation: np.ndarray | None = None
    wheel: float = 0.0
    clutched: bool = False

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float)
        if t.ndim != 1 or len(t) not in (2, 3):
            raise DimensionMismatch("translation must be a 2- or 3-vector")
        if self.dt <= 0:
            raise MappingError("dt must be positive")
        object.__setattr__(self, "translation", t)
        if self.rotation is not None:
            object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))


@dataclass(frozen=True)
class Twist:
    """End-effector velocity in the robot base frame."""

    linear: np.ndarray   # m/s
    angular: np.ndarray  # rad/s

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        ang = np.asarray(self.angular, dtype=float)
        if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(ang))):
            raise MappingError("twist components must be finite")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "angular", ang)

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class MappingConfig:
    """Gains and limits for the input mapping.

    translation_scale is dimensionless in position mode and 1/s in rate
    mode.  wheel_step is meters of motion per scroll detent.
    """

    mode: str = "position"          # "position" | "rate"
    translation_scale: float = 1.0
    rotation_scale: float = 1.0
    wheel_step: float = 0.01
    speed_cap: float = 0.5          # m/s

    def __post_init__(self):
        if self.mode not in ("position", "rate"):
            raise MappingError(f"unknown control mode {self.mode!r}")
        if self.translation_scale <= 0 or self.rotation_scale <= 0:
            raise MappingError("scales must be positive")
        if self.wheel_step <= 0 or self.speed_cap <= 0:
            raise MappingError("wheel_step and speed_cap must be positive")


def map_input(frame: ControlFrame, inp: DeviceInput, cfg: MappingConfig) -> Twist:
    """Map one device input to an end-effector twist through the frame.

    Clutched inputs produce a zero twist.  The linear speed is capped at
    cfg.speed_cap without changing direction.
    """
    if len(inp.translation) != frame.translation_dim:
        raise DimensionMismatch(
            f"frame expects {frame.translation_dim} translation channels, "
            f"got {len(inp.translation)}")
    if inp.wheel != 0.0 and not frame.wheel_z:
        raise DimensionMismatch("this frame has no wheel axis")
    if inp.rotation is not None and (frame.device_dim != 3 or frame.wheel_z):
        raise RotationOn2DDevice("rotational input requires a 3D device frame")

    if inp.clutched:
        return Twist.zero()

    t = frame_matrix(frame)[:, :frame.translation_dim]
    if cfg.mode == "position":
        v = cfg.translation_scale * (t @ (inp.translation / inp.dt))
        wheel_speed = inp.wheel * cfg.wheel_step / inp.dt
    else:
        v = cfg.translation_scale * (t @ inp.translation)
        # wheel detents are displacements even in rate mode
        wheel_speed = inp.wheel * cfg.wheel_step * cfg.translation_scale
    if frame.wheel_z and inp.wheel != 0.0:
        v = v + wheel_speed * frame.columns[2]

    omega = np.zeros(3)
    if inp.rotation is not None:
        full = frame_matrix(frame)
        if cfg.mode == "position":
            omega = cfg.rotation_scale * (full @ (inp.rotation / inp.dt))
        else:
            omega = cfg.rotation_scale * (full @ inp.rotation)

    speed = norm(v)
    if speed > cfg.speed_cap:
        v = v * (cfg.speed_cap / speed)
    return Twist(v, omega)
