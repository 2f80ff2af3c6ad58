"""Simulated serial arm: forward kinematics, geometric Jacobian, damped
least-squares velocity IK, joint limits, and the tabletop collision guard.

All quantities live in the robot base frame.  The guard suppresses a step
only while it would move the fingertip downward inside the clearance band;
upward motion is never blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Plane, Pose, norm, skew, unit, vec3
from .mapping import Twist

DEFAULT_DAMPING = 0.01        # DLS lambda
GUARD_CLEARANCE = 0.01        # m above the table; fingertips may not dive below


class KinematicsError(ValueError):
    pass


class NonFinite(KinematicsError):
    pass


@dataclass(frozen=True)
class Joint:
    """Revolute joint: rotation axis in the local frame, origin transform
    from the parent link, and position limits (radians)."""

    axis: np.ndarray
    origin: Pose
    lower: float
    upper: float

    def __post_init__(self):
        a = unit(vec3(self.axis))
        a.flags.writeable = False
        object.__setattr__(self, "axis", a)
        if self.lower >= self.upper:
            raise KinematicsError("joint limits must satisfy lower < upper")


@dataclass(frozen=True)
class ArmModel:
    joints: tuple[Joint, ...]
    eef_offset: Pose
    fingertip_offset: np.ndarray  # from the eef frame, m
    home_q: np.ndarray

    def __post_init__(self):
        tip = vec3(self.fingertip_offset)
        home = np.asarray(self.home_q, dtype=float)
        if len(home) != len(self.joints):
            raise KinematicsError("home_q length must match joint count")
        tip.flags.writeable = False
        home.flags.writeable = False
        object.__setattr__(self, "fingertip_offset", tip)
        object.__setattr__(self, "home_q", home)
        # precomputed Rodrigues terms per joint, used by the fk hot path
        ks = tuple(skew(j.axis) for j in self.joints)
        object.__setattr__(self, "_skews", ks)
        object.__setattr__(self, "_skews2", tuple(k @ k for k in ks))

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.lower for j in self.joints])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.upper for j in self.joints])

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.lower_limits, self.upper_limits)


@dataclass(frozen=True)
class ArmState:
    q: np.ndarray
    halted: bool = False

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).copy()
        q.flags.writeable = False
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class FkResult:
    link_poses: tuple[Pose, ...]
    eef: Pose
    fingertip: np.ndarray


def _chain(model: ArmModel, q: np.ndarray, want_jacobian: bool):
    """Shared fk/Jacobian pass over the joint chain.

    Returns (link_rs, link_ps, eef_r, eef_p, fingertip, jacobian|None) with
    plain arrays; callers wrap into Pose objects as needed.
    """
    n = model.dof
    if len(q) != n:
        raise KinematicsError(f"expected {n} joint values, got {len(q)}")
    r = np.eye(3)
    p = np.zeros(3)
    link_rs, link_ps = [], []
    axes_w = np.empty((n, 3)) if want_jacobian else None
    origins = np.empty((n, 3)) if want_jacobian else None
    eye = np.eye(3)
    for i, joint in enumerate(model.joints):
        p = p + r @ joint.origin.translation
        r = r @ joint.origin.rotation
        if want_jacobian:
            origins[i] = p
            axes_w[i] = r @ joint.axis
        cq, sq = math.cos(q[i]), math.sin(q[i])
        r = r @ (eye + sq * model._skews[i] + (1.0 - cq) * model._skews2[i])
        link_rs.append(r)
        link_ps.append(p)
    eef_p = p + r @ model.eef_offset.translation
    eef_r = r @ model.eef_offset.rotation
    fingertip = eef_p + eef_r @ model.fingertip_offset
    jac = None
    if want_jacobian:
        jac = np.empty((6, n))
        jac[:3] = np.cross(axes_w, eef_p - origins).T
        jac[3:] = axes_w.T
    return link_rs, link_ps, eef_r, eef_p, fingertip, jac


def fk(model: ArmModel, q: np.ndarray) -> FkResult:
    """Forward kinematics: world pose of every link, the end effector, and
    the fingertip point."""
    link_rs, link_ps, eef_r, eef_p, tip, _ = _chain(model, np.asarray(q, float), False)
    links = tuple(Pose(r, p) for r, p in zip(link_rs, link_ps))
    return FkResult(links, Pose(eef_r, eef_p), tip)


def jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian at the end effector: rows 0-2 linear, 3-5 angular."""
    return _chain(model, np.asarray(q, float), True)[5]


def dls_velocity(jac: np.ndarray, twist: Twist, damping: float) -> np.ndarray:
    """Damped least-squares joint velocity: J^T (J J^T + lambda^2 I)^-1 * v."""
    v = np.concatenate([twist.linear, twist.angular])
    jjt = jac @ jac.T
    jjt[np.diag_indices(6)] += damping * damping
    qdot = jac.T @ np.linalg.solve(jjt, v)
    if not np.all(np.isfinite(qdot)):
        raise NonFinite("IK solve produced non-finite joint velocities")
    return qdot


def ik_step(model: ArmModel, state: ArmState, twist: Twist, dt: float,
            damping: float = DEFAULT_DAMPING, table: Plane | None = None,
            guard_clearance: float = GUARD_CLEARANCE) -> ArmState:
    """One velocity-IK step with joint-limit clamping and the tabletop guard.

    The guard triggers when the stepped fingertip would end up below
    ``guard_clearance`` above the table AND lower than it started; the
    linear part of the command is then suppressed for this tick.
    """
    if not (0.0 < dt <= 0.1):
        raise KinematicsError("dt must be in (0, 0.1] s")
    if damping <= 0:
        raise KinematicsError("damping must be positive")

    q = state.q
    _, _, _, _, tip_before, jac = _chain(model, q, True)
    qdot = dls_velocity(jac, twist, damping)
    q_new = model.clamp(q + qdot * dt)

    if table is not None:
        tip_after = _chain(model, q_new, False)[4]
        h_after = table.height(tip_after)
        if h_after < guard_clearance and h_after < table.height(tip_before):
            if norm(twist.angular) > 0.0:
                qdot = dls_velocity(jac, Twist(np.zeros(3), twist.angular), damping)
                q_new = model.clamp(q + qdot * dt)
            else:
                q_new = q
            return ArmState(q_new, halted=True)
    return ArmState(q_new, halted=False)


def default_arm() -> ArmModel:
    """Fixed 7-joint arm used by the simulator.

    Link offsets along local z: 0.08, 0.10, 0.20, 0.20, 0.20, 0.15, 0.08 m,
    then a 0.07 m tool offset and a 0.06 m fingertip, for a 1.14 m stack at
    the zero pose (~1.0 m reach from the shoulder).  Axes alternate
    z,y,z,y,z,y,z.  Limits are +/-170 degrees except the elbow (joint 4),
    which bends one way in [0, 170] degrees.
    """
    lengths = [0.08, 0.10, 0.20, 0.20, 0.20, 0.15, 0.08]
    axes = ["z", "y", "z", "y", "z", "y", "z"]
    lim = math.radians(170.0)
    joints = []
    for i, (length, ax) in enumerate(zip(lengths, axes)):
        axis = vec3(0, 0, 1) if ax == "z" else vec3(0, 1, 0)
        lower, upper = (0.0, lim) if i == 3 else (-lim, lim)
        joints.append(Joint(axis, Pose(np.eye(3), vec3(0, 0, length)), lower, upper))
    home = np.array([0.0, 0.5, 0.0, 1.6, 0.0, -0.5, 0.0])
    return ArmModel(tuple(joints), eef_offset=Pose(np.eye(3), vec3(0, 0, 0.07)),
                    fingertip_offset=vec3(0, 0, 0.06), home_q=home)


def arm_to_json(model: ArmModel) -> dict:
    """Serializable arm description (the client renders cylinders between
    consecutive link origins)."""
    return {
        "joints": [
            {
                "axis": list(j.axis),
                "origin": {"rotation": [list(row) for row in j.origin.rotation],
                           "translation": list(j.origin.translation)},
                "lower": j.lower,
                "upper": j.upper,
            }
            for j in model.joints
        ],
        "eef_offset": {"rotation": [list(row) for row in model.eef_offset.rotation],
                       "translation": list(model.eef_offset.translation)},
        "fingertip_offset": list(model.fingertip_offset),
        "home_q": list(model.home_q),
    }


def arm_from_json(data: dict) -> ArmModel:
    joints = tuple(
        Joint(vec3(j["axis"]),
              Pose(np.array(j["origin"]["rotation"]), vec3(j["origin"]["translation"])),
              j["lower"], j["upper"])
        for j in data["joints"]
    )
    return ArmModel(
        joints,
        eef_offset=Pose(np.array(data["eef_offset"]["rotation"]),
                        vec3(data["eef_offset"]["translation"])),
        fingertip_offset=vec3(data["fingertip_offset"]),
        home_q=np.asarray(data["home_q"], dtype=float),
    )
