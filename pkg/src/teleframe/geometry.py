"""Core 3D types: vectors, rotations, poses, planes, and camera projection.

Coordinate conventions
======================
Everything is expressed in the robot base frame (right-handed, z up)
unless noted otherwise.

Camera frame (right-handed):
  - x: image right
  - y: image up
  - z: backward (the viewing direction is -z)

A camera rotation matrix has these axes as its columns, expressed in the
robot base frame.  Pixel coordinates returned by :func:`project_point`
follow the usual raster convention: u grows right, v grows DOWN, so a
point above the optical axis lands at v < principal_y.

All angles are radians.  Degrees appear only at CLI/report boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Centralized numeric tolerances.
UNIT_TOL = 1e-9          # unit-norm / orthonormality checks
SOLVE_TOL = 1e-9         # linear solve residuals
DEGENERACY_ANGLE = math.radians(5.0)  # default cone for near-singular geometry


class GeometryError(ValueError):
    """Base class for geometric precondition failures."""


class ZeroVector(GeometryError):
    pass


class SingularMatrix(GeometryError):
    pass


class BehindCamera(GeometryError):
    pass


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build an owned float (3,) array from components or any sequence."""
    if y is None:
        v = np.array(x, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"expected 3 components, got shape {v.shape}")
        return v
    return np.array([x, y, z], dtype=float)


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize to unit length; raises ZeroVector below 1e-12."""
    n = norm(v)
    if n < 1e-12:
        raise ZeroVector("cannot normalize a near-zero vector")
    return np.asarray(v, dtype=float) / n


def is_unit(v: np.ndarray, tol: float = UNIT_TOL) -> bool:
    return abs(norm(v) - 1.0) <= tol


def is_rotation(m: np.ndarray, tol: float = UNIT_TOL) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        return False
    return (np.abs(m.T @ m - np.eye(3)).max() <= tol
            and abs(np.linalg.det(m) - 1.0) <= tol)


def require_rotation(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if not is_rotation(m, tol=1e-7):
        raise GeometryError(f"{what} is not a rotation matrix")
    return m


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis; angle 0 gives the identity."""
    a = unit(axis)
    k = skew(a)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def axis_angle_from_rotation(r: np.ndarray) -> tuple[np.ndarray, float]:
    """Extract (unit axis, angle in [0, pi]) from a rotation matrix.

    For angle ~0 the axis is arbitrary; (0,0,1) is returned.  Near pi the
    axis is recovered from the symmetric part.
    """
    r = np.asarray(r, dtype=float)
    c = max(-1.0, min(1.0, (np.trace(r) - 1.0) / 2.0))
    angle = math.acos(c)
    if angle < 1e-9:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if angle > math.pi - 1e-6:
        # R ~ 2 aa^T - I: take the largest-diagonal column of (R + I)/2
        b = (r + np.eye(3)) / 2.0
        i = int(np.argmax(np.diag(b)))
        axis = b[:, i] / math.sqrt(max(b[i, i], 1e-300))
        return unit(axis), angle
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return w / (2.0 * math.sin(angle)), angle


def rotation_angle(r: np.ndarray) -> float:
    """Rotation angle in [0, pi]; atan2 form stays well-conditioned near 0."""
    s = 0.5 * math.sqrt((r[2, 1] - r[1, 2]) ** 2 + (r[0, 2] - r[2, 0]) ** 2
                        + (r[1, 0] - r[0, 1]) ** 2)
    c = (float(np.trace(r)) - 1.0) / 2.0
    return math.atan2(s, c)


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Orthogonal Procrustes solution: the rotation closest to m in Frobenius
    norm (polar factor, determinant forced to +1).

    Raises SingularMatrix when m has rank < 3.
    """
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    if s[-1] < 1e-12 * max(s[0], 1.0):
        raise SingularMatrix("matrix has rank < 3")
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    nu, nv = norm(u), norm(v)
    if nu < 1e-12 or nv < 1e-12:
        raise ZeroVector("angle_between requires nonzero vectors")
    c = float(np.dot(u, v)) / (nu * nv)
    return math.acos(max(-1.0, min(1.0, c)))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (3x3, columns are frame axes) + translation (m)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = require_rotation(self.rotation, "pose rotation")
        t = vec3(self.translation)
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def transform(self, p: np.ndarray) -> np.ndarray:
        """Map a point from this frame into the parent frame."""
        return self.rotation @ p + self.translation

    def inverse_transform(self, p: np.ndarray) -> np.ndarray:
        """Map a point from the parent frame into this frame."""
        return self.rotation.T @ (p - self.translation)

    def compose(self, other: "Pose") -> "Pose":
        """this @ other: apply other first, then this."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)


@dataclass(frozen=True)
class Plane:
    """A plane given by a point on it and a unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        p = vec3(self.point)
        n = unit(vec3(self.normal))
        p.flags.writeable = False
        n.flags.writeable = False
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)

    def height(self, p: np.ndarray) -> float:
        """Signed distance of p above the plane (along the normal)."""
        return float(np.dot(p - self.point, self.normal))

    def project(self, p: np.ndarray) -> np.ndarray:
        """Closest point on the plane."""
        return p - self.height(p) * self.normal


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels (square pixels, no distortion)."""

    focal: float
    principal: tuple[float, float]
    image_size: tuple[int, int]  # (width, height)

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        cx, cy = self.principal
        w, h = self.image_size
        if not (0 <= cx <= w and 0 <= cy <= h):
            raise ValueError("principal point must lie inside the image")


def project_point(camera: Pose, k: CameraIntrinsics, p: np.ndarray) -> np.ndarray:
    """Pinhole projection of a world point into raster pixel coordinates.

    The camera looks along -z of its pose; depth is distance along the
    viewing direction.  Raises BehindCamera when depth <= 1e-6 m.
    """
    pc = camera.inverse_transform(np.asarray(p, dtype=float))
    depth = -pc[2]
    if depth <= 1e-6:
        raise BehindCamera(f"point at depth {depth:.2e} m is not in front of the camera")
    cx, cy = k.principal
    u = cx + k.focal * pc[0] / depth
    v = cy - k.focal * pc[1] / depth  # camera y is up, raster v is down
    return np.array([u, v])


def point_depth(camera: Pose, p: np.ndarray) -> float:
    """Distance of a world point along the camera viewing direction."""
    pc = camera.inverse_transform(np.asarray(p, dtype=float))
    return -float(pc[2])
