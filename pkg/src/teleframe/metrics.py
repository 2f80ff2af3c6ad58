"""Objective measures and frame diagnostics.

Trajectory error = Cartesian accuracy + incompleteness, each in [0, 1], so
the total lies in [0, 2] with lower values better.  The combined objective
measure min-max-normalizes time and error over a whole trial table, sums
them, and centers per participant, giving values in [-2, 2].

Frame diagnostics quantify the three design criteria: visual-motor
misalignment (angle to the camera frame, with a roll-weighted variant),
naturalness (device-up vs world-up agreement), and task-semantics residual
(leakage of frame columns out of a constraint plane).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .frames import ControlFrame, padded_matrix, standard_frame
from .geometry import Plane, angle_between, nearest_rotation, rotation_angle, unit

PEN_RESAMPLE_STEP = 0.001  # m; pen curves are resampled before scoring

# Operationalizes "roll is distinctly more disruptive than pitch/yaw".
MISALIGNMENT_WEIGHTS = (2.0, 1.0, 1.0)  # roll, pitch, yaw


class MetricsError(ValueError):
    pass


class EmptyCurve(MetricsError):
    pass


class MissingConstraint(MetricsError):
    pass


# ---------------------------------------------------------------------------
# polyline machinery

def _as_polyline(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise EmptyCurve("polyline needs at least one point")
    return arr


def polyline_length(points) -> float:
    arr = _as_polyline(points)
    if len(arr) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(arr, axis=0), axis=1)))


def resample_polyline(points, step: float = PEN_RESAMPLE_STEP) -> np.ndarray:
    """Points at every multiple of ``step`` of arc length, plus all original
    vertices.  Keeping the vertices makes completeness monotone when a curve
    is extended."""
    arr = _as_polyline(points)
    if len(arr) == 1:
        return arr.copy()
    seg = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0.0:
        return arr[:1].copy()
    grid = np.arange(0.0, total, step)
    positions = np.unique(np.concatenate([grid, cum]))
    idx = np.clip(np.searchsorted(cum, positions, side="right") - 1, 0, len(seg) - 1)
    t = (positions - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return arr[idx] + t[:, None] * (arr[idx + 1] - arr[idx])


@dataclass(frozen=True)
class PolylineIndex:
    """Precomputed segment table for closest-point queries."""

    starts: np.ndarray
    deltas: np.ndarray
    inv_len2: np.ndarray
    cum: np.ndarray
    total: float

    @staticmethod
    def build(points) -> "PolylineIndex":
        arr = _as_polyline(points)
        if len(arr) < 2:
            # degenerate curve: a single point, parameter is always 0
            starts = arr[:1]
            deltas = np.zeros_like(starts)
            return PolylineIndex(starts, deltas, np.ones(1),
                                 np.array([0.0, 0.0]), 0.0)
        starts = arr[:-1]
        deltas = np.diff(arr, axis=0)
        len2 = np.sum(deltas * deltas, axis=1)
        seg = np.sqrt(len2)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        return PolylineIndex(starts, deltas, 1.0 / np.where(len2 > 0, len2, 1.0),
                             cum, float(cum[-1]))

    def closest(self, point: np.ndarray) -> tuple[float, float]:
        """(distance, arc-length parameter in [0, 1]) of the closest curve
        point to ``point``.

        Distance ties (e.g. where a closed stroke revisits its start) break
        toward the larger parameter, so finishing a loop counts as finished.
        """
        rel = point - self.starts
        t = np.clip(np.sum(rel * self.deltas, axis=1) * self.inv_len2, 0.0, 1.0)
        closest = self.starts + t[:, None] * self.deltas
        d2 = np.sum((closest - point) ** 2, axis=1)
        dmin = float(d2.min())
        if self.total <= 0.0:
            return math.sqrt(dmin), 0.0
        tied = np.flatnonzero(d2 <= dmin + 1e-18)
        seg_len = self.cum[tied + 1] - self.cum[tied]
        param = float(np.max((self.cum[tied] + t[tied] * seg_len) / self.total))
        return math.sqrt(dmin), param


# ---------------------------------------------------------------------------
# trajectory error

@dataclass(frozen=True)
class TrajectoryError:
    accuracy: float        # [0, 1], mean normalized distance to the target
    incompleteness: float  # [0, 1], 1 - furthest arc-length parameter reached
    total: float           # accuracy + incompleteness

    def __post_init__(self):
        if abs(self.total - (self.accuracy + self.incompleteness)) > 1e-12:
            raise MetricsError("total must equal accuracy + incompleteness")


def trajectory_error(pen, target, d_max: float | None = None) -> TrajectoryError:
    """Score a pen trace against a target curve.

    d_max is the distance treated as maximally inaccurate; it defaults to
    the target curve's bounding-box diagonal.
    """
    pen_arr = _as_polyline(pen)
    target_arr = _as_polyline(target)
    if d_max is None:
        extent = target_arr.max(axis=0) - target_arr.min(axis=0)
        d_max = float(np.linalg.norm(extent))
    if d_max <= 0:
        raise MetricsError("d_max must be positive")
    index = PolylineIndex.build(target_arr)
    samples = resample_polyline(pen_arr)
    dists = np.empty(len(samples))
    params = np.empty(len(samples))
    for i, p in enumerate(samples):
        dists[i], params[i] = index.closest(p)
    accuracy = float(np.clip(np.mean(dists) / d_max, 0.0, 1.0))
    completeness = float(np.max(params))
    return TrajectoryError(accuracy, 1.0 - completeness,
                           accuracy + (1.0 - completeness))


# ---------------------------------------------------------------------------
# combined objective measure

@dataclass(frozen=True)
class TrialRow:
    participant: str
    condition: str
    time_s: float
    error: float


@dataclass(frozen=True)
class CombinedRow:
    participant: str
    condition: str
    time_s: float
    error: float
    raw: float       # normalized time + normalized error, in [0, 2]
    relative: float  # raw minus the participant's mean raw, in [-2, 2]


def _minmax(values: np.ndarray) -> np.ndarray:
    span = values.max() - values.min()
    if span <= 0.0:
        # degenerate column: every trial identical, contributes nothing
        return np.zeros_like(values)
    return (values - values.min()) / span


def combined_objective(rows: list[TrialRow]) -> list[CombinedRow]:
    """Combined objective measure over a trial table.

    Time and error are min-max normalized over the WHOLE table; the
    relative value subtracts each participant's mean.  A constant column
    normalizes to zero.
    """
    if not rows:
        raise MetricsError("trial table is empty")
    times = np.array([r.time_s for r in rows])
    errors = np.array([r.error for r in rows])
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(errors))):
        raise MetricsError("trial table contains non-finite values")
    raw = _minmax(times) + _minmax(errors)
    means: dict[str, float] = {}
    for participant in {r.participant for r in rows}:
        mask = np.array([r.participant == participant for r in rows])
        means[participant] = float(raw[mask].mean())
    return [
        CombinedRow(r.participant, r.condition, r.time_s, r.error,
                    float(raw[i]), float(raw[i] - means[r.participant]))
        for i, r in enumerate(rows)
    ]


def write_report_csv(rows: list[CombinedRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["participant", "condition", "time_s", "error",
                         "raw_combined", "relative_combined"])
        for r in rows:
            writer.writerow([r.participant, r.condition, repr(r.time_s),
                             repr(r.error), repr(r.raw), repr(r.relative)])


# ---------------------------------------------------------------------------
# frame diagnostics

@dataclass(frozen=True)
class FrameDiagnostics:
    misalignment_total: float                    # radians, [0, pi]
    misalignment_rpy: tuple[float, float, float]  # about camera fwd/right/up
    weighted_misalignment: float
    naturalness_angle: float                      # radians
    semantics_residual: float | None              # [0, 1] when a plane is given


def _camera_reference(frame: ControlFrame, scene) -> np.ndarray:
    """Camera control frame of the same device class, padded to 3x3.

    2D and wheel devices compare against (camera right, camera up, camera
    backward); 3D devices against (right, forward, up)."""
    cam = standard_frame("camera", scene, device_dim=frame.device_dim
                         if not frame.wheel_z else 3, wheel=frame.wheel_z)
    if cam.device_dim == 2:
        return padded_matrix(cam)
    return np.column_stack(cam.columns)


def _factor_about_camera_axes(rel: np.ndarray) -> tuple[float, float, float]:
    """Factor a relative rotation (in the device-logical basis x=right,
    y=forward, z=up) as Ry(roll) @ Rx(pitch) @ Rz(yaw)."""
    sp = -rel[1, 2]
    if abs(sp) > 1.0 - 1e-12:
        pitch = math.copysign(math.pi / 2.0, sp)
        # roll and yaw are degenerate; attribute everything to roll
        return math.atan2(rel[0, 1], rel[0, 0]), pitch, 0.0
    pitch = math.asin(sp)
    yaw = math.atan2(rel[1, 0], rel[1, 1])
    roll = math.atan2(rel[0, 2], rel[2, 2])
    return roll, pitch, yaw


def semantic_residual(frame: ControlFrame, constraint: Plane | None) -> float:
    """Largest leakage of any frame column out of the constraint plane."""
    if constraint is None:
        raise MissingConstraint("semantics residual requires a constraint plane")
    return max(abs(float(np.dot(c, constraint.normal))) for c in frame.columns)


def frame_diagnostics(frame: ControlFrame, scene,
                      constraint: Plane | None = None) -> FrameDiagnostics:
    """Computable design-criteria diagnostics for one control frame."""
    m = padded_matrix(frame)
    reference = _camera_reference(frame, scene)
    rel = nearest_rotation(reference.T @ m)
    total = rotation_angle(rel)
    roll, pitch, yaw = _factor_about_camera_axes(rel)
    w_roll, w_pitch, w_yaw = MISALIGNMENT_WEIGHTS
    weighted = w_roll * abs(roll) + w_pitch * abs(pitch) + w_yaw * abs(yaw)

    up = scene.world_up
    if frame.device_dim == 3:
        naturalness = angle_between(frame.columns[2], up)
    else:
        plane_normal = unit(np.cross(frame.columns[0], frame.columns[1]))
        a = angle_between(plane_normal, up)
        naturalness = min(a, math.pi - a)

    residual = None
    if constraint is not None:
        residual = semantic_residual(frame, constraint)
    return FrameDiagnostics(total, (roll, pitch, yaw), weighted,
                            naturalness, residual)
