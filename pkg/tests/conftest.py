import math

import numpy as np
import pytest

from teleframe.geometry import CameraIntrinsics, Plane, Pose, unit, vec3
from teleframe.geometry import rotation_from_axis_angle
from teleframe.scene import Scene, camera_orientation, default_scene


def make_scene(r_c=None, yaw=0.0, pitch=0.0, roll=0.0, r_w=None, r_t=None,
               whiteboard=None, scenario="pick_place", frame="camera",
               device_dim=3, device_wheel=True, camera_distance=1.8, seed=0):
    """Minimal scene with full control over the rotations under test."""
    if r_c is None:
        r_c = camera_orientation(yaw, pitch, roll)
    look_at = vec3(0.45, 0.0, 0.1)
    position = look_at + camera_distance * r_c[:, 2]
    if position[2] < 0.05:
        position = position + vec3(0, 0, 0.1 - position[2])
    if r_t is not None and whiteboard is None:
        whiteboard = Plane(vec3(0.55, 0.0, 0.25), r_t[:, 2])
    return Scene(
        camera=Pose(r_c, position),
        intrinsics=CameraIntrinsics(focal=700.0, principal=(640.0, 360.0),
                                    image_size=(1280, 720)),
        table=Plane(vec3(0, 0, 0), vec3(0, 0, 1)),
        world_rotation=np.eye(3) if r_w is None else r_w,
        whiteboard=whiteboard,
        task_rotation=r_t,
        frame_name=frame,
        scenario=scenario,
        seed=seed,
        device_dim=device_dim,
        device_wheel=device_wheel,
    )


def random_rotation(rng):
    return rotation_from_axis_angle(unit(rng.normal(size=3)),
                                    rng.uniform(0, math.pi))


def random_camera(rng, min_up_angle=0.35):
    """Random camera orientation whose viewing axis stays well away from the
    world-up plane degeneracy (so projected axes onto the floor exist)."""
    while True:
        r_c = random_rotation(rng)
        if abs(r_c[2, 2]) > math.sin(min_up_angle):
            return r_c


@pytest.fixture
def pick_scene():
    return default_scene(scenario="pick_place", frame="hybrid2")


@pytest.fixture
def trace_scene():
    return default_scene(scenario="tracing", frame="hybrid3")
