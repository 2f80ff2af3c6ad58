import math

import numpy as np
import pytest

from conftest import make_scene, random_camera, random_rotation
from teleframe.frames import (
    IMAGE_PLANE_PROJECTION,
    AtFocus,
    ControlFrame,
    DegenerateCross,
    DegenerateProjection,
    FrameError,
    MissingSceneElement,
    PoleSingularity,
    ZeroImageVector,
    frame_from_name,
    frame_matrix,
    hybrid_frame_1,
    hybrid_frame_2,
    hybrid_frame_3,
    orbit_frame,
    padded_matrix,
    projected_camera_axis,
    standard_frame,
    view_dependent_frame,
)
from teleframe.geometry import (
    axis_angle_from_rotation,
    rotation_from_axis_angle,
    unit,
    vec3,
)
from teleframe.scene import camera_orientation

P = IMAGE_PLANE_PROJECTION

# 45-degree pitch-down camera from the projection worked example:
# x = (1,0,0), y = (0,.70711,.70711), z = (0,-.70711,.70711)
PITCH45 = camera_orientation(0.0, -math.pi / 4)


def lstsq_oracle(v_c, r_c, v_p):
    """Independent least-squares solution of the stacked projection system."""
    a = np.vstack([P @ r_c.T, unit(v_p)])
    b = np.array([v_c[0], v_c[1], 0.0])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def sample_projection_case(rng):
    r_c = random_rotation(rng)
    while True:
        v_p = unit(rng.normal(size=3))
        if abs(np.dot(v_p, r_c[:, 2])) > math.sin(math.radians(7.0)):
            break
    v_c = rng.normal(size=2)
    while np.linalg.norm(v_c) < 0.1:
        v_c = rng.normal(size=2)
    return v_c, r_c, v_p


class TestProjectedCameraAxis:
    def test_axis_aligned_camera_is_identity_solve(self):
        x = projected_camera_axis(np.array([1.0, 0.0]), np.eye(3), vec3(0, 0, 1))
        assert np.allclose(x, [1, 0, 0], atol=1e-12)

    def test_pitch45_worked_example(self):
        assert np.allclose(PITCH45[:, 1], [0, 0.70711, 0.70711], atol=1e-5)
        x = projected_camera_axis(np.array([0.0, 1.0]), PITCH45, vec3(0, 0, 1))
        assert np.allclose(x, [0, 1.41421, 0], atol=1e-5)
        # both defining relations hold to solver precision
        assert np.allclose(P @ PITCH45.T @ x, [0, 1], atol=1e-9)
        assert abs(np.dot(vec3(0, 0, 1), x)) < 1e-9

    def test_horizontal_optical_axis_is_degenerate(self):
        r_c = camera_orientation(0.0, 0.0)  # viewing along +y, z_cam = -e2
        assert np.allclose(r_c[:, 2], [0, -1, 0], atol=1e-12)
        with pytest.raises(DegenerateProjection):
            projected_camera_axis(np.array([1.0, 0.0]), r_c, vec3(0, 0, 1))

    def test_zero_image_vector_rejected(self):
        with pytest.raises(ZeroImageVector):
            projected_camera_axis(np.zeros(2), np.eye(3), vec3(0, 0, 1))

    def test_residuals_and_oracle_on_random_cases(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            v_c, r_c, v_p = sample_projection_case(rng)
            x = projected_camera_axis(v_c, r_c, v_p)
            assert np.linalg.norm(P @ r_c.T @ x - v_c) < 1e-9
            assert abs(np.dot(v_p, x)) < 1e-9
            assert np.linalg.norm(x - lstsq_oracle(v_c, r_c, v_p)) < 1e-9


class TestStandardFrames:
    def test_robot_3d_is_identity(self):
        frame = standard_frame("robot", make_scene(), 3, wheel=False)
        assert np.allclose(frame_matrix(frame), np.eye(3))

    def test_camera_3d_columns(self):
        # identity camera rotation: right, viewing (-z), up
        frame = standard_frame("camera", make_scene(r_c=np.eye(3)), 3, wheel=False)
        expected = np.array([[1, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=float)
        assert np.allclose(frame_matrix(frame), expected)

    def test_camera_wheel_columns(self):
        # mouse + wheel camera frame: right, up, backward
        frame = standard_frame("camera", make_scene(r_c=np.eye(3)), 3, wheel=True)
        assert np.allclose(frame_matrix(frame), np.eye(3))
        assert frame.wheel_z

    def test_camera_2d_columns(self):
        frame = standard_frame("camera", make_scene(r_c=np.eye(3)), 2)
        assert np.allclose(frame_matrix(frame), np.eye(3)[:, :2])

    def test_task_2d_with_rotated_board(self):
        r_t = rotation_from_axis_angle(vec3(0, 0, 1), math.pi / 2)
        frame = standard_frame("task", make_scene(r_t=r_t), 2)
        assert np.allclose(frame.columns[0], [0, 1, 0], atol=1e-12)
        assert np.allclose(frame.columns[1], [-1, 0, 0], atol=1e-12)

    def test_task_without_board_rejected(self):
        with pytest.raises(MissingSceneElement):
            standard_frame("task", make_scene(), 2)

    def test_end_effector_needs_snapshot(self):
        with pytest.raises(MissingSceneElement):
            standard_frame("end_effector", make_scene(), 3)
        scene = make_scene().with_eef_rotation(np.eye(3))
        frame = standard_frame("end_effector", scene, 3)
        assert np.allclose(frame_matrix(frame), np.eye(3))

    def test_constructors_are_pure(self):
        scene = make_scene(yaw=0.4, pitch=-0.5)
        a = standard_frame("camera", scene, 3)
        b = standard_frame("camera", scene, 3)
        for ca, cb in zip(a.columns, b.columns):
            assert (ca == cb).all()


class TestHybrid1:
    def test_side_camera(self):
        # camera right = world y: d_y = up x right = -e1
        r_c = camera_orientation(math.pi / 2, -0.4)
        assert np.allclose(r_c[:, 0], [0, 1, 0], atol=1e-12)
        frame = hybrid_frame_1(r_c, np.eye(3))
        assert np.allclose(frame.columns[0], [0, 1, 0], atol=1e-12)
        assert np.allclose(frame.columns[1], [-1, 0, 0], atol=1e-12)
        assert np.allclose(frame.columns[2], [0, 0, 1], atol=1e-12)

    def test_identity_degenerates_to_robot(self):
        frame = hybrid_frame_1(np.eye(3), np.eye(3))
        assert np.allclose(frame_matrix(frame), np.eye(3), atol=1e-12)

    def test_orthonormal_for_horizontal_camera_right(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            r_c = camera_orientation(rng.uniform(-math.pi, math.pi),
                                     rng.uniform(-1.2, -0.1))
            m = frame_matrix(hybrid_frame_1(r_c, np.eye(3)))
            assert np.abs(m.T @ m - np.eye(3)).max() < 1e-9

    def test_relative_rotation_to_camera_frame_is_about_camera_right(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            r_c = camera_orientation(rng.uniform(-math.pi, math.pi),
                                     rng.uniform(-1.2, -0.15))
            scene = make_scene(r_c=r_c)
            cam = frame_matrix(standard_frame("camera", scene, 3, wheel=False))
            hyb = frame_matrix(hybrid_frame_1(r_c, np.eye(3)))
            axis, angle = axis_angle_from_rotation(cam.T @ hyb)
            assert angle > 1e-3
            world_axis = cam @ axis
            right = r_c[:, 0]
            assert min(np.linalg.norm(world_axis - right),
                       np.linalg.norm(world_axis + right)) < 1e-6
            # shares its first column with the camera frame
            assert np.allclose(hyb[:, 0], cam[:, 0], atol=1e-12)

    def test_rolled_camera_rejected(self):
        r_c = camera_orientation(0.0, 0.0, roll=math.pi / 2)
        assert np.allclose(r_c[:, 0], [0, 0, 1], atol=1e-12)
        with pytest.raises(DegenerateCross):
            hybrid_frame_1(r_c, np.eye(3))


class TestHybrid2:
    def test_identity_camera(self):
        frame = hybrid_frame_2(np.eye(3), np.eye(3))
        assert np.allclose(frame.columns[0], [1, 0, 0], atol=1e-12)
        assert frame.wheel_z

    def test_pitch45_d_y(self):
        frame = hybrid_frame_2(PITCH45, np.eye(3))
        assert np.allclose(frame.columns[1], [0, 1, 0], atol=1e-5)
        assert np.allclose(frame.raw_columns[1], [0, 1.41421, 0], atol=1e-5)

    def test_columns_stay_horizontal(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            r_c = random_camera(rng)
            frame = hybrid_frame_2(r_c, np.eye(3))
            assert abs(np.dot(frame.columns[0], vec3(0, 0, 1))) < 1e-9
            assert abs(np.dot(frame.columns[1], vec3(0, 0, 1))) < 1e-9

    def test_edge_on_camera_propagates_degeneracy(self):
        with pytest.raises(DegenerateProjection):
            hybrid_frame_2(camera_orientation(0.3, 0.0), np.eye(3))


class TestHybrid3:
    BOARD = np.column_stack([vec3(0, -1, 0), vec3(0, 0, 1), vec3(-1, 0, 0)])

    def test_head_on_camera_gives_board_axes(self):
        r_c = camera_orientation(-math.pi / 2, 0.0)  # looking along +x
        frame = hybrid_frame_3(r_c, self.BOARD)
        assert np.allclose(frame.columns[0], self.BOARD[:, 0], atol=1e-9)
        assert np.allclose(frame.columns[1], self.BOARD[:, 1], atol=1e-9)

    def test_oblique_camera_columns_in_plane(self):
        r_c = camera_orientation(-math.pi / 2 + 0.5, -0.4)
        frame = hybrid_frame_3(r_c, self.BOARD)
        normal = self.BOARD[:, 2]
        for col in frame.columns:
            assert abs(np.dot(col, normal)) < 1e-9

    def test_images_are_positive_multiples_of_image_axes(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            yaw = -math.pi / 2 + rng.uniform(-0.9, 0.9)
            r_c = camera_orientation(yaw, rng.uniform(-0.9, 0.3))
            frame = hybrid_frame_3(r_c, self.BOARD)
            img_x = P @ r_c.T @ frame.columns[0]
            img_y = P @ r_c.T @ frame.columns[1]
            assert img_x[0] > 0 and abs(img_x[1]) < 1e-9
            assert img_y[1] > 0 and abs(img_y[0]) < 1e-9


class TestOrbit:
    def test_spherical_basis_example(self):
        frame = orbit_frame(vec3(1, 0, 0), vec3(0, 0, 0), vec3(0, 0, 1))
        assert np.allclose(frame.columns[0], [0, 1, 0], atol=1e-12)
        assert np.allclose(frame.columns[1], [0, 0, 1], atol=1e-12)
        assert np.allclose(frame.columns[2], [1, 0, 0], atol=1e-12)

    def test_pole_rejected(self):
        with pytest.raises(PoleSingularity):
            orbit_frame(vec3(0, 0, 1), vec3(0, 0, 0), vec3(0, 0, 1))

    def test_focus_rejected(self):
        with pytest.raises(AtFocus):
            orbit_frame(vec3(1e-9, 0, 0), vec3(0, 0, 0), vec3(0, 0, 1))

    def test_orthonormal_away_from_poles(self):
        rng = np.random.default_rng(16)
        for _ in range(200):
            pos = rng.normal(size=3)
            radial = unit(pos)
            if abs(radial[2]) > math.cos(math.radians(8)):
                continue
            m = frame_matrix(orbit_frame(pos, vec3(0, 0, 0), vec3(0, 0, 1)))
            assert np.abs(m.T @ m - np.eye(3)).max() < 1e-9


def enumerate_view_axes(r_c, r_w):
    """Brute-force oracle: best signed world axis per camera axis."""
    signed = [(i, s, s * r_w[:, i]) for i in range(3) for s in (1.0, -1.0)]
    bx = max(signed, key=lambda t: np.dot(t[2], r_c[:, 0]))
    by = max((t for t in signed if t[0] != bx[0]),
             key=lambda t: np.dot(t[2], r_c[:, 1]))
    return bx[2], by[2]


class TestViewDependent:
    def test_identity_camera(self):
        frame = view_dependent_frame(np.eye(3), np.eye(3))
        assert np.allclose(frame.columns[0], [1, 0, 0])
        assert np.allclose(frame.columns[1], [0, 1, 0])

    def test_yaw_30_keeps_x_axis(self):
        r_c = camera_orientation(math.radians(30), -0.3)
        frame = view_dependent_frame(r_c, np.eye(3))
        assert np.allclose(frame.columns[0], [1, 0, 0])

    def test_yaw_60_switches_to_y_axis(self):
        r_c = camera_orientation(math.radians(60), -0.3)
        frame = view_dependent_frame(r_c, np.eye(3))
        ex, _ = enumerate_view_axes(r_c, np.eye(3))
        assert np.allclose(frame.columns[0], ex)
        assert abs(abs(frame.columns[0][1]) - 1.0) < 1e-12

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            r_c = random_rotation(rng)
            r_w = random_rotation(rng)
            frame = view_dependent_frame(r_c, r_w)
            ex, ey = enumerate_view_axes(r_c, r_w)
            assert np.allclose(frame.columns[0], ex, atol=1e-12)
            assert np.allclose(frame.columns[1], ey, atol=1e-12)


class TestControlFrame:
    def test_frame_matrix_shapes(self):
        scene = make_scene(r_t=np.eye(3))
        robot = standard_frame("robot", scene, 3)
        assert frame_matrix(robot).shape == (3, 3)
        task = standard_frame("task", scene, 2)
        m = frame_matrix(task)
        assert m.shape == (3, 2)
        assert np.allclose(m, [[1, 0], [0, 1], [0, 0]])

    def test_columns_are_unit(self):
        rng = np.random.default_rng(18)
        for _ in range(50):
            frame = hybrid_frame_2(random_camera(rng), np.eye(3))
            for col in frame_matrix(frame).T:
                assert abs(np.linalg.norm(col) - 1.0) < 1e-9

    def test_non_unit_column_rejected(self):
        with pytest.raises(FrameError):
            ControlFrame((vec3(2, 0, 0), vec3(0, 1, 0)), kind="bad")

    def test_wheel_needs_three_columns(self):
        with pytest.raises(FrameError):
            ControlFrame((vec3(1, 0, 0), vec3(0, 1, 0)), kind="bad", wheel_z=True)

    def test_padded_matrix_completes_2d(self):
        frame = ControlFrame((vec3(1, 0, 0), vec3(0, 1, 0)), kind="f2")
        assert np.allclose(padded_matrix(frame), np.eye(3))

    def test_columns_immutable(self):
        frame = standard_frame("robot", make_scene(), 3)
        with pytest.raises(ValueError):
            frame.columns[0][0] = 5.0


class TestFrameFromName:
    def test_all_names_resolve_in_tracing_scene(self, trace_scene):
        scene = trace_scene.with_eef_rotation(np.eye(3))
        for name in ("robot", "camera", "task", "world", "end_effector",
                     "orbit", "view_dependent", "hybrid1", "hybrid2", "hybrid3"):
            frame = frame_from_name(name, scene)
            assert frame.device_dim in (2, 3)

    def test_unknown_name_rejected(self, pick_scene):
        with pytest.raises(FrameError):
            frame_from_name("polar", pick_scene)
