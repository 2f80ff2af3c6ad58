import numpy as np
import pytest

from teleframe.geometry import Pose, vec3
from teleframe.letters import (
    GLYPH_ADVANCE,
    GLYPH_HEIGHT,
    GLYPH_WIDTH,
    UnknownLetterSet,
    _arc,
    letter_paths,
    tracing_target,
)
from teleframe.scenarios import (
    GRASP_RADIUS,
    PLACE_DWELL_S,
    ScenarioError,
    reset,
    step,
)

EEF = Pose.identity()
DT = 1.0 / 30


@pytest.fixture
def world(pick_scene):
    return reset("pick_place", pick_scene, seed=7)


class TestReset:
    def test_same_seed_is_identical(self, pick_scene):
        a = reset("pick_place", pick_scene, seed=42)
        b = reset("pick_place", pick_scene, seed=42)
        assert (a.block_center == b.block_center).all()
        assert (a.target_center == b.target_center).all()

    def test_sampling_respects_workspace_and_separation(self, pick_scene):
        (x0, x1), (y0, y1) = pick_scene.workspace
        for seed in range(1000):
            w = reset("pick_place", pick_scene, seed)
            for p in (w.block_center, w.target_center):
                assert x0 <= p[0] <= x1 and y0 <= p[1] <= y1
            flat = (w.block_center - w.target_center)[:2]
            assert np.linalg.norm(flat) >= 0.1

    def test_tracing_reset(self, trace_scene):
        w = reset("tracing", trace_scene, seed=0)
        assert w.pen_trace == ()
        assert w.completeness == 0.0
        assert (w.target_curve == tracing_target("hri")).all()
        w2 = reset("tracing", trace_scene, seed=1)
        assert (w2.target_curve == tracing_target("ros")).all()

    def test_unknown_scenario(self, pick_scene):
        with pytest.raises(ScenarioError):
            reset("pouring", pick_scene, 0)

    def test_tracing_needs_whiteboard(self, pick_scene):
        with pytest.raises(ScenarioError):
            reset("tracing", pick_scene, 0)


class TestPickPlaceStep:
    def test_idle_tick(self, world):
        far = vec3(0.0, 0.0, 0.5)
        new, events = step(world, EEF, far, DT)
        assert events == []
        assert new.elapsed == pytest.approx(DT)
        assert not new.held

    def test_grasp_inside_threshold(self, world):
        tip = world.block_center + vec3(0.015, 0, 0)
        new, events = step(world, EEF, tip, DT)
        assert "grasp" in events
        assert new.held
        assert np.allclose(new.grasp_offset, world.block_center - tip)

    def test_no_grasp_outside_threshold(self, world):
        tip = world.block_center + vec3(GRASP_RADIUS + 0.001, 0, 0)
        new, events = step(world, EEF, tip, DT)
        assert not new.held and events == []

    def test_held_block_follows_fingertip(self, world):
        tip = world.block_center + vec3(0.01, 0, 0)
        w, _ = step(world, EEF, tip, DT)
        offset = w.grasp_offset
        for delta in ([0.05, 0, 0.02], [0, -0.04, 0.05], [0.1, 0.1, 0.1]):
            tip = tip + np.array(delta)
            w, _ = step(w, EEF, tip, DT)
            assert np.allclose(w.block_center, tip + offset, atol=1e-12)

    def test_collision_debounce(self, world):
        below = vec3(0.4, 0.0, -0.005)
        above = vec3(0.4, 0.0, 0.05)
        w, events = step(world, EEF, below, DT)
        assert events.count("collision") == 1
        # staying in contact emits nothing new
        for _ in range(10):
            w, events = step(w, EEF, below, DT)
            assert events == []
        # a short clearance does not re-arm
        w, _ = step(w, EEF, above, 0.1)
        w, events = step(w, EEF, below, DT)
        assert events == []
        # > 0.2 s of clearance re-arms the counter
        w, _ = step(w, EEF, above, 0.15)
        w, _ = step(w, EEF, above, 0.15)
        w, events = step(w, EEF, below, DT)
        assert events.count("collision") == 1
        assert w.collisions == 2

    def test_placement_success_after_dwell(self, world):
        tip = world.block_center
        w, events = step(world, EEF, tip, DT)
        assert w.held
        # hover the block centered over the target, bottom 1 cm up
        goal_center = w.target_center + vec3(0, 0, w.half_extent + 0.01)
        tip_goal = goal_center - w.grasp_offset
        ticks = int(PLACE_DWELL_S / DT) + 1
        all_events = []
        for _ in range(ticks):
            w, events = step(w, EEF, tip_goal, DT)
            all_events.extend(events)
        assert all_events.count("release") == 1
        assert all_events.count("success") == 1
        assert w.succeeded and not w.held
        # further ticks change nothing
        w2, events = step(w, EEF, tip_goal, DT)
        assert events == []

    def test_dwell_resets_when_leaving_target(self, world):
        tip = world.block_center
        w, _ = step(world, EEF, tip, DT)
        goal = w.target_center + vec3(0, 0, w.half_extent + 0.01) - w.grasp_offset
        w, _ = step(w, EEF, goal, DT)
        assert w.place_dwell_s > 0
        w, _ = step(w, EEF, goal + vec3(0.2, 0, 0.1), DT)
        assert w.place_dwell_s == 0.0

    def test_timeout_fires_exactly_once(self, world):
        w = world
        timeouts = 0
        tip = vec3(0.0, 0.0, 0.5)
        for _ in range(95):
            w, events = step(w, EEF, tip, 1.0)
            timeouts += events.count("timeout")
        assert timeouts == 1
        assert w.timed_out and w.finished


class TestTracingStep:
    def test_pen_stays_on_board(self, trace_scene):
        w = reset("tracing", trace_scene, seed=0)
        rng = np.random.default_rng(50)
        for _ in range(50):
            tip = vec3(0.7, 0, 0.3) + 0.2 * rng.normal(size=3)
            w, _ = step(w, EEF, tip, DT)
        board = trace_scene.whiteboard
        for uv in w.pen_trace:
            p3 = w.board_point(uv)
            assert abs(board.height(p3)) < 1e-6

    def test_completeness_monotone_and_done(self, trace_scene):
        w = reset("tracing", trace_scene, seed=0)
        prev = 0.0
        done_events = 0
        for uv in w.target_curve:
            tip = w.board_point(uv) + 0.1 * w.board.normal
            w, events = step(w, EEF, tip, DT)
            assert w.completeness >= prev - 1e-12
            prev = w.completeness
            done_events += events.count("done")
        assert w.completeness >= 0.99
        assert done_events == 1
        assert w.traced


class TestLetters:
    def test_hri_contract(self):
        strokes = letter_paths("hri")
        assert len(strokes) >= 2  # three glyphs, multiple strokes
        # all points inside their glyph slot boxes (after centering)
        all_pts = np.array([p for s in strokes for p in s])
        assert all_pts[:, 1].min() >= -GLYPH_HEIGHT / 2 - 1e-12
        assert all_pts[:, 1].max() <= GLYPH_HEIGHT / 2 + 1e-12
        width = 2 * GLYPH_ADVANCE + GLYPH_WIDTH
        assert all_pts[:, 0].min() >= -width / 2 - 1e-12
        assert all_pts[:, 0].max() <= width / 2 + 1e-12

    def test_every_set_builds(self):
        for name in ("hri", "ros", "lab", "practice"):
            target = tracing_target(name)
            assert len(target) >= 2

    def test_arc_points_equidistant(self):
        pts = np.array(_arc((0.3, -0.2), 0.05, 10, 260))
        center = np.array([0.3, -0.2])
        d = np.linalg.norm(pts - center, axis=1)
        assert np.abs(d - 0.05).max() < 1e-6

    def test_glyph_circle_roundness(self):
        # the 'o' stroke is one sampled circle: every point equidistant from
        # the circumcenter of three spread samples
        strokes = letter_paths("ros")
        o_stroke = np.array(strokes[2])  # r has 2 strokes, then o
        a, b, c = o_stroke[0], o_stroke[len(o_stroke) // 3], \
            o_stroke[2 * len(o_stroke) // 3]
        ab, ac = b - a, c - a
        m = np.array([ab, ac])
        rhs = 0.5 * np.array([ab @ (a + b), ac @ (a + c)])
        center = np.linalg.solve(m, rhs)
        d = np.linalg.norm(o_stroke - center, axis=1)
        assert np.abs(d - d[0]).max() < 1e-6

    def test_unknown_set_rejected(self):
        with pytest.raises(UnknownLetterSet):
            letter_paths("xyz")
