"""Closed-form intersections, ray-cast depth, and the scene/trajectory parsers."""

import numpy as np
import pytest

from aimbot.errors import SceneFileError, ValidationError
from aimbot.geometry import CameraIntrinsics, Pose, look_at_extrinsics
from aimbot.synthscene import (
    Box,
    Plane,
    Scene,
    Sphere,
    analytic_intersection,
    ground_truth_record,
    load_scene,
    load_trajectory,
    pixel_rays,
    ray_cast_depth,
    render_scene_rgb,
)

INTR = CameraIntrinsics(fx=120.0, fy=120.0, cx=48.0, cy=48.0, width=96, height=96)


def nadir(height: float):
    return look_at_extrinsics(eye=(0, 0, height), target=(0, 0, 0), up=(0, 1, 0))


class TestAnalyticIntersection:
    def test_ray_onto_plane(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),))
        point, dist = analytic_intersection(scene, (0, 0, 0.5), (0, 0, -1.0))
        assert dist == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(point, (0, 0, 0), atol=1e-12)

    def test_miss_returns_none(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),))
        assert analytic_intersection(scene, (0, 0, 0.5), (0, 0, 1.0)) is None
        assert analytic_intersection(Scene(primitives=()), (0, 0, 0.5), (0, 0, -1.0)) is None

    def test_sphere_near_root(self):
        # Quadratic-formula oracle: |oc| = 0.5, r = 0.1 -> t = 0.5 - 0.1 = 0.4.
        scene = Scene(primitives=(Sphere(center=(0, 0, 0), radius=0.1),))
        point, dist = analytic_intersection(scene, (0, 0, 0.5), (0, 0, -1.0))
        assert dist == pytest.approx(0.4, abs=1e-12)
        assert np.allclose(point, (0, 0, 0.1), atol=1e-12)

    def test_box_entry_face(self):
        scene = Scene(primitives=(Box(min_corner=(-0.1, -0.1, -0.1), max_corner=(0.1, 0.1, 0.1)),))
        point, dist = analytic_intersection(scene, (0, 0, 1.0), (0, 0, -1.0))
        assert dist == pytest.approx(0.9, abs=1e-12)
        assert np.allclose(point, (0, 0, 0.1), atol=1e-12)

    def test_nearest_primitive_wins(self):
        scene = Scene(primitives=(
            Plane(normal=(0, 0, 1), offset=0.0),
            Sphere(center=(0, 0, 0.2), radius=0.05),
        ))
        _, dist = analytic_intersection(scene, (0, 0, 0.5), (0, 0, -1.0))
        assert dist == pytest.approx(0.25, abs=1e-12)

    def test_non_unit_direction_rejected(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),))
        with pytest.raises(ValidationError):
            analytic_intersection(scene, (0, 0, 0.5), (0, 0, -2.0))


class TestRayCastDepth:
    def test_fronto_parallel_plane_has_constant_z_depth(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),))
        depth = ray_cast_depth(scene, nadir(1.5), INTR)
        assert depth.shape == (96, 96)
        assert np.allclose(depth, 1.5, atol=1e-12)

    def test_sphere_on_axis_principal_point_depth(self):
        scene = Scene(primitives=(Sphere(center=(0, 0, 0), radius=0.2),))
        depth = ray_cast_depth(scene, nadir(1.5), INTR)
        # Principal point (cx, cy) = (48, 48); its pixel-center ray passes
        # through (48.5, 48.5), slightly off-axis, so allow half-pixel slack.
        assert depth[48, 48] == pytest.approx(1.5 - 0.2, abs=2e-3)

    def test_empty_scene_all_invalid(self):
        depth = ray_cast_depth(Scene(primitives=()), nadir(1.0), INTR)
        assert (depth == 0.0).all()

    def test_consistency_with_analytic_intersection(self):
        rng = np.random.default_rng(33)
        scene = Scene(primitives=(
            Plane(normal=(0, 0, 1), offset=0.0),
            Sphere(center=(0.1, -0.05, 0.12), radius=0.12),
            Box(min_corner=(-0.3, -0.2, 0.0), max_corner=(-0.1, 0.0, 0.15)),
        ))
        extr = look_at_extrinsics(eye=(0.3, -0.8, 0.9), target=(0, 0, 0.05), up=(0, 0, 1))
        depth = ray_cast_depth(scene, extr, INTR)
        origin, dirs, cos = pixel_rays(extr, INTR)
        flat = depth.ravel()
        valid = np.flatnonzero(flat > 0)
        for idx in rng.choice(valid, size=200, replace=False):
            hit = analytic_intersection(scene, origin, dirs[idx])
            assert hit is not None
            assert hit[1] * cos[idx] == pytest.approx(flat[idx], abs=1e-9)

    def test_render_rgb_shape_and_determinism(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),
                                  Sphere(center=(0, 0, 0.1), radius=0.1)))
        a = render_scene_rgb(scene, nadir(1.2), INTR)
        b = render_scene_rgb(scene, nadir(1.2), INTR)
        assert a.shape == (96, 96, 3) and a.dtype == np.uint8
        assert np.array_equal(a, b)
        assert len(np.unique(a.reshape(-1, 3), axis=0)) >= 3  # background + both primitives


class TestPrimitiveInvariants:
    def test_plane_normal_must_be_unit(self):
        with pytest.raises(ValidationError):
            Plane(normal=(0, 0, 2.0), offset=0.0)

    def test_sphere_radius_positive(self):
        with pytest.raises(ValidationError):
            Sphere(center=(0, 0, 0), radius=0.0)

    def test_box_corners_ordered(self):
        with pytest.raises(ValidationError):
            Box(min_corner=(0, 0, 0), max_corner=(1, -1, 1))


SCENE_TEXT = """\
# tabletop with a ball
plane normal 0 0 2 offset 0     # non-unit normal is normalized
sphere center 0.1 0.0 0.06 radius 0.06
box min -0.3 -0.2 0 max -0.1 0 0.15
camera id front role fixed fx 130 fy 130 cx 64 cy 64 width 128 height 128 pos 0 -0.9 0.8 lookat 0 0 0.1 up 0 0 1
camera id wrist role wrist fx 110 fy 110 cx 64 cy 64 width 128 height 128 offset 0 0 -0.06
"""


class TestSceneFile:
    def test_parses_primitives_and_cameras(self, tmp_path):
        path = tmp_path / "scene.txt"
        path.write_text(SCENE_TEXT)
        scene, cameras = load_scene(path)
        assert [type(p).__name__ for p in scene.primitives] == ["Plane", "Sphere", "Box"]
        assert scene.primitives[0].normal == (0.0, 0.0, 1.0)
        assert [c.id for c in cameras] == ["front", "wrist"]
        assert cameras[0].role == "fixed" and cameras[0].extrinsics is not None
        assert cameras[1].role == "wrist"
        he = np.asarray(cameras[1].hand_eye).reshape(4, 4)
        assert np.allclose(he[:3, 3], (0, 0, -0.06))

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("cylinder center 0 0 0 radius 1", "unknown directive"),
            ("sphere center 0 0 0", "missing field"),
            ("sphere center 0 0 zebra radius 1", "expects numbers"),
            ("plane normal 0 0 1 offset 0 offset 1", "duplicate field"),
            ("camera id a role sideways fx 1 fy 1 cx 0 cy 0 width 4 height 4", "role"),
        ],
    )
    def test_errors_carry_line_numbers(self, tmp_path, line, fragment):
        path = tmp_path / "scene.txt"
        path.write_text("plane normal 0 0 1 offset 0\n" + line + "\n")
        with pytest.raises(SceneFileError) as err:
            load_scene(path)
        assert ":2:" in str(err.value)
        assert fragment in str(err.value)

    def test_duplicate_camera_ids_rejected(self, tmp_path):
        path = tmp_path / "scene.txt"
        cam = "camera id a role wrist fx 1 fy 1 cx 0 cy 0 width 4 height 4 offset 0 0 0\n"
        path.write_text(cam + cam)
        with pytest.raises(SceneFileError):
            load_scene(path)


TRAJ_TEXT = """\
start pos 0 0 0.5 quat 0 1 0 0
end pos 0 0 0.1 quat 0 1 0 0
gripper close_at 5
width 0.08
dt 0.1
"""


class TestTrajectoryFile:
    def test_parse_and_interpolate(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text(TRAJ_TEXT)
        traj = load_trajectory(path)
        assert traj.width == 0.08 and traj.dt == 0.1
        first = traj.pose_at(0, 9)
        last = traj.pose_at(8, 9)
        mid = traj.pose_at(4, 9)
        assert np.allclose(first.position, (0, 0, 0.5))
        assert np.allclose(last.position, (0, 0, 0.1))
        assert np.allclose(mid.position, (0, 0, 0.3))
        assert traj.open_at(4) and not traj.open_at(5)

    def test_single_frame_uses_start(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("start pos 1 2 3 quat 1 0 0 0\nend pos 9 9 9 quat 1 0 0 0\n")
        traj = load_trajectory(path)
        assert np.allclose(traj.pose_at(0, 1).position, (1, 2, 3))

    def test_missing_end_rejected(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("start pos 0 0 0 quat 1 0 0 0\n")
        with pytest.raises(SceneFileError):
            load_trajectory(path)

    def test_bad_quaternion_reports_line(self, tmp_path):
        path = tmp_path / "traj.txt"
        path.write_text("start pos 0 0 0 quat 1 0 0 0\nend pos 0 0 0 quat 5 0 0 0\n")
        with pytest.raises(SceneFileError) as err:
            load_trajectory(path)
        assert ":2:" in str(err.value)


class TestGroundTruth:
    def test_cap_applies_when_nothing_is_hit(self):
        pose = Pose(position=(0, 0, 0.5), orientation=(0, 1, 0, 0))
        rec = ground_truth_record(
            Scene(primitives=()), pose, "cam", nadir(1.5), INTR, frame=3, max_length=2.0,
        )
        assert rec["hit"] is False
        assert rec["stop_distance"] == 2.0
        assert np.allclose(rec["stop_point"], (0, 0, -1.5))
        assert rec["frame"] == 3 and rec["camera"] == "cam"

    def test_hit_reports_analytic_point(self):
        scene = Scene(primitives=(Plane(normal=(0, 0, 1), offset=0.0),))
        pose = Pose(position=(0, 0, 0.5), orientation=(0, 1, 0, 0))
        rec = ground_truth_record(scene, pose, "cam", nadir(1.5), INTR, frame=0, max_length=2.0)
        assert rec["hit"] is True
        assert rec["stop_distance"] == pytest.approx(0.5, abs=1e-12)
        assert rec["stop_pixel"] == [48, 48]
