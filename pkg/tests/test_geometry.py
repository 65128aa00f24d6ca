"""Projection, quaternion, and wrist-extrinsics math against hand-computed values.

Back-projection oracle used throughout:
    p_cam = ((u + 0.5 - cx) * z / fx, (v + 0.5 - cy) * z / fy, z)
    p_wld = R^T (p_cam - T)
The half-pixel offset puts the point strictly inside pixel (u, v), so the
floor-based projection must land back on exactly (u, v).
"""

import numpy as np
import pytest

from aimbot.errors import ValidationError
from aimbot.geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    PixelProjection,
    Pose,
    compute_wrist_extrinsics,
    pose_to_matrix,
    project_points,
    quat_multiply,
    quat_slerp,
    quat_to_direction,
    quat_to_rotation,
    world_to_image,
)

from conftest import random_rigid_extrinsics


INTR = CameraIntrinsics(fx=100.0, fy=100.0, cx=64.0, cy=64.0, width=128, height=128)
IDENTITY = CameraExtrinsics(np.eye(4))


def back_project(u: int, v: int, z: float, extr: CameraExtrinsics, intr: CameraIntrinsics):
    p_cam = np.array([
        (u + 0.5 - intr.cx) * z / intr.fx,
        (v + 0.5 - intr.cy) * z / intr.fy,
        z,
    ])
    return extr.rotation.T @ (p_cam - extr.translation)


class TestWorldToImage:
    def test_optical_axis_hits_principal_point(self):
        proj = world_to_image((0.0, 0.0, 1.0), IDENTITY, INTR)
        assert proj == PixelProjection(u=64, v=64, z=1.0)

    def test_off_axis_point(self):
        # u = floor(100 * 0.5 / 2 + 64) = 89, v = floor(100 * 0.25 / 2 + 64) = 76
        proj = world_to_image((0.5, 0.25, 2.0), IDENTITY, INTR)
        assert (proj.u, proj.v, proj.z) == (89, 76, 2.0)

    def test_pure_translation_moves_point_onto_axis(self):
        m = np.eye(4)
        m[:3, 3] = (0.0, 0.0, 1.0)
        proj = world_to_image((0.0, 0.0, 0.0), CameraExtrinsics(m), INTR)
        assert (proj.u, proj.v, proj.z) == (64, 64, 1.0)

    def test_floor_convention_for_negative_coordinates(self):
        # u_real = 100 * (-0.655) + 64 = -1.5 -> floor -2 (not truncation toward 0)
        proj = world_to_image((-0.655, 0.0, 1.0), IDENTITY, INTR)
        assert proj.u == -2

    def test_singularity_returns_sentinel(self):
        proj = world_to_image((0.3, 0.2, 0.0), IDENTITY, INTR)
        assert (proj.u, proj.v, proj.z) == (-1, -1, 0.0)

    def test_behind_camera_keeps_negative_depth(self):
        proj = world_to_image((0.0, 0.0, -2.0), IDENTITY, INTR)
        assert proj.z == -2.0

    def test_non_finite_point_rejected(self):
        with pytest.raises(ValidationError):
            world_to_image((np.nan, 0.0, 1.0), IDENTITY, INTR)

    def test_round_trip_1000_points(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            extr = random_rigid_extrinsics(rng)
            us = rng.integers(0, INTR.width, size=100)
            vs = rng.integers(0, INTR.height, size=100)
            zs = rng.uniform(0.2, 5.0, size=100)
            for u, v, z in zip(us, vs, zs):
                p = back_project(int(u), int(v), float(z), extr, INTR)
                proj = world_to_image(p, extr, INTR)
                assert (proj.u, proj.v) == (u, v)
                assert abs(proj.z - z) < 1e-9

    def test_composition_with_identity_is_bit_identical(self):
        rng = np.random.default_rng(7)
        extr = random_rigid_extrinsics(rng)
        composed = CameraExtrinsics(extr.matrix @ np.eye(4))
        for p in rng.uniform(-2, 2, size=(50, 3)):
            a = world_to_image(p, extr, INTR)
            b = world_to_image(p, composed, INTR)
            assert a == b

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        extr = random_rigid_extrinsics(rng)
        pts = rng.uniform(-2, 2, size=(64, 3))
        u, v, z = project_points(pts, extr, INTR)
        for i, p in enumerate(pts):
            proj = world_to_image(p, extr, INTR)
            assert (proj.u, proj.v) == (u[i], v[i])
            assert proj.z == z[i]


class TestQuatToDirection:
    def test_identity_points_along_z(self):
        assert np.allclose(quat_to_direction((1, 0, 0, 0)), (0, 0, 1))

    def test_half_turn_about_x_points_down(self):
        # Rotation-matrix oracle: R_x(180deg) third column = (0, 0, -1).
        assert np.allclose(quat_to_direction((0, 1, 0, 0)), (0, 0, -1), atol=1e-12)

    def test_quarter_turn_about_y_points_along_x(self):
        c = np.cos(np.pi / 4)
        assert np.allclose(quat_to_direction((c, 0, np.sin(np.pi / 4), 0)), (1, 0, 0), atol=1e-12)

    def test_matches_rotation_matrix_third_column(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            expected = quat_to_rotation(q)[:, 2]
            assert np.allclose(quat_to_direction(q), expected, atol=1e-12)

    def test_double_cover(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            assert np.allclose(quat_to_direction(q), quat_to_direction(-q), atol=1e-15)

    def test_unit_norm_output(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            assert abs(np.linalg.norm(quat_to_direction(q)) - 1.0) < 1e-9

    def test_non_unit_quaternion_rejected(self):
        with pytest.raises(ValidationError):
            quat_to_direction((1.0, 1.0, 0.0, 0.0))


class TestWristExtrinsics:
    def test_identity_pose_identity_hand_eye(self):
        pose = Pose(position=(0, 0, 0), orientation=(1, 0, 0, 0))
        extr = compute_wrist_extrinsics(pose, np.eye(4))
        assert np.allclose(extr.matrix, np.eye(4), atol=1e-12)

    def test_translated_pose_inverts_translation(self):
        pose = Pose(position=(0.1, 0, 0), orientation=(1, 0, 0, 0))
        extr = compute_wrist_extrinsics(pose, np.eye(4))
        expected = np.eye(4)
        expected[:3, 3] = (-0.1, 0, 0)
        assert np.allclose(extr.matrix, expected, atol=1e-12)

    def test_rotation_block_stays_rigid(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            pose = Pose(position=rng.uniform(-1, 1, 3), orientation=q)
            hand_eye = random_rigid_extrinsics(rng).matrix
            extr = compute_wrist_extrinsics(pose, hand_eye)
            assert abs(np.linalg.det(extr.rotation) - 1.0) < 1e-6

    def test_composes_to_identity_with_camera_pose(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            pose = Pose(position=rng.uniform(-1, 1, 3), orientation=q)
            hand_eye = random_rigid_extrinsics(rng).matrix
            extr = compute_wrist_extrinsics(pose, hand_eye)
            composed = extr.matrix @ pose_to_matrix(pose) @ hand_eye
            assert np.allclose(composed, np.eye(4), atol=1e-9)

    def test_non_rigid_hand_eye_rejected(self):
        bad = np.eye(4)
        bad[0, 0] = 2.0
        pose = Pose(position=(0, 0, 0), orientation=(1, 0, 0, 0))
        with pytest.raises(ValidationError):
            compute_wrist_extrinsics(pose, bad)


class TestTypeInvariants:
    def test_pose_rejects_non_unit_quaternion(self):
        with pytest.raises(ValidationError):
            Pose(position=(0, 0, 0), orientation=(0.9, 0, 0, 0))

    def test_pose_rejects_non_finite_position(self):
        with pytest.raises(ValidationError):
            Pose(position=(np.inf, 0, 0), orientation=(1, 0, 0, 0))

    def test_intrinsics_reject_non_positive_focal(self):
        with pytest.raises(ValidationError):
            CameraIntrinsics(fx=0.0, fy=100.0, cx=1, cy=1, width=2, height=2)

    def test_intrinsics_reject_empty_image(self):
        with pytest.raises(ValidationError):
            CameraIntrinsics(fx=10.0, fy=10.0, cx=1, cy=1, width=0, height=2)

    def test_extrinsics_reject_reflection(self):
        m = np.eye(4)
        m[0, 0] = -1.0  # det(R) = -1
        with pytest.raises(ValidationError):
            CameraExtrinsics(m)

    def test_extrinsics_reject_bad_bottom_row(self):
        m = np.eye(4)
        m[3, 0] = 0.5
        with pytest.raises(ValidationError):
            CameraExtrinsics(m)

    def test_extrinsics_values_are_immutable(self):
        extr = CameraExtrinsics(np.eye(4))
        with pytest.raises(ValueError):
            extr.matrix[0, 0] = 5.0


class TestQuatHelpers:
    def test_multiply_matches_rotation_composition(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            q1 = rng.normal(size=4)
            q1 /= np.linalg.norm(q1)
            q2 = rng.normal(size=4)
            q2 /= np.linalg.norm(q2)
            assert np.allclose(
                quat_to_rotation(quat_multiply(q1, q2)),
                quat_to_rotation(q1) @ quat_to_rotation(q2),
                atol=1e-12,
            )

    def test_slerp_endpoints_and_midpoint(self):
        q0 = np.array([1.0, 0.0, 0.0, 0.0])
        q1 = np.array([np.cos(np.pi / 4), np.sin(np.pi / 4), 0.0, 0.0])  # 90deg about x
        assert np.allclose(quat_slerp(q0, q1, 0.0), q0)
        assert np.allclose(quat_slerp(q0, q1, 1.0), q1)
        mid = quat_slerp(q0, q1, 0.5)  # 45deg about x
        assert np.allclose(mid, [np.cos(np.pi / 8), np.sin(np.pi / 8), 0, 0], atol=1e-12)
