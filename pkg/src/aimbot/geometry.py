"""Rigid transforms, pinhole camera models, and world-to-image projection.

Conventions used package-wide:
  * world frame: right-handed, meters; quaternions are (w, x, y, z)
  * camera frame: x right, y down, z forward (computer-vision standard)
  * extrinsics map world coordinates to camera coordinates
  * pixel coordinates are (u, v) = (column, row), floor of the real-valued
    projection
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

QUAT_NORM_TOL = 1e-6
ROTATION_TOL = 1e-6

# |z_c| below this is treated as the projective singularity: the pixel is
# reported as the out-of-frame sentinel and depth as 0, which the visibility
# test rejects.
Z_SINGULARITY = 1e-9
SENTINEL_PIXEL = (-1, -1)

# Saturation bound for pixel coordinates; keeps float->int casts defined for
# degenerate poses (z_c barely above the singularity cutoff).
_PIXEL_CLIP = 2**31


def _vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite, got {arr}")
    return arr


def _quat(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (4,):
        raise ValidationError(f"{name} must be a (w, x, y, z) quaternion, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite, got {arr}")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > QUAT_NORM_TOL:
        raise ValidationError(f"{name} must be unit length, |q| = {norm}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid body state: world-frame position plus unit quaternion (w, x, y, z)."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _freeze(_vec3(self.position, "position")))
        object.__setattr__(self, "orientation", _freeze(_quat(self.orientation, "orientation")))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValidationError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"image size must be >= 1, got {self.width}x{self.height}")


def rotation_is_rigid(matrix: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    """True when the upper-left 3x3 block is orthonormal with determinant +1."""
    r = np.asarray(matrix, dtype=np.float64)[:3, :3]
    if not np.all(np.isfinite(r)):
        return False
    if not np.allclose(r @ r.T, np.eye(3), atol=tol):
        return False
    return abs(float(np.linalg.det(r)) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class CameraExtrinsics:
    """4x4 rigid transform taking world coordinates to camera coordinates."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValidationError(f"extrinsics must be 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("extrinsics must be finite")
        if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValidationError(f"extrinsics bottom row must be (0, 0, 0, 1), got {m[3]}")
        if not rotation_is_rigid(m):
            raise ValidationError("extrinsics rotation block is not rigid (orthonormal, det +1)")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:3, 3]

    def camera_center(self) -> np.ndarray:
        """Camera origin expressed in the world frame."""
        return -self.rotation.T @ self.translation

    def inverse_matrix(self) -> np.ndarray:
        """4x4 camera-to-world transform."""
        out = np.eye(4)
        out[:3, :3] = self.rotation.T
        out[:3, 3] = -self.rotation.T @ self.translation
        return out


@dataclass(frozen=True)
class PixelProjection:
    """Integer pixel (column, row) and camera-frame depth of a projected point.

    z may be <= 0 for points behind the camera; (u, v) is the sentinel
    (-1, -1) with z = 0 at the projective singularity.
    """

    u: int
    v: int
    z: float


def quat_to_rotation(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = _quat(q, "quaternion")
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_to_direction(q) -> np.ndarray:
    """Pointing axis of a gripper orientation: the gripper-frame z-axis in world
    coordinates, normalized to unit length."""
    w, x, y, z = _quat(q, "quaternion")
    d = np.array(
        [
            2 * (x * z + w * y),
            2 * (y * z - w * x),
            1 - 2 * (x * x + y * y),
        ]
    )
    return d / np.linalg.norm(d)


def quat_multiply(q1, q2) -> np.ndarray:
    """Hamilton product q1 * q2 for (w, x, y, z) quaternions."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def quat_slerp(q0, q1, alpha: float) -> np.ndarray:
    """Spherical interpolation between two unit quaternions, shortest arc."""
    a = _quat(q0, "q0")
    b = _quat(q1, "q1")
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-10:
        out = a + alpha * (b - a)
    else:
        theta = np.arccos(min(dot, 1.0))
        out = (np.sin((1 - alpha) * theta) * a + np.sin(alpha * theta) * b) / np.sin(theta)
    return out / np.linalg.norm(out)


def pose_to_matrix(pose: Pose) -> np.ndarray:
    """4x4 gripper-to-world transform of an end-effector pose."""
    m = np.eye(4)
    m[:3, :3] = quat_to_rotation(pose.orientation)
    m[:3, 3] = pose.position
    return m


def project_points(points: np.ndarray, extr: CameraExtrinsics, intr: CameraIntrinsics):
    """Project (n, 3) world points; returns (u, v, z) arrays.

    u, v are int64 floors of the real-valued projection; entries at the
    projective singularity get the sentinel pixel and z = 0.

    The transform is written elementwise (not as a matmul) so results are
    bit-identical for any batch size; BLAS kernels reorder sums per shape.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    r = extr.rotation
    t = extr.translation
    px, py, pz = pts[:, 0], pts[:, 1], pts[:, 2]
    xc = r[0, 0] * px + r[0, 1] * py + r[0, 2] * pz + t[0]
    yc = r[1, 0] * px + r[1, 1] * py + r[1, 2] * pz + t[1]
    z = r[2, 0] * px + r[2, 1] * py + r[2, 2] * pz + t[2]
    singular = np.abs(z) < Z_SINGULARITY
    safe_z = np.where(singular, 1.0, z)
    uf = intr.fx * xc / safe_z + intr.cx
    vf = intr.fy * yc / safe_z + intr.cy
    np.clip(uf, -_PIXEL_CLIP, _PIXEL_CLIP, out=uf)
    np.clip(vf, -_PIXEL_CLIP, _PIXEL_CLIP, out=vf)
    u = np.floor(uf).astype(np.int64)
    v = np.floor(vf).astype(np.int64)
    u[singular] = SENTINEL_PIXEL[0]
    v[singular] = SENTINEL_PIXEL[1]
    z[singular] = 0.0
    return u, v, z


def world_to_image(p_wld, extr: CameraExtrinsics, intr: CameraIntrinsics) -> PixelProjection:
    """Project one world point through extrinsics and pinhole intrinsics."""
    p = _vec3(p_wld, "p_wld")
    u, v, z = project_points(p[np.newaxis, :], extr, intr)
    return PixelProjection(u=int(u[0]), v=int(v[0]), z=float(z[0]))


def compute_wrist_extrinsics(ee_pose: Pose, hand_eye) -> CameraExtrinsics:
    """World-to-camera extrinsics of a wrist-mounted camera.

    hand_eye is the fixed 4x4 camera-in-gripper transform; the camera pose in
    the world is gripper_to_world(ee_pose) @ hand_eye, and the returned
    extrinsics is its inverse.
    """
    he = np.asarray(hand_eye, dtype=np.float64)
    if he.shape != (4, 4):
        raise ValidationError(f"hand_eye must be 4x4, got shape {he.shape}")
    if not np.array_equal(he[3], [0.0, 0.0, 0.0, 1.0]) or not rotation_is_rigid(he):
        raise ValidationError("hand_eye is not a rigid transform")
    cam_to_world = pose_to_matrix(ee_pose) @ he
    r = cam_to_world[:3, :3]
    t = cam_to_world[:3, 3]
    world_to_cam = np.eye(4)
    world_to_cam[:3, :3] = r.T
    world_to_cam[:3, 3] = -r.T @ t
    return CameraExtrinsics(world_to_cam)


def look_at_extrinsics(eye, target, up=(0.0, 0.0, 1.0)) -> CameraExtrinsics:
    """Extrinsics of a camera at `eye` whose optical axis points at `target`.

    `up` is the world direction that should map to image-up; it must not be
    parallel to the viewing direction.
    """
    eye = _vec3(eye, "eye")
    target = _vec3(target, "target")
    up = _vec3(up, "up")
    z_axis = target - eye
    norm = np.linalg.norm(z_axis)
    if norm < 1e-12:
        raise ValidationError("look_at target coincides with eye")
    z_axis = z_axis / norm
    x_axis = np.cross(z_axis, up)
    norm = np.linalg.norm(x_axis)
    if norm < 1e-9:
        raise ValidationError("up direction is parallel to the viewing direction")
    x_axis = x_axis / norm
    y_axis = np.cross(z_axis, x_axis)
    m = np.eye(4)
    m[:3, :3] = np.stack([x_axis, y_axis, z_axis])
    m[:3, 3] = -m[:3, :3] @ eye
    return CameraExtrinsics(m)
