"""Ray march from the end-effector along its pointing axis to a stop point.

The march steps in fixed metric increments, projecting and visibility-testing
each point against one camera, and stops after a run of consecutive invisible
steps (the tolerance) or at the length cap. The stop point is the last visible
marched point; when nothing is visible it falls back to the end-effector
origin itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    project_points,
    quat_to_direction,
    world_to_image,
)
from .visibility import DEFAULT_EPSILON, validate_depth_image, visibility_mask

DEFAULT_STEP_DELTA = 0.005
DEFAULT_TOLERANCE = 5
DEFAULT_MAX_LENGTH = 2.0


@dataclass(frozen=True)
class MarchConfig:
    """Step size, invisible-step tolerance, length cap, and visibility slack."""

    step_delta: float = DEFAULT_STEP_DELTA
    tolerance: int = DEFAULT_TOLERANCE
    max_length: float = DEFAULT_MAX_LENGTH
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.step_delta > 0:
            raise ValidationError(f"step_delta must be > 0, got {self.step_delta}")
        if self.tolerance < 0:
            raise ValidationError(f"tolerance must be >= 0, got {self.tolerance}")
        if not self.max_length > 0:
            raise ValidationError(f"max_length must be > 0, got {self.max_length}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class RayMarchResult:
    """Marched points, their projections and visibility, and the stop point.

    points3d is (L, 3) world coordinates, points2d (L, 2) integer pixels, and
    visibility (L,) booleans; entry i sits (i + 1) * step_delta along the ray.
    projection_distance is the metric distance from the end-effector origin to
    stop_point (0 when no marched point was visible).
    """

    points3d: np.ndarray
    points2d: np.ndarray
    visibility: np.ndarray
    stop_pixel: tuple[int, int]
    stop_point: np.ndarray
    projection_distance: float


def find_stop_point(
    ee_pose: Pose,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    depth: np.ndarray,
    cfg: MarchConfig = MarchConfig(),
) -> RayMarchResult:
    """March from the end-effector origin along its pointing axis.

    Steps are appended (point, pixel, visibility flag) until the consecutive
    invisible-step count reaches cfg.tolerance or the marched length would
    exceed cfg.max_length. The consecutive counter resets on every visible
    step.
    """
    depth = validate_depth_image(depth, intr)
    direction = quat_to_direction(ee_pose.orientation)
    origin = ee_pose.position

    n_steps = int(np.floor(cfg.max_length / cfg.step_delta + 1e-9))
    distances = (np.arange(n_steps, dtype=np.float64) + 1.0) * cfg.step_delta
    points = origin + distances[:, np.newaxis] * direction

    u, v, z = project_points(points, extr, intr)
    visible = visibility_mask(u, v, z, depth, cfg.epsilon)

    # Length of the invisible run ending at each index: 0 on visible entries.
    idx = np.arange(n_steps)
    last_visible = np.maximum.accumulate(np.where(visible, idx, -1))
    run = idx - last_visible
    breaking = (~visible) & (run >= cfg.tolerance)
    length = int(np.argmax(breaking)) + 1 if breaking.any() else n_steps

    points3d = points[:length]
    points2d = np.stack([u[:length], v[:length]], axis=1)
    vis = visible[:length]

    visible_idx = np.flatnonzero(vis)
    if visible_idx.size:
        stop = int(visible_idx[-1])
        stop_point = points3d[stop].copy()
        stop_pixel = (int(points2d[stop, 0]), int(points2d[stop, 1]))
        projection_distance = float((stop + 1) * cfg.step_delta)
    else:
        ee_proj = world_to_image(origin, extr, intr)
        stop_point = origin.copy()
        stop_pixel = (ee_proj.u, ee_proj.v)
        projection_distance = 0.0

    return RayMarchResult(
        points3d=points3d,
        points2d=points2d,
        visibility=vis,
        stop_pixel=stop_pixel,
        stop_point=stop_point,
        projection_distance=projection_distance,
    )
