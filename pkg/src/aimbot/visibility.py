"""Depth-buffer occlusion test for projected 3D points.

A depth image is an (H, W) float array of metric depths aligned to the RGB
image; 0 or non-finite entries mark pixels with no depth evidence.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .geometry import CameraIntrinsics, PixelProjection

# Visibility slack in meters; roughly the noise floor of consumer RGB-D
# sensors.
DEFAULT_EPSILON = 0.01


def depth_valid_mask(depth: np.ndarray) -> np.ndarray:
    """Boolean mask of pixels carrying real depth evidence."""
    return np.isfinite(depth) & (depth > 0)


def validate_depth_image(depth: np.ndarray, intr: CameraIntrinsics | None = None) -> np.ndarray:
    """Check shape/content invariants of a depth image; returns it as float64."""
    arr = np.asarray(depth, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"depth image must be 2-D, got shape {arr.shape}")
    if intr is not None and arr.shape != (intr.height, intr.width):
        raise ValidationError(
            f"depth image is {arr.shape[1]}x{arr.shape[0]} but intrinsics expect "
            f"{intr.width}x{intr.height}"
        )
    if arr.size:
        if np.isfinite(arr).all():
            if arr.min() < 0:
                raise ValidationError("depth image contains negative depths")
        else:
            # Non-finite entries are legal invalid markers; only finite
            # values must be non-negative.
            finite = arr[np.isfinite(arr)]
            if finite.size and finite.min() < 0:
                raise ValidationError("depth image contains negative depths")
    return arr


def visibility_mask(
    u: np.ndarray, v: np.ndarray, z: np.ndarray, depth: np.ndarray, epsilon: float
) -> np.ndarray:
    """Vectorized visibility of projected points.

    A point is visible when it is in front of the camera, inside the image,
    and strictly closer than the observed depth minus the slack epsilon.
    Pixels without depth evidence do not occlude.
    """
    h, w = depth.shape
    in_frustum = (z > 0) & (u >= 0) & (u < w) & (v >= 0) & (v < h)
    safe_u = np.clip(u, 0, w - 1)
    safe_v = np.clip(v, 0, h - 1)
    observed = depth[safe_v, safe_u]
    no_evidence = ~(np.isfinite(observed) & (observed > 0))
    return in_frustum & (no_evidence | (z + epsilon < observed))


def check_visibility(proj: PixelProjection, depth: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> bool:
    """Depth-buffer visibility test for a single projected point."""
    mask = visibility_mask(
        np.array([proj.u]), np.array([proj.v]), np.array([proj.z]),
        np.asarray(depth, dtype=np.float64), epsilon,
    )
    return bool(mask[0])
