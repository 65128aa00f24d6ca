"""Rasterize aiming guidance onto RGB frames.

Fixed cameras get a shooting line from the end-effector pixel to the stop
pixel; wrist cameras get a crosshair (or bullseye) reticle centered on the
stop pixel whose arm length shrinks as the end-effector-to-surface distance
grows. Colors encode the gripper state. All drawing is integer raster work on
a copy of the input; outputs are bit-reproducible.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    quat_multiply,
    world_to_image,
)
from .raymarch import MarchConfig, find_stop_point
from .visibility import check_visibility, depth_valid_mask, validate_depth_image

VARIANTS = (
    "default",
    "plain_color",
    "grasp_sense",
    "fixed_length",
    "small_scale",
    "bullseye",
    "randomized",
)

PLAIN_GRAY = (128, 128, 128)

# Pixel defaults are calibrated for 256x256 frames and scale linearly with
# image height at render time.
REFERENCE_HEIGHT = 256

# Depth threshold (meters) under which something is considered held between
# the fingers.
GRASP_DEPTH_THRESHOLD = 0.12


@dataclass(frozen=True)
class GripperState:
    """End-effector pose plus gripper open flag; width in meters if known."""

    pose: Pose
    open: bool
    width: float | None = None

    def __post_init__(self):
        if self.width is not None and self.width < 0:
            raise ValidationError(f"gripper width must be >= 0, got {self.width}")


@dataclass(frozen=True)
class RenderStyle:
    """Colors, sizes, and variant selection for the guidance overlays."""

    variant: str = "default"
    open_line_color: tuple[int, int, int] = (0, 255, 0)
    closed_line_color: tuple[int, int, int] = (128, 0, 128)
    open_dot_color: tuple[int, int, int] = (255, 0, 0)
    closed_dot_color: tuple[int, int, int] = (0, 0, 255)
    grasp_color: tuple[int, int, int] = (255, 165, 0)
    line_thickness: int = 2
    dot_radius: int = 4
    min_reticle_len: int = 10
    max_reticle_len: int = 60
    max_ee_to_surface: float = 0.5
    noise_pos_sigma: float = 0.02
    noise_rot_sigma: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown style variant {self.variant!r}; expected one of {VARIANTS}")
        if self.min_reticle_len > self.max_reticle_len:
            raise ValidationError("min_reticle_len must be <= max_reticle_len")
        if not self.max_ee_to_surface > 0:
            raise ValidationError("max_ee_to_surface must be > 0")
        if self.line_thickness < 1:
            raise ValidationError("line_thickness must be >= 1")
        if self.dot_radius < 0:
            raise ValidationError("dot_radius must be >= 0")
        if self.noise_pos_sigma < 0 or self.noise_rot_sigma < 0:
            raise ValidationError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class ResolvedStyle:
    """Variant-resolved drawing parameters (still at reference resolution)."""

    line_color: tuple[int, int, int]
    arm_color: tuple[int, int, int]
    dot_color: tuple[int, int, int]
    line_thickness: int
    dot_radius: int
    min_reticle_len: int
    max_reticle_len: int
    max_ee_to_surface: float
    fixed_arm_length: bool
    reticle_shape: str


def apply_style_variant(style: RenderStyle, gripper: GripperState, grasp_detected: bool = False) -> ResolvedStyle:
    """Resolve the style variant into concrete colors, sizes, and reticle shape.

    Fixed-view line color follows the gripper open flag; wrist reticle arms
    stay in the open line color (only the center dot encodes the flag).
    """
    line = style.open_line_color if gripper.open else style.closed_line_color
    arm = style.open_line_color
    dot = style.open_dot_color if gripper.open else style.closed_dot_color
    thickness = style.line_thickness
    radius = style.dot_radius
    min_len = style.min_reticle_len
    max_len = style.max_reticle_len
    fixed_len = False
    shape = "crosshair"

    if style.variant == "plain_color":
        line = arm = dot = PLAIN_GRAY
    elif style.variant == "grasp_sense":
        if not gripper.open and grasp_detected:
            line = arm = style.grasp_color
    elif style.variant == "fixed_length":
        fixed_len = True
    elif style.variant == "small_scale":
        thickness = max(1, thickness // 2)
        radius = max(1, radius // 2)
        min_len = max(1, min_len // 2)
        max_len = max(1, max_len // 2)
    elif style.variant == "bullseye":
        shape = "bullseye"

    return ResolvedStyle(
        line_color=line,
        arm_color=arm,
        dot_color=dot,
        line_thickness=thickness,
        dot_radius=radius,
        min_reticle_len=min_len,
        max_reticle_len=max_len,
        max_ee_to_surface=style.max_ee_to_surface,
        fixed_arm_length=fixed_len,
        reticle_shape=shape,
    )


def grasp_sense(
    depth_wrist: np.ndarray,
    intr: CameraIntrinsics,
    gripper: GripperState,
    threshold: float = GRASP_DEPTH_THRESHOLD,
) -> bool:
    """Detect whether something sits between the gripper fingers.

    The wrist camera is rigid to the gripper, so the inter-finger midpoint
    projects to a fixed image region; we use a rectangle centered on the
    principal point with half-extents width//8 x height//8. Returns True when
    the 10th percentile of valid depths inside it is below the threshold;
    False when the region carries no depth evidence or a reported finger
    width says the gripper closed on nothing.
    """
    depth = validate_depth_image(depth_wrist, intr)
    if gripper.width is not None and gripper.width <= 1e-3:
        return False
    cu = int(np.floor(intr.cx))
    cv = int(np.floor(intr.cy))
    half_w = intr.width // 8
    half_h = intr.height // 8
    roi = depth[
        max(cv - half_h, 0): min(cv + half_h + 1, intr.height),
        max(cu - half_w, 0): min(cu + half_w + 1, intr.width),
    ]
    valid = roi[depth_valid_mask(roi)]
    if valid.size == 0:
        return False
    return float(np.percentile(valid, 10)) < threshold


def randomize_cue(
    gripper: GripperState,
    style: RenderStyle,
    frame_index: int = 0,
    camera_id: str = "",
) -> GripperState:
    """Perturb the gripper pose for the randomized-cue ablation.

    Position gets zero-mean Gaussian noise per axis; orientation a random
    axis-angle rotation with |N(0, noise_rot_sigma)| magnitude. The Philox
    counter-based generator is keyed by (rng_seed, frame_index, camera_id),
    so identical indices reproduce the identical perturbation regardless of
    call order or thread.
    """
    if style.variant != "randomized":
        raise ValidationError("randomize_cue requires style.variant == 'randomized'")
    mask = 0xFFFFFFFFFFFFFFFF
    seed = np.random.SeedSequence(
        [style.rng_seed & mask, frame_index & mask, zlib.crc32(camera_id.encode("utf-8"))]
    )
    rng = np.random.Generator(np.random.Philox(seed))

    offset = rng.normal(0.0, style.noise_pos_sigma, size=3)
    axis = rng.normal(0.0, 1.0, size=3)
    angle = abs(rng.normal(0.0, style.noise_rot_sigma))

    norm = np.linalg.norm(axis)
    axis = axis / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
    half = 0.5 * angle
    dq = np.array([np.cos(half), *(np.sin(half) * axis)])
    # No renormalization: with zero sigmas dq is exactly (1, 0, 0, 0) and the
    # pose round-trips bit-identically.
    perturbed = Pose(
        position=gripper.pose.position + offset,
        orientation=quat_multiply(gripper.pose.orientation, dq),
    )
    return replace(gripper, pose=perturbed)


# --- raster primitives -----------------------------------------------------


def _validate_rgb_image(image: np.ndarray, intr: CameraIntrinsics) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValidationError(f"RGB image must be uint8 (H, W, 3), got {arr.dtype} {arr.shape}")
    if arr.shape[:2] != (intr.height, intr.width):
        raise ValidationError(
            f"RGB image is {arr.shape[1]}x{arr.shape[0]} but intrinsics expect "
            f"{intr.width}x{intr.height}"
        )
    return arr


def _paint(img: np.ndarray, us: np.ndarray, vs: np.ndarray, color) -> None:
    h, w = img.shape[:2]
    keep = (us >= 0) & (us < w) & (vs >= 0) & (vs < h)
    img[vs[keep], us[keep]] = color


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    """Integer midpoint line pixels from (x0, y0) to (x1, y1), inclusive."""
    dx, dy = x1 - x0, y1 - y0
    adx, ady = abs(dx), abs(dy)
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    if adx >= ady:
        i = np.arange(adx + 1, dtype=np.int64)
        xs = x0 + sx * i
        ys = y0 + sy * ((2 * i * ady + adx) // (2 * adx)) if adx else np.array([y0], dtype=np.int64)
        return xs, ys, True
    i = np.arange(ady + 1, dtype=np.int64)
    ys = y0 + sy * i
    xs = x0 + sx * ((2 * i * adx + ady) // (2 * ady))
    return xs, ys, False


def _thickness_offsets(thickness: int) -> range:
    return range(-((thickness - 1) // 2), thickness // 2 + 1)


def _draw_thick_line(img: np.ndarray, p0, p1, color, thickness: int) -> None:
    xs, ys, x_major = _bresenham(int(p0[0]), int(p0[1]), int(p1[0]), int(p1[1]))
    for off in _thickness_offsets(thickness):
        if x_major:
            _paint(img, xs, ys + off, color)
        else:
            _paint(img, xs + off, ys, color)


def _disc_offsets(radius: int):
    span = np.arange(-radius, radius + 1, dtype=np.int64)
    du, dv = np.meshgrid(span, span)
    keep = du * du + dv * dv <= radius * radius
    return du[keep], dv[keep]


def _draw_disc(img: np.ndarray, cu: int, cv: int, radius: int, color) -> None:
    du, dv = _disc_offsets(radius)
    _paint(img, cu + du, cv + dv, color)


def _draw_rect(img: np.ndarray, c0: int, c1: int, r0: int, r1: int, color) -> None:
    h, w = img.shape[:2]
    img[max(r0, 0): min(r1, h), max(c0, 0): min(c1, w)] = color


def _draw_crosshair(img: np.ndarray, cu: int, cv: int, arm: int, thickness: int, color) -> None:
    offs = _thickness_offsets(thickness)
    lo, hi = offs.start, offs.stop
    _draw_rect(img, cu - arm, cu + arm + 1, cv + lo, cv + hi, color)
    _draw_rect(img, cu + lo, cu + hi, cv - arm, cv + arm + 1, color)


def _draw_rings(img: np.ndarray, cu: int, cv: int, radii, thickness: int, color) -> None:
    h, w = img.shape[:2]
    reach = int(max(radii) + thickness + 1)
    c0, c1 = max(cu - reach, 0), min(cu + reach + 1, w)
    r0, r1 = max(cv - reach, 0), min(cv + reach + 1, h)
    if c0 >= c1 or r0 >= r1:
        return
    du = np.arange(c0, c1, dtype=np.int64) - cu
    dv = np.arange(r0, r1, dtype=np.int64) - cv
    d2 = dv[:, np.newaxis] ** 2 + du[np.newaxis, :] ** 2
    half = thickness / 2.0
    patch = img[r0:r1, c0:c1]
    for rho in radii:
        mask = (d2 >= (rho - half) ** 2) & (d2 <= (rho + half) ** 2)
        patch[mask] = color


def _visible_runs(visibility: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (start, end) index pairs of contiguous visible stretches."""
    if visibility.size == 0 or not visibility.any():
        return []
    v = visibility.astype(np.int8)
    edges = np.diff(v)
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if v[0]:
        starts.insert(0, 0)
    if v[-1]:
        ends.append(len(v) - 1)
    return list(zip(starts, ends))


def _scale_px(value: int, height: int) -> int:
    """Scale a reference-resolution pixel size to the target image height."""
    return max(1, int(np.floor(value * height / REFERENCE_HEIGHT + 0.5)))


def _scaled(resolved: ResolvedStyle, height: int) -> ResolvedStyle:
    if height == REFERENCE_HEIGHT:
        return resolved
    return replace(
        resolved,
        line_thickness=_scale_px(resolved.line_thickness, height),
        dot_radius=_scale_px(resolved.dot_radius, height),
        min_reticle_len=_scale_px(resolved.min_reticle_len, height),
        max_reticle_len=_scale_px(resolved.max_reticle_len, height),
    )


# --- view renderers ---------------------------------------------------------


def _render_fixed(
    image: np.ndarray,
    depth: np.ndarray,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    gripper: GripperState,
    cfg: MarchConfig,
    style: RenderStyle,
    grasp_detected: bool = False,
) -> tuple[np.ndarray, bool]:
    """Shooting-line render; returns (new image, early_returned)."""
    image = _validate_rgb_image(image, intr)
    depth = validate_depth_image(depth, intr)
    out = image.copy()

    ee_proj = world_to_image(gripper.pose.position, extr, intr)
    if not check_visibility(ee_proj, depth, cfg.epsilon):
        return out, True

    resolved = _scaled(apply_style_variant(style, gripper, grasp_detected), intr.height)
    result = find_stop_point(gripper.pose, extr, intr, depth, cfg)

    runs = _visible_runs(result.visibility)
    if gripper.open and runs:
        runs = [max(runs, key=lambda run: run[1] - run[0])]
    for start, end in runs:
        _draw_thick_line(
            out, result.points2d[start], result.points2d[end],
            resolved.line_color, resolved.line_thickness,
        )
    _draw_disc(out, ee_proj.u, ee_proj.v, resolved.dot_radius, resolved.dot_color)
    return out, False


def _reticle_arm_length(resolved: ResolvedStyle, distance: float) -> int:
    if resolved.fixed_arm_length:
        arm = (resolved.min_reticle_len + resolved.max_reticle_len) / 2.0
    else:
        scaling = (resolved.max_ee_to_surface - distance) / resolved.max_ee_to_surface
        scaling = min(max(scaling, 0.0), 1.0)
        arm = resolved.min_reticle_len + scaling * (resolved.max_reticle_len - resolved.min_reticle_len)
    return int(np.floor(arm + 0.5))


def _render_wrist(
    image: np.ndarray,
    depth: np.ndarray,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    gripper: GripperState,
    cfg: MarchConfig,
    style: RenderStyle,
    grasp_detected: bool | None = None,
) -> tuple[np.ndarray, bool]:
    """Reticle render; returns (new image, early_returned)."""
    image = _validate_rgb_image(image, intr)
    depth = validate_depth_image(depth, intr)
    out = image.copy()

    ee_proj = world_to_image(gripper.pose.position, extr, intr)
    if ee_proj.z <= 0:
        # The gripper body routinely occludes its own origin in the wrist
        # view, so only a behind-camera projection suppresses the reticle.
        return out, True

    if grasp_detected is None:
        grasp_detected = style.variant == "grasp_sense" and grasp_sense(depth, intr, gripper)
    resolved = _scaled(apply_style_variant(style, gripper, grasp_detected), intr.height)

    result = find_stop_point(gripper.pose, extr, intr, depth, cfg)
    cu, cv = result.stop_pixel
    arm = _reticle_arm_length(resolved, result.projection_distance)

    if resolved.reticle_shape == "bullseye":
        radii = sorted({max(1, round(arm / 3)), max(1, round(2 * arm / 3)), max(1, arm)})
        _draw_rings(out, cu, cv, radii, resolved.line_thickness, resolved.arm_color)
    else:
        _draw_crosshair(out, cu, cv, arm, resolved.line_thickness, resolved.arm_color)
    _draw_disc(out, cu, cv, resolved.dot_radius, resolved.dot_color)
    return out, False


def render_fixed(
    image: np.ndarray,
    depth: np.ndarray,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    gripper: GripperState,
    cfg: MarchConfig = MarchConfig(),
    style: RenderStyle = RenderStyle(),
    grasp_detected: bool | None = None,
) -> np.ndarray:
    """Overlay a shooting line on a fixed-camera frame.

    Returns a new image; the input is untouched. If the end-effector
    projection fails the visibility test the copy comes back unchanged.
    """
    out, _ = _render_fixed(
        image, depth, extr, intr, gripper, cfg, style,
        bool(grasp_detected) if grasp_detected is not None else False,
    )
    return out


def render_wrist(
    image: np.ndarray,
    depth: np.ndarray,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    gripper: GripperState,
    cfg: MarchConfig = MarchConfig(),
    style: RenderStyle = RenderStyle(),
    grasp_detected: bool | None = None,
) -> np.ndarray:
    """Overlay a distance-modulated reticle on a wrist-camera frame.

    Returns a new image; the input is untouched. Only a behind-camera
    end-effector suppresses the overlay.
    """
    out, _ = _render_wrist(image, depth, extr, intr, gripper, cfg, style, grasp_detected)
    return out
