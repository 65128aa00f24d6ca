"""Analytic RGB-D scene generation and exact ray-surface intersection.

Scenes are a handful of primitives (planes, spheres, axis-aligned boxes) that
can be ray-cast into depth images (camera-frame z-depth, 0 where nothing is
hit) and flat-shaded RGB frames, and intersected in closed form. This is the
geometric oracle the march and render code is tested against, and the backing
for the `synth` CLI command.

Scene file format (one directive per line, '#' comments):

    plane normal 0 0 1 offset 0.0
    sphere center 0.2 0.0 0.05 radius 0.06
    box min -0.3 -0.2 0.0 max -0.1 -0.05 0.12
    camera id front role fixed fx 260 fy 260 cx 128 cy 128 width 256 height 256 \
        pos 0.0 -0.9 0.7 lookat 0 0 0.1 up 0 0 1
    camera id wrist role wrist fx 200 fy 200 cx 128 cy 128 width 256 height 256 \
        offset 0 0 -0.08

Wrist cameras sit at a gripper-frame `offset` looking along the gripper
z-axis (identity hand-eye rotation).

Trajectory file format:

    start pos 0 0 0.5 quat 1 0 0 0
    end pos 0 0 0.1 quat 1 0 0 0
    gripper close_at 10        # or: gripper open / gripper closed
    width 0.08                 # optional constant finger width
    dt 0.0667                  # optional seconds per frame
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SceneFileError, ValidationError
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    look_at_extrinsics,
    project_points,
    quat_slerp,
    quat_to_direction,
)

_T_MIN = 1e-9

GROUND_TRUTH_NAME = "ground_truth.jsonl"


@dataclass(frozen=True)
class Plane:
    """Infinite plane: points x with normal . x = offset."""

    normal: tuple[float, float, float]
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        if abs(np.linalg.norm(n) - 1.0) > 1e-6:
            raise ValidationError(f"plane normal must be unit length, got {self.normal}")


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError(f"sphere radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box spanning min_corner..max_corner."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=np.float64)
        hi = np.asarray(self.max_corner, dtype=np.float64)
        if not np.all(lo < hi):
            raise ValidationError(f"box min corner must be < max corner per axis, got {self.min_corner}, {self.max_corner}")


Primitive = Plane | Sphere | Box


@dataclass(frozen=True)
class Scene:
    primitives: tuple[Primitive, ...]

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))


def _plane_t(plane: Plane, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    n = np.asarray(plane.normal, dtype=np.float64)
    denom = dirs @ n
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (plane.offset - origin @ n) / denom
    t = np.where((np.abs(denom) > 1e-12) & (t > _T_MIN), t, np.inf)
    return t


def _sphere_t(sphere: Sphere, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    oc = origin - np.asarray(sphere.center, dtype=np.float64)
    b = dirs @ oc
    c = oc @ oc - sphere.radius**2
    disc = b * b - c
    with np.errstate(invalid="ignore"):
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    near = -b - root
    far = -b + root
    t = np.where(near > _T_MIN, near, far)
    t = np.where((disc >= 0) & (t > _T_MIN), t, np.inf)
    return t


def _box_t(box: Box, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    lo = np.asarray(box.min_corner, dtype=np.float64)
    hi = np.asarray(box.max_corner, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - origin) / dirs
        t2 = (hi - origin) / dirs
    tnear = np.nanmax(np.minimum(t1, t2), axis=-1)
    tfar = np.nanmin(np.maximum(t1, t2), axis=-1)
    hit = (tnear <= tfar) & (tfar > _T_MIN)
    t = np.where(tnear > _T_MIN, tnear, tfar)
    return np.where(hit & (t > _T_MIN), t, np.inf)


def _primitive_t(prim: Primitive, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    if isinstance(prim, Plane):
        return _plane_t(prim, origin, dirs)
    if isinstance(prim, Sphere):
        return _sphere_t(prim, origin, dirs)
    return _box_t(prim, origin, dirs)


def scene_ray_t(scene: Scene, origin: np.ndarray, dirs: np.ndarray):
    """Nearest positive hit parameter per ray; (t, primitive index), inf/-1 on miss."""
    dirs = np.asarray(dirs, dtype=np.float64)
    n_rays = dirs.shape[0]
    if not scene.primitives:
        return np.full(n_rays, np.inf), np.full(n_rays, -1, dtype=np.int64)
    ts = np.stack([_primitive_t(p, origin, dirs) for p in scene.primitives])
    which = np.argmin(ts, axis=0)
    best = ts[which, np.arange(n_rays)]
    which = np.where(np.isfinite(best), which, -1)
    return best, which


def analytic_intersection(scene: Scene, origin, direction):
    """Nearest positive-t ray-scene intersection, or None.

    direction must be unit length; returns (point, distance along the ray).
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-6:
        raise ValidationError("direction must be unit length")
    t, _ = scene_ray_t(scene, origin, direction[np.newaxis, :])
    if not np.isfinite(t[0]):
        return None
    distance = float(t[0])
    return origin + distance * direction, distance


def pixel_rays(extr: CameraExtrinsics, intr: CameraIntrinsics):
    """World-frame unit rays through every pixel center.

    Returns (origin (3,), dirs (H*W, 3), cos (H*W,)) where cos is the
    camera-frame z-component of each unit ray: z-depth = t * cos.
    """
    us = (np.arange(intr.width) + 0.5 - intr.cx) / intr.fx
    vs = (np.arange(intr.height) + 0.5 - intr.cy) / intr.fy
    uu, vv = np.meshgrid(us, vs)
    d_cam = np.stack([uu.ravel(), vv.ravel(), np.ones(uu.size)], axis=1)
    inv_norm = 1.0 / np.linalg.norm(d_cam, axis=1)
    d_cam *= inv_norm[:, np.newaxis]
    dirs = d_cam @ extr.rotation
    return extr.camera_center(), dirs, inv_norm


def ray_cast_depth(scene: Scene, extr: CameraExtrinsics, intr: CameraIntrinsics) -> np.ndarray:
    """Camera-frame z-depth image of the scene; 0 marks pixels with no hit."""
    origin, dirs, cos = pixel_rays(extr, intr)
    t, _ = scene_ray_t(scene, origin, dirs)
    depth = np.where(np.isfinite(t), t * cos, 0.0)
    return depth.reshape(intr.height, intr.width)


_PALETTE = (
    (204, 120, 92),
    (92, 140, 204),
    (120, 190, 120),
    (200, 180, 90),
    (160, 110, 190),
    (90, 180, 180),
)
_BACKGROUND = (55, 55, 55)
_LIGHT = np.array([0.30, 0.25, 0.92])
_LIGHT /= np.linalg.norm(_LIGHT)


def _hit_normals(prim: Primitive, points: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    if isinstance(prim, Plane):
        n = np.asarray(prim.normal, dtype=np.float64)
        flip = np.sign(dirs @ n)[:, np.newaxis]
        return np.where(flip > 0, -n, n)
    if isinstance(prim, Sphere):
        n = points - np.asarray(prim.center, dtype=np.float64)
        return n / np.linalg.norm(n, axis=1, keepdims=True)
    lo = np.asarray(prim.min_corner, dtype=np.float64)
    hi = np.asarray(prim.max_corner, dtype=np.float64)
    dist = np.minimum(np.abs(points - lo), np.abs(points - hi))
    axis = np.argmin(dist, axis=1)
    normals = np.zeros_like(points)
    rows = np.arange(points.shape[0])
    at_hi = np.abs(points[rows, axis] - hi[axis]) < np.abs(points[rows, axis] - lo[axis])
    normals[rows, axis] = np.where(at_hi, 1.0, -1.0)
    return normals


def render_scene_rgb(scene: Scene, extr: CameraExtrinsics, intr: CameraIntrinsics) -> np.ndarray:
    """Flat-shaded RGB render (single directional light, for inspection only)."""
    origin, dirs, _ = pixel_rays(extr, intr)
    t, which = scene_ray_t(scene, origin, dirs)
    out = np.empty((dirs.shape[0], 3), dtype=np.float64)
    out[:] = _BACKGROUND
    for i, prim in enumerate(scene.primitives):
        mask = which == i
        if not mask.any():
            continue
        pts = origin + t[mask, np.newaxis] * dirs[mask]
        normals = _hit_normals(prim, pts, dirs[mask])
        shade = 0.35 + 0.65 * np.clip(normals @ _LIGHT, 0.0, 1.0)
        base = np.asarray(_PALETTE[i % len(_PALETTE)], dtype=np.float64)
        out[mask] = shade[:, np.newaxis] * base
    return np.clip(out, 0, 255).astype(np.uint8).reshape(intr.height, intr.width, 3)


# --- scene and trajectory files ----------------------------------------------


@dataclass(frozen=True)
class SceneCamera:
    """Camera declared in a scene file."""

    id: str
    role: str
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics | None  # fixed cameras
    hand_eye: tuple[float, ...] | None   # wrist cameras, 16 row-major floats


def _floats(tokens: list[str], count: int, key: str, path, line_no: int) -> list[float]:
    if len(tokens) < count:
        raise SceneFileError(f"'{key}' expects {count} number(s)", path, line_no)
    try:
        return [float(tok) for tok in tokens[:count]]
    except ValueError as exc:
        raise SceneFileError(f"'{key}' expects numbers, got {tokens[:count]}", path, line_no) from exc


def _parse_fields(tokens: list[str], arity: dict[str, int], path, line_no: int) -> dict:
    """Parse `key v1 v2 ... key2 ...` token runs; arity 0 means one bare string."""
    out: dict[str, object] = {}
    i = 0
    while i < len(tokens):
        key = tokens[i]
        if key not in arity:
            raise SceneFileError(f"unknown field '{key}'", path, line_no)
        if key in out:
            raise SceneFileError(f"duplicate field '{key}'", path, line_no)
        n = arity[key]
        i += 1
        if n == 0:
            if i >= len(tokens):
                raise SceneFileError(f"'{key}' expects a value", path, line_no)
            out[key] = tokens[i]
            i += 1
        else:
            values = _floats(tokens[i:], n, key, path, line_no)
            out[key] = values[0] if n == 1 else tuple(values)
            i += n
    return out


def _require(fields: dict, keys: list[str], directive: str, path, line_no: int) -> None:
    missing = [k for k in keys if k not in fields]
    if missing:
        raise SceneFileError(f"'{directive}' is missing field(s) {missing}", path, line_no)


def _parse_camera(tokens: list[str], path, line_no: int) -> SceneCamera:
    arity = {
        "id": 0, "role": 0, "fx": 1, "fy": 1, "cx": 1, "cy": 1,
        "width": 1, "height": 1, "pos": 3, "lookat": 3, "up": 3, "offset": 3,
    }
    f = _parse_fields(tokens, arity, path, line_no)
    _require(f, ["id", "role", "fx", "fy", "cx", "cy", "width", "height"], "camera", path, line_no)
    try:
        intr = CameraIntrinsics(
            fx=f["fx"], fy=f["fy"], cx=f["cx"], cy=f["cy"],
            width=int(f["width"]), height=int(f["height"]),
        )
        if f["role"] == "fixed":
            _require(f, ["pos", "lookat"], "fixed camera", path, line_no)
            extr = look_at_extrinsics(f["pos"], f["lookat"], f.get("up", (0.0, 0.0, 1.0)))
            return SceneCamera(id=f["id"], role="fixed", intrinsics=intr, extrinsics=extr, hand_eye=None)
        if f["role"] == "wrist":
            _require(f, ["offset"], "wrist camera", path, line_no)
            he = np.eye(4)
            he[:3, 3] = f["offset"]
            return SceneCamera(id=f["id"], role="wrist", intrinsics=intr, extrinsics=None,
                               hand_eye=tuple(he.ravel()))
    except ValidationError as exc:
        raise SceneFileError(str(exc), path, line_no) from exc
    raise SceneFileError(f"camera role must be 'fixed' or 'wrist', got '{f['role']}'", path, line_no)


def load_scene(path) -> tuple[Scene, list[SceneCamera]]:
    """Parse a scene description file into primitives and cameras."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneFileError(f"cannot read scene file: {exc}", path) from exc

    primitives: list[Primitive] = []
    cameras: list[SceneCamera] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *tokens = line.split()
        try:
            if directive == "plane":
                f = _parse_fields(tokens, {"normal": 3, "offset": 1}, path, line_no)
                _require(f, ["normal", "offset"], "plane", path, line_no)
                n = np.asarray(f["normal"], dtype=np.float64)
                norm = np.linalg.norm(n)
                if norm < 1e-12:
                    raise SceneFileError("plane normal must be nonzero", path, line_no)
                primitives.append(Plane(normal=tuple(n / norm), offset=float(f["offset"]) / norm))
            elif directive == "sphere":
                f = _parse_fields(tokens, {"center": 3, "radius": 1}, path, line_no)
                _require(f, ["center", "radius"], "sphere", path, line_no)
                primitives.append(Sphere(center=f["center"], radius=f["radius"]))
            elif directive == "box":
                f = _parse_fields(tokens, {"min": 3, "max": 3}, path, line_no)
                _require(f, ["min", "max"], "box", path, line_no)
                primitives.append(Box(min_corner=f["min"], max_corner=f["max"]))
            elif directive == "camera":
                cameras.append(_parse_camera(tokens, path, line_no))
            else:
                raise SceneFileError(f"unknown directive '{directive}'", path, line_no)
        except ValidationError as exc:
            raise SceneFileError(str(exc), path, line_no) from exc
    ids = [c.id for c in cameras]
    if len(set(ids)) != len(ids):
        raise SceneFileError("duplicate camera ids", path)
    return Scene(primitives=tuple(primitives)), cameras


@dataclass(frozen=True)
class Trajectory:
    """Linear position / slerp orientation sweep with a gripper schedule."""

    start: Pose
    end: Pose
    close_at: int | None = None  # frame index at which the gripper closes
    width: float | None = None
    dt: float = 1.0 / 15.0

    def pose_at(self, index: int, n_frames: int) -> Pose:
        alpha = index / (n_frames - 1) if n_frames > 1 else 0.0
        position = (1 - alpha) * self.start.position + alpha * self.end.position
        orientation = quat_slerp(self.start.orientation, self.end.orientation, alpha)
        return Pose(position=position, orientation=orientation)

    def open_at(self, index: int) -> bool:
        return self.close_at is None or index < self.close_at


def load_trajectory(path) -> Trajectory:
    """Parse a trajectory file; see the module docstring for the format."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneFileError(f"cannot read trajectory file: {exc}", path) from exc

    start = end = None
    close_at: int | None = None
    width = None
    dt = 1.0 / 15.0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *tokens = line.split()
        if directive in ("start", "end"):
            f = _parse_fields(tokens, {"pos": 3, "quat": 4}, path, line_no)
            _require(f, ["pos", "quat"], directive, path, line_no)
            try:
                pose = Pose(position=f["pos"], orientation=f["quat"])
            except ValidationError as exc:
                raise SceneFileError(str(exc), path, line_no) from exc
            if directive == "start":
                start = pose
            else:
                end = pose
        elif directive == "gripper":
            if tokens[:1] == ["open"]:
                close_at = None
            elif tokens[:1] == ["closed"]:
                close_at = 0
            elif tokens[:1] == ["close_at"] and len(tokens) >= 2:
                close_at = int(_floats(tokens[1:], 1, "close_at", path, line_no)[0])
            else:
                raise SceneFileError("gripper expects 'open', 'closed', or 'close_at K'", path, line_no)
        elif directive == "width":
            width = _floats(tokens, 1, "width", path, line_no)[0]
        elif directive == "dt":
            dt = _floats(tokens, 1, "dt", path, line_no)[0]
            if dt <= 0:
                raise SceneFileError("dt must be > 0", path, line_no)
        else:
            raise SceneFileError(f"unknown directive '{directive}'", path, line_no)
    if start is None or end is None:
        raise SceneFileError("trajectory needs both 'start' and 'end' poses", path)
    return Trajectory(start=start, end=end, close_at=close_at, width=width, dt=dt)


def ground_truth_record(
    scene: Scene,
    pose: Pose,
    camera_id: str,
    extr: CameraExtrinsics,
    intr: CameraIntrinsics,
    frame: int,
    max_length: float,
) -> dict:
    """Analytic stop point for one frame/camera, capped at the march length."""
    direction = quat_to_direction(pose.orientation)
    hit = analytic_intersection(scene, pose.position, direction)
    if hit is not None and hit[1] <= max_length:
        point, distance = hit
        was_hit = True
    else:
        distance = max_length
        point = pose.position + max_length * direction
        was_hit = False
    su, sv, _ = project_points(point[np.newaxis, :], extr, intr)
    eu, ev, _ = project_points(pose.position[np.newaxis, :], extr, intr)
    return {
        "frame": frame,
        "camera": camera_id,
        "hit": was_hit,
        "stop_distance": float(distance),
        "stop_point": [float(x) for x in point],
        "stop_pixel": [int(su[0]), int(sv[0])],
        "ee_pixel": [int(eu[0]), int(ev[0])],
    }


def load_ground_truth(path) -> list[dict]:
    """Read a ground-truth sidecar written by the synth command."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
