"""Episode ingestion and emission.

An episode is a directory with a `manifest.json` and the RGB/depth PNGs it
references. RGB files are 8-bit PNG; depth files are 16-bit grayscale PNG in
millimeters with 0 marking invalid pixels. All image paths in the manifest
are relative to the episode directory.

Manifest schema (field names are a wire contract):

    {
      "version": 1,
      "cameras": [
        {"id": "front", "role": "fixed",
         "intrinsics": {"fx", "fy", "cx", "cy", "width", "height"},
         "extrinsics": [16 row-major floats]},
        {"id": "wrist", "role": "wrist",
         "intrinsics": {...},
         "hand_eye": [16 row-major floats]}
      ],
      "frames": [
        {"images": {"<camera_id>": {"rgb": "...", "depth": "..."}},
         "ee": {"pos": [x, y, z], "quat": [w, x, y, z]},
         "gripper_open": true,
         "gripper_width": 0.08,        # optional
         "t": 0.0}
      ]
    }

Extrinsics map world to camera coordinates. Wrist cameras never store
per-frame extrinsics; they are recomputed from each frame's end-effector pose
and the camera's fixed hand-eye transform.
"""

from __future__ import annotations

import json
import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FrameError, ManifestError, ValidationError
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    compute_wrist_extrinsics,
    rotation_is_rigid,
)
from .overlay import (
    GripperState,
    RenderStyle,
    _render_fixed,
    _render_wrist,
    grasp_sense,
    randomize_cue,
)
from .raymarch import MarchConfig
from .synthscene import (
    GROUND_TRUTH_NAME,
    Scene,
    SceneCamera,
    Trajectory,
    ground_truth_record,
    ray_cast_depth,
    render_scene_rgb,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
DEPTH_SCALE = 1000.0  # stored millimeters per metric meter

ROLES = ("fixed", "wrist")


# --- PNG encode/decode -------------------------------------------------------


def read_rgb_png(path) -> np.ndarray:
    """Decode an 8-bit RGB PNG into a (H, W, 3) uint8 array."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError as exc:
        raise FrameError(f"missing RGB file '{path}'", path) from exc
    except (OSError, UnidentifiedImageError) as exc:
        raise FrameError(f"cannot decode RGB file '{path}': {exc}", path) from exc


def write_rgb_png(path, image: np.ndarray) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def read_depth_png(path) -> np.ndarray:
    """Decode a 16-bit millimeter PNG into metric depths (float64, meters)."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im)
    except FileNotFoundError as exc:
        raise FrameError(f"missing depth file '{path}'", path) from exc
    except (OSError, UnidentifiedImageError) as exc:
        raise FrameError(f"cannot decode depth file '{path}': {exc}", path) from exc
    if arr.ndim != 2:
        raise FrameError(f"depth file '{path}' is not single-channel", path)
    return arr.astype(np.float64) / DEPTH_SCALE


def write_depth_png(path, depth_m: np.ndarray) -> None:
    """Encode metric depths as 16-bit millimeters; non-finite values become 0."""
    mm = np.asarray(depth_m, dtype=np.float64) * DEPTH_SCALE
    mm = np.nan_to_num(mm, nan=0.0, posinf=0.0, neginf=0.0)
    mm = np.clip(np.round(mm), 0, np.iinfo(np.uint16).max).astype(np.uint16)
    Image.fromarray(mm).save(path, format="PNG")


# --- manifest schema ---------------------------------------------------------


@dataclass(frozen=True)
class FrameImage:
    rgb: str
    depth: str


@dataclass(frozen=True)
class CameraSpec:
    """One camera declaration: fixed cameras carry extrinsics, wrist cameras a
    hand-eye transform (both 16 row-major floats; rigidity is checked at
    resolve time so `validate` can report corrupt values instead of crashing)."""

    id: str
    role: str
    intrinsics: CameraIntrinsics
    extrinsics: tuple[float, ...] | None = None
    hand_eye: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"camera '{self.id}': role must be one of {ROLES}, got '{self.role}'")
        if self.role == "fixed" and (self.extrinsics is None or len(self.extrinsics) != 16):
            raise ValidationError(f"camera '{self.id}': fixed cameras need 16 extrinsics floats")
        if self.role == "wrist" and (self.hand_eye is None or len(self.hand_eye) != 16):
            raise ValidationError(f"camera '{self.id}': wrist cameras need 16 hand_eye floats")

    def extrinsics_matrix(self) -> CameraExtrinsics:
        return CameraExtrinsics(np.asarray(self.extrinsics, dtype=np.float64).reshape(4, 4))

    def hand_eye_matrix(self) -> np.ndarray:
        return np.asarray(self.hand_eye, dtype=np.float64).reshape(4, 4)


@dataclass(frozen=True)
class FrameRecord:
    images: dict[str, FrameImage]
    ee_pos: tuple[float, float, float]
    ee_quat: tuple[float, float, float, float]
    gripper_open: bool
    gripper_width: float | None
    t: float


@dataclass(frozen=True)
class EpisodeManifest:
    version: int
    cameras: tuple[CameraSpec, ...]
    frames: tuple[FrameRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "cameras", tuple(self.cameras))
        object.__setattr__(self, "frames", tuple(self.frames))
        ids = [c.id for c in self.cameras]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate camera ids: {ids}")
        if not ids:
            raise ValidationError("manifest declares no cameras")
        for i, frame in enumerate(self.frames):
            if set(frame.images) != set(ids):
                raise ValidationError(
                    f"frame {i} references cameras {sorted(frame.images)} "
                    f"but the manifest declares {sorted(ids)}"
                )

    def camera(self, camera_id: str) -> CameraSpec:
        for cam in self.cameras:
            if cam.id == camera_id:
                return cam
        raise KeyError(camera_id)


def manifest_to_dict(manifest: EpisodeManifest) -> dict:
    cameras = []
    for cam in manifest.cameras:
        intr = cam.intrinsics
        entry = {
            "id": cam.id,
            "role": cam.role,
            "intrinsics": {
                "fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
                "width": intr.width, "height": intr.height,
            },
        }
        if cam.role == "fixed":
            entry["extrinsics"] = list(cam.extrinsics)
        else:
            entry["hand_eye"] = list(cam.hand_eye)
        cameras.append(entry)
    frames = []
    for frame in manifest.frames:
        entry = {
            "images": {cid: {"rgb": im.rgb, "depth": im.depth} for cid, im in frame.images.items()},
            "ee": {"pos": list(frame.ee_pos), "quat": list(frame.ee_quat)},
            "gripper_open": frame.gripper_open,
            "t": frame.t,
        }
        if frame.gripper_width is not None:
            entry["gripper_width"] = frame.gripper_width
        frames.append(entry)
    return {"version": manifest.version, "cameras": cameras, "frames": frames}


def _floats_field(obj, key: str, count: int, where: str) -> tuple[float, ...]:
    value = obj.get(key)
    if not isinstance(value, (list, tuple)) or len(value) != count:
        raise ManifestError(f"{where}: '{key}' must be a list of {count} numbers")
    try:
        return tuple(float(x) for x in value)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"{where}: '{key}' must contain numbers") from exc


def manifest_from_dict(data: dict, source=None) -> EpisodeManifest:
    where = str(source) if source is not None else "manifest"
    if not isinstance(data, dict):
        raise ManifestError(f"{where}: manifest must be a JSON object", source)
    version = data.get("version")
    if not isinstance(version, int):
        raise ManifestError(f"{where}: 'version' must be an integer", source)

    cameras = []
    raw_cameras = data.get("cameras")
    if not isinstance(raw_cameras, list):
        raise ManifestError(f"{where}: 'cameras' must be a list", source)
    for entry in raw_cameras:
        if not isinstance(entry, dict) or "id" not in entry or "role" not in entry:
            raise ManifestError(f"{where}: each camera needs 'id' and 'role'", source)
        cam_where = f"{where}: camera '{entry['id']}'"
        intr_raw = entry.get("intrinsics")
        if not isinstance(intr_raw, dict):
            raise ManifestError(f"{cam_where}: missing 'intrinsics'", source)
        try:
            intr = CameraIntrinsics(
                fx=float(intr_raw["fx"]), fy=float(intr_raw["fy"]),
                cx=float(intr_raw["cx"]), cy=float(intr_raw["cy"]),
                width=int(intr_raw["width"]), height=int(intr_raw["height"]),
            )
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ManifestError(f"{cam_where}: bad intrinsics ({exc})", source) from exc
        role = entry["role"]
        try:
            if role == "fixed":
                cameras.append(CameraSpec(
                    id=str(entry["id"]), role="fixed", intrinsics=intr,
                    extrinsics=_floats_field(entry, "extrinsics", 16, cam_where),
                ))
            elif role == "wrist":
                cameras.append(CameraSpec(
                    id=str(entry["id"]), role="wrist", intrinsics=intr,
                    hand_eye=_floats_field(entry, "hand_eye", 16, cam_where),
                ))
            else:
                raise ManifestError(f"{cam_where}: unknown role '{role}'", source)
        except ValidationError as exc:
            raise ManifestError(f"{cam_where}: {exc}", source) from exc

    frames = []
    raw_frames = data.get("frames")
    if not isinstance(raw_frames, list):
        raise ManifestError(f"{where}: 'frames' must be a list", source)
    for i, entry in enumerate(raw_frames):
        frame_where = f"{where}: frame {i}"
        if not isinstance(entry, dict):
            raise ManifestError(f"{frame_where}: must be an object", source)
        raw_images = entry.get("images")
        if not isinstance(raw_images, dict):
            raise ManifestError(f"{frame_where}: missing 'images'", source)
        images = {}
        for cid, paths in raw_images.items():
            if not isinstance(paths, dict) or "rgb" not in paths or "depth" not in paths:
                raise ManifestError(f"{frame_where}: camera '{cid}' needs 'rgb' and 'depth' paths", source)
            for key in ("rgb", "depth"):
                if os.path.isabs(paths[key]):
                    raise ManifestError(
                        f"{frame_where}: '{paths[key]}' must be relative to the episode directory", source
                    )
            images[str(cid)] = FrameImage(rgb=str(paths["rgb"]), depth=str(paths["depth"]))
        ee = entry.get("ee")
        if not isinstance(ee, dict):
            raise ManifestError(f"{frame_where}: missing 'ee'", source)
        pos = _floats_field(ee, "pos", 3, frame_where)
        quat = _floats_field(ee, "quat", 4, frame_where)
        if "gripper_open" not in entry or not isinstance(entry["gripper_open"], bool):
            raise ManifestError(f"{frame_where}: 'gripper_open' must be a boolean", source)
        width = entry.get("gripper_width")
        if width is not None:
            width = float(width)
        try:
            timestamp = float(entry["t"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{frame_where}: 't' must be a number", source) from exc
        frames.append(FrameRecord(
            images=images, ee_pos=pos, ee_quat=quat,
            gripper_open=entry["gripper_open"], gripper_width=width, t=timestamp,
        ))

    try:
        return EpisodeManifest(version=version, cameras=tuple(cameras), frames=tuple(frames))
    except ValidationError as exc:
        raise ManifestError(f"{where}: {exc}", source) from exc


def save_manifest(manifest: EpisodeManifest, path) -> None:
    path = Path(path)
    path.write_text(json.dumps(manifest_to_dict(manifest), indent=2) + "\n", encoding="utf-8")


def load_manifest(path) -> EpisodeManifest:
    """Parse and schema-check a manifest; no filesystem checks beyond the file itself."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ManifestError(f"manifest not found at '{path}'", path) from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest '{path}': {exc}", path) from exc
    return manifest_from_dict(data, source=path)


# --- loaded episodes ---------------------------------------------------------


@dataclass(frozen=True)
class CameraFrame:
    """One camera's decoded images with its resolved world-to-camera extrinsics."""

    spec: CameraSpec
    rgb: np.ndarray
    depth: np.ndarray
    extrinsics: CameraExtrinsics


@dataclass(frozen=True)
class FrameBundle:
    index: int
    cameras: dict[str, CameraFrame]
    gripper: GripperState
    timestamp: float


@dataclass(frozen=True)
class Episode:
    root: Path
    manifest: EpisodeManifest

    def frame_count(self) -> int:
        return len(self.manifest.frames)

    def load_frame(self, index: int) -> FrameBundle:
        rec = self.manifest.frames[index]
        pose = Pose(position=rec.ee_pos, orientation=rec.ee_quat)
        gripper = GripperState(pose=pose, open=rec.gripper_open, width=rec.gripper_width)
        cameras = {}
        for cam in self.manifest.cameras:
            paths = rec.images[cam.id]
            rgb = read_rgb_png(self.root / paths.rgb)
            depth = read_depth_png(self.root / paths.depth)
            intr = cam.intrinsics
            if rgb.shape[:2] != depth.shape:
                raise ValidationError(
                    f"frame {index} camera '{cam.id}': RGB is {rgb.shape[1]}x{rgb.shape[0]} "
                    f"but depth is {depth.shape[1]}x{depth.shape[0]}"
                )
            if depth.shape != (intr.height, intr.width):
                raise ValidationError(
                    f"frame {index} camera '{cam.id}': images are {depth.shape[1]}x{depth.shape[0]} "
                    f"but intrinsics expect {intr.width}x{intr.height}"
                )
            if cam.role == "fixed":
                extr = cam.extrinsics_matrix()
            else:
                extr = compute_wrist_extrinsics(pose, cam.hand_eye_matrix())
            cameras[cam.id] = CameraFrame(spec=cam, rgb=rgb, depth=depth, extrinsics=extr)
        return FrameBundle(index=index, cameras=cameras, gripper=gripper, timestamp=rec.t)

    def iter_frames(self) -> Iterator[FrameBundle]:
        for i in range(self.frame_count()):
            yield self.load_frame(i)


def load_episode(path) -> Episode:
    """Load and validate an episode directory; every referenced file must exist."""
    root = Path(path)
    manifest = load_manifest(root / MANIFEST_NAME)
    for i, frame in enumerate(manifest.frames):
        for cid, paths in frame.images.items():
            for rel in (paths.rgb, paths.depth):
                if not (root / rel).is_file():
                    raise FrameError(f"frame {i} camera '{cid}': missing file '{rel}'", root / rel)
    return Episode(root=root, manifest=manifest)


# --- rendering pipeline --------------------------------------------------------


def compute_grasp_detected(bundle: FrameBundle, style: RenderStyle) -> bool:
    """Grasp detection for the grasp_sense variant, from the first wrist camera."""
    if style.variant != "grasp_sense":
        return False
    for cam_frame in bundle.cameras.values():
        if cam_frame.spec.role == "wrist":
            return grasp_sense(cam_frame.depth, cam_frame.spec.intrinsics, bundle.gripper)
    return False


def render_camera_view(
    bundle: FrameBundle,
    camera_id: str,
    cfg: MarchConfig,
    style: RenderStyle,
    grasp_detected: bool | None = None,
) -> tuple[np.ndarray, bool]:
    """Render one camera of a frame; returns (image, early_returned).

    This is the single dispatch point used by both `augment` and
    `render-frame`, so their outputs are byte-identical.
    """
    cam_frame = bundle.cameras[camera_id]
    gripper = bundle.gripper
    if style.variant == "randomized":
        gripper = randomize_cue(gripper, style, frame_index=bundle.index, camera_id=camera_id)
    if grasp_detected is None:
        grasp_detected = compute_grasp_detected(bundle, style)
    if cam_frame.spec.role == "fixed":
        return _render_fixed(
            cam_frame.rgb, cam_frame.depth, cam_frame.extrinsics,
            cam_frame.spec.intrinsics, gripper, cfg, style, grasp_detected,
        )
    return _render_wrist(
        cam_frame.rgb, cam_frame.depth, cam_frame.extrinsics,
        cam_frame.spec.intrinsics, gripper, cfg, style, grasp_detected,
    )


@dataclass
class AugmentSummary:
    """Outcome of one augmentation run."""

    frames: int
    images: int
    early_returns: dict[str, int]
    frame_errors: list[str]
    wall_time_s: float
    frame_render_s: list[float] = field(default_factory=list)

    def one_line(self) -> str:
        early = ", ".join(f"{cid}={n}" for cid, n in sorted(self.early_returns.items()) if n)
        extras = f" (early returns: {early})" if early else ""
        return (
            f"augmented {self.frames} frames / {self.images} images in "
            f"{self.wall_time_s:.2f}s{extras}"
        )


def _passthrough_frame(episode: Episode, index: int, out_root: Path) -> None:
    rec = episode.manifest.frames[index]
    for paths in rec.images.values():
        for rel in (paths.rgb, paths.depth):
            dst = out_root / rel
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(episode.root / rel, dst)


def _augment_frame(
    episode: Episode,
    index: int,
    cfg: MarchConfig,
    style: RenderStyle,
    out_root: Path,
):
    """Worker for one frame; returns (early-per-camera, errors, render seconds)."""
    try:
        bundle = episode.load_frame(index)
        grasp_detected = compute_grasp_detected(bundle, style)
    except ValidationError as exc:
        _passthrough_frame(episode, index, out_root)
        return {}, [f"frame {index}: {exc}"], 0.0

    rec = episode.manifest.frames[index]
    early: dict[str, int] = {}
    errors: list[str] = []
    render_s = 0.0
    for cam in episode.manifest.cameras:
        paths = rec.images[cam.id]
        t0 = time.perf_counter()
        try:
            image, was_early = render_camera_view(bundle, cam.id, cfg, style, grasp_detected)
        except ValidationError as exc:
            errors.append(f"frame {index} camera '{cam.id}': {exc}")
            image, was_early = bundle.cameras[cam.id].rgb, False
        render_s += time.perf_counter() - t0
        if was_early:
            early[cam.id] = early.get(cam.id, 0) + 1

        rgb_dst = out_root / paths.rgb
        rgb_dst.parent.mkdir(parents=True, exist_ok=True)
        write_rgb_png(rgb_dst, image)
        depth_dst = out_root / paths.depth
        depth_dst.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(episode.root / paths.depth, depth_dst)
    return early, errors, render_s


def augment_episode(
    episode: Episode,
    cfg: MarchConfig,
    style: RenderStyle,
    out_dir,
    jobs: int = 1,
) -> AugmentSummary:
    """Render guidance onto every frame/camera of an episode.

    Augmented RGB PNGs mirror the input layout under out_dir, depth files are
    copied verbatim, and a copy of the manifest is written alongside. The
    input episode is never modified. Frames are independent work units;
    `jobs` > 1 renders them in a thread pool with scheduling-independent
    output bytes.
    """
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    n = episode.frame_count()
    started = time.perf_counter()
    if jobs == 1:
        outcomes = [_augment_frame(episode, i, cfg, style, out_root) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_augment_frame, episode, i, cfg, style, out_root) for i in range(n)]
            outcomes = [f.result() for f in futures]
    wall = time.perf_counter() - started

    shutil.copyfile(episode.root / MANIFEST_NAME, out_root / MANIFEST_NAME)

    early_totals: dict[str, int] = {cam.id: 0 for cam in episode.manifest.cameras}
    errors: list[str] = []
    render_times: list[float] = []
    for early, errs, render_s in outcomes:
        for cid, count in early.items():
            early_totals[cid] += count
        errors.extend(errs)
        render_times.append(render_s)
    return AugmentSummary(
        frames=n,
        images=n * len(episode.manifest.cameras),
        early_returns=early_totals,
        frame_errors=errors,
        wall_time_s=wall,
        frame_render_s=render_times,
    )


# --- synthetic episode emission ----------------------------------------------


def synthesize_episode(
    scene: Scene,
    cameras: list[SceneCamera],
    trajectory: Trajectory,
    n_frames: int,
    out_dir,
    max_length: float = MarchConfig().max_length,
) -> Episode:
    """Write a complete synthetic episode plus its analytic ground truth.

    Emits RGB/depth PNGs per frame and camera, a manifest, and a
    `ground_truth.jsonl` sidecar with one record per frame/camera holding the
    analytic stop point (capped at max_length), its pixel, and the
    end-effector pixel.
    """
    if n_frames < 1:
        raise ValidationError(f"n_frames must be >= 1, got {n_frames}")
    if not cameras:
        raise ValidationError("scene file declares no cameras")
    out_root = Path(out_dir)

    specs = []
    for cam in cameras:
        if cam.role == "fixed":
            specs.append(CameraSpec(
                id=cam.id, role="fixed", intrinsics=cam.intrinsics,
                extrinsics=tuple(float(x) for x in cam.extrinsics.matrix.ravel()),
            ))
        else:
            specs.append(CameraSpec(
                id=cam.id, role="wrist", intrinsics=cam.intrinsics, hand_eye=cam.hand_eye,
            ))
        (out_root / "images" / cam.id).mkdir(parents=True, exist_ok=True)

    frames = []
    gt_lines = []
    for i in range(n_frames):
        pose = trajectory.pose_at(i, n_frames)
        images = {}
        for spec in specs:
            if spec.role == "fixed":
                extr = spec.extrinsics_matrix()
            else:
                extr = compute_wrist_extrinsics(pose, spec.hand_eye_matrix())
            depth = ray_cast_depth(scene, extr, spec.intrinsics)
            rgb = render_scene_rgb(scene, extr, spec.intrinsics)
            rel_rgb = f"images/{spec.id}/rgb_{i:06d}.png"
            rel_depth = f"images/{spec.id}/depth_{i:06d}.png"
            write_rgb_png(out_root / rel_rgb, rgb)
            write_depth_png(out_root / rel_depth, depth)
            images[spec.id] = FrameImage(rgb=rel_rgb, depth=rel_depth)
            gt_lines.append(json.dumps(ground_truth_record(
                scene, pose, spec.id, extr, spec.intrinsics, i, max_length,
            )))
        frames.append(FrameRecord(
            images=images,
            ee_pos=tuple(float(x) for x in pose.position),
            ee_quat=tuple(float(x) for x in pose.orientation),
            gripper_open=trajectory.open_at(i),
            gripper_width=trajectory.width,
            t=i * trajectory.dt,
        ))

    manifest = EpisodeManifest(version=MANIFEST_VERSION, cameras=tuple(specs), frames=tuple(frames))
    save_manifest(manifest, out_root / MANIFEST_NAME)
    (out_root / GROUND_TRUTH_NAME).write_text("\n".join(gt_lines) + "\n", encoding="utf-8")
    return Episode(root=out_root, manifest=manifest)


# --- validation ----------------------------------------------------------------


def validate_episode(path) -> list[str]:
    """Collect manifest/file/geometry violations for an episode directory."""
    root = Path(path)
    try:
        manifest = load_manifest(root / MANIFEST_NAME)
    except ManifestError as exc:
        return [str(exc)]

    violations: list[str] = []
    for cam in manifest.cameras:
        raw = cam.extrinsics if cam.role == "fixed" else cam.hand_eye
        kind = "extrinsics" if cam.role == "fixed" else "hand_eye"
        matrix = np.asarray(raw, dtype=np.float64).reshape(4, 4)
        if not np.array_equal(matrix[3], [0.0, 0.0, 0.0, 1.0]) or not rotation_is_rigid(matrix):
            violations.append(f"camera '{cam.id}': {kind} is not a rigid world transform")

    for i, frame in enumerate(manifest.frames):
        quat = np.asarray(frame.ee_quat, dtype=np.float64)
        if abs(np.linalg.norm(quat) - 1.0) > 1e-6:
            violations.append(f"frame {i}: ee quaternion is not unit length")
        for cid, paths in frame.images.items():
            intr = manifest.camera(cid).intrinsics
            sizes = {}
            for kind, rel in (("rgb", paths.rgb), ("depth", paths.depth)):
                full = root / rel
                if not full.is_file():
                    violations.append(f"frame {i} camera '{cid}': missing {kind} file '{rel}'")
                    continue
                try:
                    arr = read_rgb_png(full) if kind == "rgb" else read_depth_png(full)
                except FrameError as exc:
                    violations.append(str(exc))
                    continue
                sizes[kind] = arr.shape[:2]
            if "rgb" in sizes and "depth" in sizes and sizes["rgb"] != sizes["depth"]:
                violations.append(f"frame {i} camera '{cid}': RGB/depth size mismatch")
            for kind, shape in sizes.items():
                if shape != (intr.height, intr.width):
                    violations.append(
                        f"frame {i} camera '{cid}': {kind} is {shape[1]}x{shape[0]} "
                        f"but intrinsics expect {intr.width}x{intr.height}"
                    )
    return violations
