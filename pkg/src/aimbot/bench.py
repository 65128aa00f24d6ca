"""Micro-timing for the augmentation hot path, plus the reference workload.

The reference workload is one frame bundle with a 256x256 fixed view and a
256x256 wrist view over a simple tabletop scene, rendered with the default
style. Timing covers pure augmentation compute only; PNG encode/decode is
measured separately by the bench command.
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .dataset import (
    CameraFrame,
    CameraSpec,
    FrameBundle,
    compute_grasp_detected,
    render_camera_view,
)
from .geometry import Pose, compute_wrist_extrinsics, look_at_extrinsics, CameraIntrinsics
from .overlay import GripperState, RenderStyle
from .raymarch import MarchConfig
from .synthscene import Box, Plane, Scene, ray_cast_depth, render_scene_rgb

WARMUP_ITERS = 10
MIN_SAMPLES = 100
MIN_ITERS = WARMUP_ITERS + MIN_SAMPLES


def hardware_descriptor() -> str:
    return f"{platform.platform()} {platform.machine()} ({platform.processor() or 'unknown cpu'})"


def build_descriptor() -> str:
    return f"{platform.python_implementation().lower()}-{platform.python_version()} numpy-{np.__version__}"


@dataclass
class LatencyReport:
    """Raw latency samples for one workload; percentiles are derived views."""

    workload: dict
    warmup: int
    bundle_samples_ns: list[int]
    image_samples_ns: list[int]
    hardware: str
    build: str

    def percentiles_ms(self, which: str = "image") -> dict[str, float]:
        samples = self.image_samples_ns if which == "image" else self.bundle_samples_ns
        p50, p95, p99 = np.percentile(np.asarray(samples, dtype=np.float64), [50, 95, 99])
        return {"p50": float(p50) / 1e6, "p95": float(p95) / 1e6, "p99": float(p99) / 1e6}

    def to_json_line(self) -> str:
        return json.dumps({
            "kind": "latency",
            "workload": self.workload,
            "warmup": self.warmup,
            "per_image_ms": self.percentiles_ms("image"),
            "per_bundle_ms": self.percentiles_ms("bundle"),
            "bundle_samples_ns": self.bundle_samples_ns,
            "image_samples_ns": self.image_samples_ns,
            "hardware": self.hardware,
            "build": self.build,
        })

    @classmethod
    def from_json_line(cls, line: str) -> "LatencyReport":
        data = json.loads(line)
        return cls(
            workload=data["workload"],
            warmup=data["warmup"],
            bundle_samples_ns=list(data["bundle_samples_ns"]),
            image_samples_ns=list(data["image_samples_ns"]),
            hardware=data["hardware"],
            build=data["build"],
        )


def time_augment(
    frame: FrameBundle,
    cfg: MarchConfig,
    style: RenderStyle,
    iters: int = MIN_ITERS,
) -> LatencyReport:
    """Time full frame-bundle augmentation (all cameras), excluding disk I/O.

    Runs `iters` iterations on a monotonic clock; the first WARMUP_ITERS are
    discarded, so iters must be at least WARMUP_ITERS + MIN_SAMPLES.
    """
    if iters < MIN_ITERS:
        raise ValidationError(f"iters must be >= {MIN_ITERS} (warm-up + samples), got {iters}")
    camera_ids = list(frame.cameras)
    bundle_ns: list[int] = []
    image_ns: list[int] = []
    for it in range(iters):
        record = it >= WARMUP_ITERS
        t_bundle = time.perf_counter_ns()
        grasp = compute_grasp_detected(frame, style)
        for cid in camera_ids:
            t0 = time.perf_counter_ns()
            render_camera_view(frame, cid, cfg, style, grasp)
            t1 = time.perf_counter_ns()
            if record:
                image_ns.append(t1 - t0)
        if record:
            bundle_ns.append(time.perf_counter_ns() - t_bundle)

    workload = {
        "cameras": [
            {
                "id": cid,
                "role": frame.cameras[cid].spec.role,
                "width": frame.cameras[cid].spec.intrinsics.width,
                "height": frame.cameras[cid].spec.intrinsics.height,
            }
            for cid in camera_ids
        ],
        "style": style.variant,
        "step_delta": cfg.step_delta,
        "tolerance": cfg.tolerance,
        "max_length": cfg.max_length,
        "epsilon": cfg.epsilon,
    }
    return LatencyReport(
        workload=workload,
        warmup=WARMUP_ITERS,
        bundle_samples_ns=bundle_ns,
        image_samples_ns=image_ns,
        hardware=hardware_descriptor(),
        build=build_descriptor(),
    )


def reference_scene() -> Scene:
    return Scene(primitives=(
        Plane(normal=(0.0, 0.0, 1.0), offset=0.0),
        Box(min_corner=(0.10, -0.08, 0.0), max_corner=(0.26, 0.08, 0.12)),
    ))


def reference_bundle(width: int = 256, height: int = 256) -> FrameBundle:
    """In-memory frame bundle: one fixed and one wrist view of a tabletop scene."""
    scene = reference_scene()
    pose = Pose(position=(0.0, 0.0, 0.45), orientation=(1.0, 0.0, 0.0, 0.0))
    gripper = GripperState(pose=pose, open=True)

    focal = width * 1.05
    intr = CameraIntrinsics(fx=focal, fy=focal, cx=width / 2, cy=height / 2,
                            width=width, height=height)

    fixed_extr = look_at_extrinsics(eye=(0.0, -0.85, 0.65), target=(0.0, 0.0, 0.1))
    hand_eye = np.eye(4)
    hand_eye[:3, 3] = (0.0, 0.0, -0.08)
    wrist_extr = compute_wrist_extrinsics(pose, hand_eye)

    cameras = {}
    for cid, role, extr, spec_extra in (
        ("front", "fixed", fixed_extr, {"extrinsics": tuple(fixed_extr.matrix.ravel())}),
        ("wrist", "wrist", wrist_extr, {"hand_eye": tuple(hand_eye.ravel())}),
    ):
        depth = ray_cast_depth(scene, extr, intr)
        rgb = render_scene_rgb(scene, extr, intr)
        spec = CameraSpec(id=cid, role=role, intrinsics=intr, **spec_extra)
        cameras[cid] = CameraFrame(spec=spec, rgb=rgb, depth=depth, extrinsics=extr)
    return FrameBundle(index=0, cameras=cameras, gripper=gripper, timestamp=0.0)
