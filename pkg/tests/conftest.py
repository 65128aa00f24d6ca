"""Shared builders: cameras, aimed poses, and randomized oracle triples.

The oracle-triple generator produces (scene, camera, end-effector pose)
configurations where the whole march corridor is provably visible: rays
descend steeply onto a plane, a sphere's top cap, or a box's top face, the
camera is near-nadir above the corridor, and a rejection loop re-samples any
triple whose corridor projects outside the image margin. Under those
constraints the marched stop point must agree with the closed-form
intersection to within (tolerance + 1) * step + epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from aimbot.geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    Pose,
    look_at_extrinsics,
    project_points,
)
from aimbot.raymarch import MarchConfig
from aimbot.synthscene import Box, Plane, Scene, Sphere, analytic_intersection


def quat_pointing(direction) -> tuple[float, float, float, float]:
    """A unit quaternion whose rotation takes (0, 0, 1) onto `direction`."""
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, d))
    if c > 1.0 - 1e-12:
        return (1.0, 0.0, 0.0, 0.0)
    if c < -1.0 + 1e-12:
        return (0.0, 1.0, 0.0, 0.0)
    axis = np.cross(z, d)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * np.arccos(c)
    s = np.sin(half)
    return (float(np.cos(half)), float(axis[0] * s), float(axis[1] * s), float(axis[2] * s))


def random_rigid_extrinsics(rng: np.random.Generator) -> CameraExtrinsics:
    """Uniform random rotation (via a random unit quaternion) plus translation."""
    q = rng.normal(size=4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    r = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    m = np.eye(4)
    m[:3, :3] = r
    m[:3, 3] = rng.uniform(-1.0, 1.0, size=3)
    return CameraExtrinsics(m)


@dataclass(frozen=True)
class OracleTriple:
    scene: Scene
    extr: CameraExtrinsics
    intr: CameraIntrinsics
    pose: Pose
    expected_distance: float


def _corridor_in_frame(extr, intr, origin, direction, length, margin=5) -> bool:
    ts = np.linspace(0.0, length, 24)
    pts = origin + ts[:, np.newaxis] * direction
    u, v, z = project_points(pts, extr, intr)
    return bool(
        (z > 0).all()
        and (u >= margin).all() and (u < intr.width - margin).all()
        and (v >= margin).all() and (v < intr.height - margin).all()
    )


def make_oracle_triple(rng: np.random.Generator, size: int = 96) -> OracleTriple:
    """One randomized (scene, camera, pose) triple with a known hit distance."""
    while True:
        kind = rng.choice(["plane", "sphere", "box"])
        plane_h = rng.uniform(-0.1, 0.1)
        tilt = rng.uniform(-0.15, 0.15, size=2)

        if kind == "plane":
            normal = np.array([tilt[0], tilt[1], 1.0])
            normal /= np.linalg.norm(normal)
            anchor_xy = rng.uniform(-0.12, 0.12, size=2)
            # Solve for z on the plane at anchor_xy: n . p = n_z * h_eff
            offset = plane_h
            z_at = (offset - normal[0] * anchor_xy[0] - normal[1] * anchor_xy[1]) / normal[2]
            target = np.array([anchor_xy[0], anchor_xy[1], z_at])
            scene = Scene(primitives=(Plane(normal=tuple(normal), offset=float(offset)),))
        elif kind == "sphere":
            radius = rng.uniform(0.06, 0.12)
            center = np.array([*rng.uniform(-0.08, 0.08, size=2), plane_h + radius])
            polar = rng.uniform(0.0, np.deg2rad(25.0))
            azim = rng.uniform(0.0, 2 * np.pi)
            target = center + radius * np.array(
                [np.sin(polar) * np.cos(azim), np.sin(polar) * np.sin(azim), np.cos(polar)]
            )
            scene = Scene(primitives=(
                Sphere(center=tuple(center), radius=float(radius)),
                Plane(normal=(0.0, 0.0, 1.0), offset=float(plane_h)),
            ))
        else:
            half = rng.uniform(0.05, 0.11, size=2)
            cx, cy = rng.uniform(-0.06, 0.06, size=2)
            height = rng.uniform(0.06, 0.15)
            lo = (cx - half[0], cy - half[1], plane_h)
            hi = (cx + half[0], cy + half[1], plane_h + height)
            target = np.array([
                rng.uniform(cx - 0.6 * half[0], cx + 0.6 * half[0]),
                rng.uniform(cy - 0.6 * half[1], cy + 0.6 * half[1]),
                plane_h + height,
            ])
            scene = Scene(primitives=(
                Box(min_corner=lo, max_corner=hi),
                Plane(normal=(0.0, 0.0, 1.0), offset=float(plane_h)),
            ))

        direction = np.array([*rng.uniform(-0.3, 0.3, size=2), -1.0])
        direction /= np.linalg.norm(direction)
        distance = rng.uniform(0.2, 0.45)
        origin = target - distance * direction
        pose = Pose(position=origin, orientation=quat_pointing(direction))

        hit = analytic_intersection(scene, origin, direction)
        assert hit is not None and abs(hit[1] - distance) < 1e-9

        focal = rng.uniform(0.85, 1.1) * size
        intr = CameraIntrinsics(
            fx=focal, fy=focal,
            cx=size / 2 + rng.uniform(-2, 2), cy=size / 2 + rng.uniform(-2, 2),
            width=size, height=size,
        )
        mid = 0.5 * (origin + target)
        eye = np.array([
            mid[0] + rng.uniform(-0.1, 0.1),
            mid[1] + rng.uniform(-0.1, 0.1),
            max(origin[2], target[2]) + rng.uniform(0.9, 1.3),
        ])
        extr = look_at_extrinsics(eye=eye, target=mid, up=(0.0, 1.0, 0.0))
        if _corridor_in_frame(extr, intr, origin, direction, distance):
            return OracleTriple(scene=scene, extr=extr, intr=intr, pose=pose,
                                expected_distance=float(distance))


def oracle_error_bound(cfg: MarchConfig) -> float:
    return (cfg.tolerance + 1) * cfg.step_delta + cfg.epsilon


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each (x, y) row to the segment a-b."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(points - (a + t[:, np.newaxis] * ab), axis=1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
