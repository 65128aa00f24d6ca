"""Command-line entry point.

Subcommands: augment, synth, bench, validate, render-frame. Exit codes are a
stable contract: 0 success, 1 data errors, 2 usage/validation errors. All
commands leave their input directories untouched.

A JSON config file (same keys as the long flags: delta, epsilon, tolerance,
max_length, style, seed, jobs) can be supplied with --config or through the
AIMBOT_CONFIG environment variable; explicit flags win over the file, the
file wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image

from .bench import MIN_ITERS, reference_bundle, time_augment
from .dataset import (
    augment_episode,
    load_episode,
    render_camera_view,
    synthesize_episode,
    validate_episode,
    write_rgb_png,
)
from .errors import AimbotError, ValidationError
from .overlay import VARIANTS, RenderStyle
from .raymarch import MarchConfig
from .synthscene import load_scene, load_trajectory

CONFIG_ENV = "AIMBOT_CONFIG"

_DEFAULTS = {
    "delta": MarchConfig().step_delta,
    "epsilon": MarchConfig().epsilon,
    "tolerance": MarchConfig().tolerance,
    "max_length": MarchConfig().max_length,
    "style": "default",
    "seed": 0,
    "jobs": 1,
}


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: '{path}'") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot parse config file '{path}': {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config file '{path}' must hold a JSON object")
    unknown = set(data) - set(_DEFAULTS)
    if unknown:
        raise ValidationError(f"config file '{path}' has unknown keys {sorted(unknown)}")
    return data


def _resolve_options(args) -> tuple[MarchConfig, RenderStyle, int]:
    """Merge defaults, config file, and flags; validate before any work starts."""
    merged = dict(_DEFAULTS)
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if config_path:
        merged.update(_load_config_file(config_path))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    cfg = MarchConfig(
        step_delta=float(merged["delta"]),
        tolerance=int(merged["tolerance"]),
        max_length=float(merged["max_length"]),
        epsilon=float(merged["epsilon"]),
    )
    style = RenderStyle(variant=str(merged["style"]), rng_seed=int(merged["seed"]))
    jobs = int(merged["jobs"])
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    return cfg, style, jobs


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("march and style options")
    group.add_argument("--delta", type=float, help="march step size in meters")
    group.add_argument("--epsilon", type=float, help="visibility slack in meters")
    group.add_argument("--tolerance", type=int, help="consecutive invisible steps allowed")
    group.add_argument("--max-length", type=float, help="march length cap in meters")
    group.add_argument("--style", choices=VARIANTS, help="overlay style variant")
    group.add_argument("--seed", type=int, help="seed for the randomized style")
    group.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")


def cmd_augment(args) -> int:
    cfg, style, jobs = _resolve_options(args)
    episode = load_episode(args.input)
    summary = augment_episode(episode, cfg, style, args.output, jobs=jobs)
    print(summary.one_line())
    if summary.frame_errors:
        for err in summary.frame_errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    cfg, _, _ = _resolve_options(args)
    scene, cameras = load_scene(args.scene)
    trajectory = load_trajectory(args.trajectory)
    synthesize_episode(scene, cameras, trajectory, args.frames, args.output,
                       max_length=cfg.max_length)
    print(f"wrote {args.frames}-frame episode with {len(cameras)} camera(s) to {args.output}")
    return 0


def _png_io_report(rgb: np.ndarray) -> str:
    encode_ns, decode_ns = [], []
    payload = None
    for _ in range(5):
        buf = io.BytesIO()
        t0 = time.perf_counter_ns()
        Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
        encode_ns.append(time.perf_counter_ns() - t0)
        payload = buf.getvalue()
        t0 = time.perf_counter_ns()
        with Image.open(io.BytesIO(payload)) as im:
            np.asarray(im.convert("RGB"))
        decode_ns.append(time.perf_counter_ns() - t0)
    return json.dumps({
        "kind": "png_io",
        "encode_ms": float(np.median(encode_ns)) / 1e6,
        "decode_ms": float(np.median(decode_ns)) / 1e6,
        "bytes": len(payload),
    })


def cmd_bench(args) -> int:
    cfg, style, _ = _resolve_options(args)
    if args.input:
        episode = load_episode(args.input)
        if episode.frame_count() == 0:
            print("error: episode has no frames to time", file=sys.stderr)
            return 1
        bundle = episode.load_frame(0)
    else:
        bundle = reference_bundle()
    report = time_augment(bundle, cfg, style, iters=args.iters)
    print(report.to_json_line())
    first = next(iter(bundle.cameras.values()))
    print(_png_io_report(first.rgb))
    per_image = report.percentiles_ms("image")
    print(
        f"per-image latency p50={per_image['p50']:.3f}ms p95={per_image['p95']:.3f}ms "
        f"p99={per_image['p99']:.3f}ms over {len(report.image_samples_ns)} samples",
        file=sys.stderr,
    )
    return 0


def cmd_validate(args) -> int:
    violations = validate_episode(args.input)
    for violation in violations:
        print(violation)
    if violations:
        return 1
    print("ok")
    return 0


def cmd_render_frame(args) -> int:
    cfg, style, _ = _resolve_options(args)
    episode = load_episode(args.input)
    if not 0 <= args.frame < episode.frame_count():
        print(
            f"error: frame {args.frame} out of range (episode has {episode.frame_count()} frames)",
            file=sys.stderr,
        )
        return 2
    camera_ids = [c.id for c in episode.manifest.cameras]
    if args.camera not in camera_ids:
        print(f"error: camera '{args.camera}' not in {camera_ids}", file=sys.stderr)
        return 2
    bundle = episode.load_frame(args.frame)
    image, _ = render_camera_view(bundle, args.camera, cfg, style)
    out = Path(args.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    write_rgb_png(out, image)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aimbot",
        description="Overlay shooting lines and reticles onto multi-view RGB-D robot episodes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="augment every frame of an episode")
    p.add_argument("--input", required=True, help="episode directory (with manifest.json)")
    p.add_argument("--output", required=True, help="output directory for the augmented episode")
    p.add_argument("--jobs", type=int, help="parallel frame workers (output is order-independent)")
    _add_common_options(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("synth", help="generate a synthetic episode with analytic ground truth")
    p.add_argument("--scene", required=True, help="scene description file")
    p.add_argument("--trajectory", required=True, help="trajectory description file")
    p.add_argument("--frames", type=int, required=True, help="number of frames to generate")
    p.add_argument("--output", required=True, help="output episode directory")
    _add_common_options(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="measure pure augmentation latency")
    p.add_argument("--input", help="episode directory; omit to use the built-in reference workload")
    p.add_argument("--iters", type=int, default=MIN_ITERS,
                   help=f"timing iterations incl. warm-up (min {MIN_ITERS})")
    _add_common_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check an episode for schema/file/geometry violations")
    p.add_argument("--input", required=True, help="episode directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render-frame", help="augment a single frame/camera to one PNG")
    p.add_argument("--input", required=True, help="episode directory")
    p.add_argument("--frame", type=int, required=True, help="frame index")
    p.add_argument("--camera", required=True, help="camera id")
    p.add_argument("--output", required=True, help="output PNG path")
    _add_common_options(p)
    p.set_defaults(func=cmd_render_frame)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AimbotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
