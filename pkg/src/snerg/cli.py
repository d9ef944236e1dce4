"""Command-line front end: bake scenes into bundles, render, benchmark,
fine-tune the shading network, and serve bundles over HTTP.

Exit codes: 0 success, 1 usage error (bad flags or malformed command
input), 2 runtime error (missing files, busy ports, failed I/O). Apart
from the manifest timestamp, every command is deterministic: the same
inputs and seeds reproduce artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from .baking import BakeConfig, bake
from .bundle import (
    MANIFEST_NAME,
    BundleError,
    export_bundle,
    import_bundle,
    mlp_manifest,
    read_manifest,
    write_manifest,
)
from .core import Box, Camera, orbit_cameras
from .finetune import finetune
from .grid import quantize8, quantize_grid
from .image import load_png, save_png
from .rendering import RenderConfig, benchmark_orbit, render_frame
from .scenes import make_scene, parse_scene_params, scene_names
from .server import create_server


class UsageError(Exception):
    """Bad command line or malformed command input; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rgb(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected R,G,B in [0,1], got '{text}'")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numeric R,G,B, got '{text}'")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise argparse.ArgumentTypeError(f"channels must lie in [0,1], got '{text}'")
    return values


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _default_rig(radius: float = 3.0):
    """Two 8-camera rings at +/-30 degrees; covers a scene from both sides."""
    cams = orbit_cameras(8, radius=radius, elevation_deg=30.0, focal=80.0, width=64, height=64)
    cams += orbit_cameras(8, radius=radius, elevation_deg=-30.0, focal=80.0, width=64, height=64)
    return cams


def load_camera_file(path) -> list[tuple[Camera, str | None]]:
    """Parse a camera-list JSON file into (camera, image name) pairs.

    The file holds ``{"cameras": [...]}`` where each entry carries a 4x4
    row-major ``pose`` (camera-to-world), ``focal`` in pixels, ``width``,
    ``height``, and an optional ``image`` file name used by fine-tuning.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    entries = data.get("cameras")
    if not isinstance(entries, list) or not entries:
        raise ValueError(f"camera file {path} must hold a non-empty 'cameras' list")
    out = []
    for i, entry in enumerate(entries):
        try:
            camera = Camera(
                pose=np.asarray(entry["pose"], dtype=np.float64),
                focal=float(entry["focal"]),
                width=int(entry["width"]),
                height=int(entry["height"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"camera entry {i} in {path} is invalid: {exc}") from exc
        out.append((camera, entry.get("image")))
    return out


def save_camera_file(cameras, path, image_names=None) -> None:
    """Write cameras in the format :func:`load_camera_file` reads."""
    entries = []
    for i, camera in enumerate(cameras):
        entry = {
            "pose": [[float(v) for v in row] for row in camera.pose],
            "focal": camera.focal,
            "width": camera.width,
            "height": camera.height,
        }
        if image_names is not None:
            entry["image"] = image_names[i]
        entries.append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"cameras": entries}, fh, indent=2)
        fh.write("\n")


def _bundle_files_size(path, manifest) -> int:
    names = list(manifest["checksums"]) + [MANIFEST_NAME]
    return sum(os.path.getsize(os.path.join(path, n)) for n in names)


def cmd_bake(args) -> int:
    try:
        params = parse_scene_params(args.scene_param or [])
        scene = make_scene(args.scene, seed=args.seed, **params)
        config = BakeConfig(
            grid_resolution=args.grid_res,
            block_size=args.block_size,
            alpha_threshold=args.alpha_thresh,
            visibility_threshold=args.vis_thresh,
            supersamples=args.supersamples,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.cameras:
        cameras = [camera for camera, _ in load_camera_file(args.cameras)]
    else:
        cameras = _default_rig()
    grid = quantize_grid(bake(scene, cameras, config))
    manifest = export_bundle(
        grid, scene.mlp, args.out, background=args.background, timestamp=_timestamp()
    )
    total = grid.blocks_per_axis**3
    print(f"occupied blocks: {grid.occupied_count} / {total}")
    print(f"bundle size: {_bundle_files_size(args.out, manifest)} bytes")
    return 0


def _orbit_pose_cameras(pose: str, config: RenderConfig, bounds: Box):
    spec = pose[len("orbit:") :]
    index_text, sep, count_text = spec.partition("/")
    try:
        index, count = int(index_text), int(count_text)
    except ValueError:
        raise UsageError(f"expected orbit:<i>/<n> with integers, got '{pose}'")
    if not sep or count < 1 or not 0 <= index < count:
        raise UsageError(f"orbit index must satisfy 0 <= i < n, got '{pose}'")
    center = tuple((np.asarray(bounds.lo) + np.asarray(bounds.hi)) / 2.0)
    cameras = orbit_cameras(
        count,
        radius=config.orbit_radius,
        elevation_deg=config.orbit_elevation_deg,
        focal=config.focal if config.focal is not None else float(config.width),
        width=config.width,
        height=config.height,
        target=center,
    )
    return [cameras[index]]


def cmd_render(args) -> int:
    grid, mlp = import_bundle(args.bundle)
    try:
        config = RenderConfig(
            step_size=args.step,
            background=args.background,
            width=args.width,
            height=args.height,
            orbit_radius=args.orbit_radius,
            orbit_elevation_deg=args.orbit_elevation,
            focal=args.focal,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.pose.startswith("orbit:"):
        cameras = _orbit_pose_cameras(args.pose, config, grid.bounds)
    else:
        cameras = [camera for camera, _ in load_camera_file(args.pose)]

    single_file = len(cameras) == 1 and args.out.endswith(".png")
    if not single_file:
        os.makedirs(args.out, exist_ok=True)
    for i, camera in enumerate(cameras):
        image = quantize8(render_frame(grid, mlp, camera, config))
        target = args.out if single_file else os.path.join(args.out, f"frame_{i:03d}.png")
        save_png(target, image)
        print(f"wrote {target}")
    return 0


def cmd_bench(args) -> int:
    grid, mlp = import_bundle(args.bundle)
    config = RenderConfig(step_size=args.step, width=args.width, height=args.height)
    out_path = args.out or os.path.join(args.bundle, "benchmark.txt")
    report = benchmark_orbit(grid, mlp, args.frames, config, out_path=out_path)
    print(f"wrote {out_path}")
    print(f"frames: {report['frames']}  mean: {report['frame_ms_mean']:.3f} ms/frame")
    return 0


def cmd_finetune(args) -> int:
    grid, mlp = import_bundle(args.bundle)
    manifest = read_manifest(args.bundle)
    background = args.background or tuple(manifest["background_color"])
    views = []
    for camera, image_name in load_camera_file(args.cameras):
        if image_name is None:
            raise UsageError(f"every camera in {args.cameras} needs an 'image' entry")
        image = load_png(os.path.join(args.images, image_name))
        if image.shape != (camera.height, camera.width, 3):
            raise ValueError(
                f"image {image_name} is {image.shape}, camera expects "
                f"({camera.height}, {camera.width}, 3)"
            )
        views.append((camera, image.astype(np.float64) / 255.0))
    tuned, trace = finetune(
        grid,
        mlp,
        views,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
        batch_size=args.batch_size,
        config=RenderConfig(background=background),
    )
    manifest["mlp"] = mlp_manifest(tuned)
    manifest["timestamp"] = _timestamp()
    write_manifest(manifest, args.bundle)

    trace_path = args.trace or os.path.join(args.bundle, "finetune_trace.txt")
    with open(trace_path, "w", encoding="utf-8") as fh:
        for epoch, loss in enumerate(trace):
            fh.write(f"{epoch},{loss!r}\n")
    print(f"wrote {trace_path}")
    print(f"loss: {trace[0]!r} -> {min(trace)!r} over {args.epochs} epochs")
    return 0


def cmd_serve(args) -> int:
    read_manifest(args.bundle)  # fail early with a diagnostic naming the file
    roots = [args.bundle] + ([args.viewer] if args.viewer else [])
    try:
        httpd = create_server(roots, port=args.port, host=args.host)
    except OSError as exc:
        raise OSError(f"cannot listen on {args.host}:{args.port}: {exc}") from exc
    print(f"serving {', '.join(str(r) for r in roots)} at http://{args.host}:{httpd.server_address[1]}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def _add_bake(sub) -> None:
    p = sub.add_parser(
        "bake",
        help="sample a scene into a block-sparse bundle",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--scene", required=True, default=argparse.SUPPRESS, choices=scene_names(), help="scene to bake")
    p.add_argument("--out", required=True, default=argparse.SUPPRESS, help="bundle output directory")
    p.add_argument("--grid-res", type=int, default=128, help="voxel grid resolution N")
    p.add_argument("--block-size", type=int, default=32, help="macroblock edge B (divides N)")
    p.add_argument("--alpha-thresh", type=float, default=0.005, help="sparsify alpha below this")
    p.add_argument("--vis-thresh", type=float, default=0.01, help="cull blocks less visible than this")
    p.add_argument("--supersamples", type=int, default=16, help="scene samples per voxel")
    p.add_argument("--seed", type=int, default=0, help="scene and sampling seed")
    p.add_argument("--background", type=_rgb, default=(1.0, 1.0, 1.0), help="R,G,B backdrop stored in the manifest")
    p.add_argument("--cameras", default=None, help="camera-list JSON for visibility culling (default: two 8-camera rings at +/-30 deg)")
    p.add_argument("--scene-param", action="append", metavar="KEY=VALUE", help="scene parameter override (repeatable)")
    p.set_defaults(func=cmd_bake)


def _add_render(sub) -> None:
    p = sub.add_parser(
        "render",
        help="render poses from a bundle to PNG images",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--bundle", required=True, default=argparse.SUPPRESS, help="bundle directory")
    p.add_argument("--out", required=True, default=argparse.SUPPRESS, help="output image (.png) or directory")
    p.add_argument("--pose", default="orbit:0/1", help="orbit:<i>/<n> or a camera-list JSON path")
    p.add_argument("--width", type=int, default=800, help="image width in pixels")
    p.add_argument("--height", type=int, default=800, help="image height in pixels")
    p.add_argument("--focal", type=float, default=None, help="focal length in pixels (default: image width)")
    p.add_argument("--orbit-radius", type=float, default=3.0, help="orbit camera distance")
    p.add_argument("--orbit-elevation", type=float, default=20.0, help="orbit elevation in degrees")
    p.add_argument("--background", type=_rgb, default=(1.0, 1.0, 1.0), help="R,G,B backdrop")
    p.add_argument("--step", type=float, default=None, help="march step in world units (default: one voxel)")
    p.set_defaults(func=cmd_render)


def _add_bench(sub) -> None:
    p = sub.add_parser(
        "bench",
        help="time an orbit render and write a report",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--bundle", required=True, default=argparse.SUPPRESS, help="bundle directory")
    p.add_argument("--frames", type=int, default=150, help="orbit frame count")
    p.add_argument("--width", type=int, default=800, help="image width in pixels")
    p.add_argument("--height", type=int, default=800, help="image height in pixels")
    p.add_argument("--step", type=float, default=None, help="march step in world units (default: one voxel)")
    p.add_argument("--out", default=None, help="report path (default: <bundle>/benchmark.txt)")
    p.set_defaults(func=cmd_bench)


def _add_finetune(sub) -> None:
    p = sub.add_parser(
        "finetune",
        help="fit the shading network to reference views in place",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--bundle", required=True, default=argparse.SUPPRESS, help="bundle directory (manifest rewritten in place)")
    p.add_argument("--images", required=True, default=argparse.SUPPRESS, help="directory of reference PNG views")
    p.add_argument("--cameras", required=True, default=argparse.SUPPRESS, help="camera-list JSON with per-camera 'image' names")
    p.add_argument("--epochs", type=int, default=100, help="optimization epochs")
    p.add_argument("--lr", type=float, default=3e-4, help="Adam learning rate")
    p.add_argument("--seed", type=int, default=0, help="minibatch shuffling seed")
    p.add_argument("--batch-size", type=int, default=4096, help="examples per optimizer step")
    p.add_argument("--background", type=_rgb, default=None, help="R,G,B backdrop behind the reference views (default: the bundle's stored background)")
    p.add_argument("--trace", default=None, help="loss trace path (default: <bundle>/finetune_trace.txt)")
    p.set_defaults(func=cmd_finetune)


def _add_serve(sub) -> None:
    p = sub.add_parser(
        "serve",
        help="serve a bundle (and optional viewer assets) over HTTP",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--bundle", required=True, default=argparse.SUPPRESS, help="bundle directory to serve")
    p.add_argument("--viewer", default=None, help="viewer asset directory merged into the root")
    p.add_argument("--port", type=int, default=8000, help="TCP port to listen on")
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.set_defaults(func=cmd_serve)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="snerg",
        description="Bake volumetric scenes into sparse voxel bundles and render them.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    _add_bake(sub)
    _add_render(sub)
    _add_bench(sub)
    _add_finetune(sub)
    _add_serve(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (BundleError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
