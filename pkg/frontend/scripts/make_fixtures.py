"""Build the bundles and CPU reference renders the viewer tests check against.

Run from frontend/ (or anywhere): writes into frontend/test/fixtures/.
Requires the exporter package importable (pip install -e ../).
"""

import json
import os
import shutil

import numpy as np

from snerg import (
    BakeConfig,
    Camera,
    RenderConfig,
    bake,
    export_bundle,
    generate_rays,
    import_bundle,
    look_at_pose,
    make_scene,
    orbit_cameras,
    pack_atlas,
    quantize_grid,
    render_frame,
)
from snerg.core import Box

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "test", "fixtures")


def orbit_pose(radius, azimuth_deg, elevation_deg):
    phi, theta = np.deg2rad(elevation_deg), np.deg2rad(azimuth_deg)
    eye = radius * np.array([np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), np.sin(phi)])
    return look_at_pose(eye, (0.0, 0.0, 0.0))


def write_reference(grid, mlp, background, view, out_name):
    camera = Camera(
        pose=np.array(view["pose"], dtype=np.float64).reshape(4, 4),
        focal=view["focal"],
        width=view["width"],
        height=view["height"],
    )
    config = RenderConfig(width=view["width"], height=view["height"], background=background)
    image = render_frame(grid, mlp, camera, config)
    with open(os.path.join(FIXTURES, out_name), "wb") as fh:
        fh.write(image.astype("<f4").tobytes())


def main():
    shutil.rmtree(FIXTURES, ignore_errors=True)
    os.makedirs(FIXTURES)
    rig30 = orbit_cameras(8, 3.0, 30.0, 80.0, 64, 64) + orbit_cameras(8, 3.0, -30.0, 80.0, 64, 64)
    rig75 = orbit_cameras(8, 3.0, 75.0, 80.0, 64, 64) + orbit_cameras(8, 3.0, -75.0, 80.0, 64, 64)

    slab = make_scene("slab")
    slab_grid = quantize_grid(bake(slab, rig75, BakeConfig(grid_resolution=32, block_size=8)))
    export_bundle(slab_grid, slab.mlp, os.path.join(FIXTURES, "slab_bundle"))

    spheres = make_scene("lambert-spheres")
    spheres_grid = quantize_grid(bake(spheres, rig30, BakeConfig(grid_resolution=32, block_size=8)))
    export_bundle(spheres_grid, spheres.mlp, os.path.join(FIXTURES, "spheres_bundle"))

    empty = quantize_grid(pack_atlas({}, 16, 8, Box((-1, -1, -1), (1, 1, 1))))
    export_bundle(empty, spheres.mlp, os.path.join(FIXTURES, "empty_bundle"), background=(0.2, 0.4, 0.6))

    # arbitrary payloads, small enough to cross-check every texel
    rng = np.random.default_rng(7)
    payloads = {}
    for bz in range(2):
        for by in range(2):
            for bx in range(2):
                if rng.random() < 0.6:
                    payloads[(bx, by, bz)] = (
                        rng.random((5, 5, 5), dtype=np.float32),
                        rng.random((5, 5, 5, 3), dtype=np.float32),
                        rng.random((5, 5, 5, 4), dtype=np.float32),
                    )
    tiny = quantize_grid(pack_atlas(payloads, 8, 4, Box((-1, -1, -1), (1, 1, 1))))
    export_bundle(tiny, spheres.mlp, os.path.join(FIXTURES, "tiny_bundle"))

    views = []
    slab_poses = [
        ("slab_top", look_at_pose((0.0, 0.0, 2.5), (0.0, 0.0, 0.0), up=(0.0, 1.0, 0.0)), 48.0),
        ("slab_oblique", orbit_pose(3.0, 40.0, 35.0), 56.0),
        ("slab_below", orbit_pose(3.0, 200.0, -25.0), 56.0),
    ]
    for name, pose, focal in slab_poses:
        views.append(
            {
                "name": name,
                "bundle": "slab_bundle",
                "pose": [float(v) for v in pose.reshape(-1)],
                "focal": focal,
                "width": 48,
                "height": 48,
                "reference": f"{name}.bin",
            }
        )
    for i, (azimuth, elevation) in enumerate([(0.0, 20.0), (120.0, -30.0), (240.0, 45.0)]):
        pose = orbit_pose(3.0, azimuth, elevation)
        views.append(
            {
                "name": f"spheres_{i}",
                "bundle": "spheres_bundle",
                "pose": [float(v) for v in pose.reshape(-1)],
                "focal": 60.0,
                "width": 48,
                "height": 48,
                "reference": f"spheres_{i}.bin",
            }
        )

    grids = {"slab_bundle": import_bundle(os.path.join(FIXTURES, "slab_bundle"))}
    grids["spheres_bundle"] = import_bundle(os.path.join(FIXTURES, "spheres_bundle"))
    for view in views:
        grid, mlp = grids[view["bundle"]]
        write_reference(grid, mlp, (1.0, 1.0, 1.0), view, view["reference"])

    # pin the ray conventions: a few pixels of one slab view and one orbit view
    rays = []
    ray_cameras = [
        Camera(pose=slab_poses[1][1], focal=56.0, width=48, height=48),
        orbit_cameras(3, 2.5, -40.0, 33.0, 20, 30)[2],
    ]
    for camera in ray_cameras:
        for row, col in [(0, 0), (15, 7), (camera.height - 1, camera.width - 1)]:
            ray = generate_rays(camera, pixel=(row, col))
            direction = np.asarray(ray.direction, dtype=np.float64)
            direction = direction / np.linalg.norm(direction)
            rays.append(
                {
                    "pose": [float(v) for v in np.asarray(camera.pose).reshape(-1)],
                    "focal": camera.focal,
                    "width": camera.width,
                    "height": camera.height,
                    "row": row,
                    "col": col,
                    "origin": [float(v) for v in np.asarray(ray.origin)],
                    "dir": [float(v) for v in direction],
                }
            )

    with open(os.path.join(FIXTURES, "fixtures.json"), "w", encoding="utf-8") as fh:
        json.dump({"views": views, "rays": rays}, fh, indent=1)
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
