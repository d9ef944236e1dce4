"""Sparse voxel-grid baking and rendering with a deferred shading MLP."""

from snerg.baking import BakeConfig, bake, compute_visibility, voxel_supersample
from snerg.bundle import (
    BundleChecksumError,
    BundleDimensionError,
    BundleError,
    export_bundle,
    import_bundle,
    read_manifest,
)
from snerg.core import (
    Box,
    Camera,
    Ray,
    RayAccumulation,
    SampleValue,
    composite,
    composite_batch,
    decay,
    generate_rays,
    look_at_pose,
    orbit_cameras,
    positional_encode,
    ray_box_intersect,
    ray_box_intersect_batch,
)
from snerg.finetune import TrainExample, finetune, precompute_examples, shade_loss_and_grad
from snerg.grid import (
    EMPTY,
    QuantizedGrid,
    SnergGrid,
    dequantize8,
    dequantize_grid,
    pack_atlas,
    quantize8,
    quantize_grid,
)
from snerg.image import load_png, psnr, save_png
from snerg.mlp import DeferredMlp, shade_deferred
from snerg.rendering import (
    RenderConfig,
    benchmark_orbit,
    march_ray,
    read_report,
    render_frame,
    render_scene_direct,
    trilinear_sample,
    write_report,
)
from snerg.scenes import SceneFunction, make_scene, scene_names
from snerg.server import create_server

__all__ = [
    "BakeConfig",
    "Box",
    "BundleChecksumError",
    "BundleDimensionError",
    "BundleError",
    "Camera",
    "DeferredMlp",
    "EMPTY",
    "QuantizedGrid",
    "Ray",
    "RayAccumulation",
    "RenderConfig",
    "SampleValue",
    "SceneFunction",
    "SnergGrid",
    "TrainExample",
    "bake",
    "benchmark_orbit",
    "composite",
    "composite_batch",
    "compute_visibility",
    "create_server",
    "decay",
    "dequantize8",
    "dequantize_grid",
    "export_bundle",
    "finetune",
    "generate_rays",
    "import_bundle",
    "load_png",
    "look_at_pose",
    "make_scene",
    "march_ray",
    "orbit_cameras",
    "pack_atlas",
    "positional_encode",
    "precompute_examples",
    "psnr",
    "quantize8",
    "quantize_grid",
    "ray_box_intersect",
    "ray_box_intersect_batch",
    "read_manifest",
    "read_report",
    "render_frame",
    "render_scene_direct",
    "save_png",
    "scene_names",
    "shade_deferred",
    "shade_loss_and_grad",
    "trilinear_sample",
    "voxel_supersample",
    "write_report",
]
