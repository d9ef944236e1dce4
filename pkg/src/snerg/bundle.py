"""Bundle serialization: a directory of PNG-encoded volumes plus a manifest.

Layout:
    manifest.json      grid geometry, shading network weights, checksums
    indirection.png    RGB; atlas block coordinate per cell, (255,255,255) empty
    atlas_alpha.png    grayscale opacity volume
    atlas_rgb.png      RGB diffuse volume
    atlas_features.png RGBA view-dependence feature volume

All volumes are stored with z-slices tiled row-major into a near-square
sheet (see :mod:`snerg.image`). Export output is byte-deterministic for
identical inputs unless a timestamp is supplied.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .core import Box
from .grid import EMPTY, QuantizedGrid
from .image import decode_png, encode_png, tile_volume, tiling_shape, untile_volume
from .mlp import DeferredMlp

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1
_SENTINEL = 255

_VOLUME_FILES = ("indirection.png", "atlas_alpha.png", "atlas_rgb.png", "atlas_features.png")


class BundleError(Exception):
    """A bundle failed to validate."""


class BundleChecksumError(BundleError):
    """Stored file content does not match its manifest checksum."""


class BundleDimensionError(BundleError):
    """Image dimensions are inconsistent with the manifest geometry."""


def _checksum(data: bytes) -> str:
    """64-bit content fingerprint: leading 16 hex digits of SHA-256."""
    return hashlib.sha256(data).hexdigest()[:16]


def _encode_indirection(indirection: np.ndarray) -> np.ndarray:
    coords = indirection.astype(np.int64)
    return np.where(coords < 0, _SENTINEL, coords).astype(np.uint8)


def _decode_indirection(volume: np.ndarray) -> np.ndarray:
    coords = volume.astype(np.int32)
    empty = np.all(volume == _SENTINEL, axis=-1)
    coords[empty] = EMPTY
    return coords


def mlp_manifest(mlp: DeferredMlp) -> dict:
    layers = []
    for w, b in zip(mlp.weights, mlp.biases):
        layers.append(
            {
                "rows": int(w.shape[0]),
                "cols": int(w.shape[1]),
                "weights": [float(v) for v in w.reshape(-1)],
                "bias": [float(v) for v in b],
            }
        )
    return {
        "dir_encoding_bands": int(mlp.dir_encoding_bands),
        "layers": layers,
        "hidden_activation": "relu",
        "output_activation": "sigmoid",
    }


def _mlp_from_manifest(section: dict) -> DeferredMlp:
    weights, biases = [], []
    for layer in section["layers"]:
        rows, cols = int(layer["rows"]), int(layer["cols"])
        w = np.asarray(layer["weights"], dtype=np.float64)
        if w.size != rows * cols:
            raise BundleError(
                f"network layer has {w.size} weights, expected {rows}x{cols}"
            )
        weights.append(w.reshape(rows, cols))
        biases.append(np.asarray(layer["bias"], dtype=np.float64))
    return DeferredMlp(
        weights=tuple(weights),
        biases=tuple(biases),
        dir_encoding_bands=int(section["dir_encoding_bands"]),
    )


def export_bundle(grid: QuantizedGrid, mlp: DeferredMlp, path, background=(1.0, 1.0, 1.0), timestamp=None) -> dict:
    """Write ``grid`` and ``mlp`` as a bundle directory; returns the manifest.

    ``background`` is recorded for the viewer's compositing. ``timestamp``
    (when given) is stored verbatim in the manifest and is the only
    non-deterministic field; image checksums never cover the manifest.
    """
    if not isinstance(grid, QuantizedGrid):
        raise TypeError("export_bundle stores 8-bit grids; quantize_grid() first")
    bg = np.asarray(background, dtype=np.float64)
    if bg.shape != (3,) or np.any(bg < 0.0) or np.any(bg > 1.0):
        raise ValueError("background must be three channels in [0, 1]")

    os.makedirs(path, exist_ok=True)
    volumes = {
        "indirection.png": tile_volume(_encode_indirection(grid.indirection)),
        "atlas_alpha.png": tile_volume(grid.atlas_alpha),
        "atlas_rgb.png": tile_volume(grid.atlas_diffuse),
        "atlas_features.png": tile_volume(grid.atlas_feature),
    }
    checksums = {}
    for name, sheet in volumes.items():
        data = encode_png(sheet)
        checksums[name] = _checksum(data)
        with open(os.path.join(path, name), "wb") as fh:
            fh.write(data)

    columns, rows = tiling_shape(grid.atlas_alpha.shape[0])
    manifest = {
        "format_version": FORMAT_VERSION,
        "grid_resolution": int(grid.grid_resolution),
        "block_size": int(grid.block_size),
        "bounds": {
            "min": [float(v) for v in grid.bounds.lo],
            "max": [float(v) for v in grid.bounds.hi],
        },
        "atlas_blocks": [int(v) for v in grid.atlas_blocks],
        "physical_block_size": int(grid.physical_block_size),
        "slice_tiling": {"columns": columns, "rows": rows},
        "background_color": [float(v) for v in bg],
        "codec": "png8",
        "mlp": mlp_manifest(mlp),
        "checksums": checksums,
    }
    if timestamp is not None:
        manifest["timestamp"] = timestamp
    write_manifest(manifest, path)
    return manifest


def write_manifest(manifest: dict, path) -> None:
    """Serialize a manifest dict into ``path``; shared by export and finetune."""
    with open(os.path.join(path, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def read_manifest(path) -> dict:
    """Load and minimally validate a bundle manifest."""
    manifest_path = os.path.join(path, MANIFEST_NAME)
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError(f"bundle manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleError(f"unsupported bundle format_version {version!r}, expected {FORMAT_VERSION}")
    return manifest


def _load_checked(path, name: str, checksums: dict) -> np.ndarray:
    file_path = os.path.join(path, name)
    if not os.path.isfile(file_path):
        raise FileNotFoundError(f"bundle file missing: {file_path}")
    with open(file_path, "rb") as fh:
        data = fh.read()
    expected = checksums.get(name)
    actual = _checksum(data)
    if actual != expected:
        raise BundleChecksumError(f"{name}: checksum {actual} does not match manifest {expected}")
    return decode_png(data)


def _untile_checked(sheet: np.ndarray, name: str, depth: int, height: int, width: int, channels: int) -> np.ndarray:
    got_channels = 1 if sheet.ndim == 2 else sheet.shape[2]
    if got_channels != channels:
        raise BundleDimensionError(f"{name}: has {got_channels} channels, expected {channels}")
    if depth == 0:
        if sheet.shape[:2] != (1, 1):
            raise BundleDimensionError(f"{name}: empty-grid placeholder must be 1x1, got {sheet.shape[:2]}")
        shape = (0, 0, 0) if channels == 1 else (0, 0, 0, channels)
        return np.zeros(shape, dtype=np.uint8)
    columns, rows = tiling_shape(depth)
    expected = (rows * height, columns * width)
    if sheet.shape[:2] != expected:
        raise BundleDimensionError(f"{name}: image is {sheet.shape[:2]}, expected {expected}")
    volume = untile_volume(sheet, depth, height, width)
    return volume[..., 0] if channels == 1 and volume.ndim == 4 else volume


def import_bundle(path) -> tuple[QuantizedGrid, DeferredMlp]:
    """Reconstruct (grid, mlp) from a bundle directory, verifying checksums."""
    manifest = read_manifest(path)
    n = int(manifest["grid_resolution"])
    b = int(manifest["block_size"])
    if b <= 0 or n <= 0 or n % b != 0:
        raise BundleDimensionError(f"grid resolution {n} not divisible by block size {b}")
    nb = n // b
    p = b + 1
    ax, ay, az = (int(v) for v in manifest["atlas_blocks"])
    if int(manifest["physical_block_size"]) != p:
        raise BundleDimensionError(
            f"physical_block_size {manifest['physical_block_size']} does not match block_size {b}"
        )
    tiling = manifest["slice_tiling"]
    columns, rows = tiling_shape(az * p)
    if (int(tiling["columns"]), int(tiling["rows"])) != (columns, rows):
        raise BundleDimensionError(
            f"slice_tiling {tiling} does not match atlas depth {az * p}"
        )
    checksums = manifest["checksums"]

    ind_sheet = _load_checked(path, "indirection.png", checksums)
    ind_volume = _untile_checked(ind_sheet, "indirection.png", nb, nb, nb, 3)
    indirection = _decode_indirection(ind_volume)

    alpha_sheet = _load_checked(path, "atlas_alpha.png", checksums)
    alpha = _untile_checked(alpha_sheet, "atlas_alpha.png", az * p, ay * p, ax * p, 1)
    rgb_sheet = _load_checked(path, "atlas_rgb.png", checksums)
    diffuse = _untile_checked(rgb_sheet, "atlas_rgb.png", az * p, ay * p, ax * p, 3)
    feat_sheet = _load_checked(path, "atlas_features.png", checksums)
    feature = _untile_checked(feat_sheet, "atlas_features.png", az * p, ay * p, ax * p, 4)

    bounds = Box(manifest["bounds"]["min"], manifest["bounds"]["max"])
    grid = QuantizedGrid(
        grid_resolution=n,
        block_size=b,
        bounds=bounds,
        indirection=indirection,
        atlas_alpha=alpha,
        atlas_diffuse=diffuse,
        atlas_feature=feature,
        atlas_blocks=(ax, ay, az),
    )
    return grid, _mlp_from_manifest(manifest["mlp"])
