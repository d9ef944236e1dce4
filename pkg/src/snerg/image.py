"""Lossless 8-bit PNG I/O and the slice tiling used to store volumes as 2D.

A (D, H, W[, C]) volume becomes one PNG with its z-slices laid out row-major
on a near-square grid of ceil(sqrt(D)) columns. Tiling is exact and
invertible given the volume dimensions.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image

_MODES = {1: "L", 3: "RGB", 4: "RGBA"}


def tiling_shape(depth: int) -> tuple[int, int]:
    """(columns, rows) of the slice layout for a stack of ``depth`` images."""
    if depth <= 0:
        return (1, 1)
    columns = int(math.ceil(math.sqrt(depth)))
    rows = int(math.ceil(depth / columns))
    return (columns, rows)


def tile_volume(volume: np.ndarray) -> np.ndarray:
    """Lay out z-slices of a uint8 volume row-major on a near-square sheet.

    Unused tail tiles are zero-filled. A zero-size volume produces a 1x1
    placeholder so the result is always a valid image.
    """
    volume = np.asarray(volume)
    if volume.dtype != np.uint8:
        raise ValueError(f"tiling expects uint8 volumes, got {volume.dtype}")
    if volume.ndim == 3:
        channels = ()
    elif volume.ndim == 4:
        channels = volume.shape[3:]
    else:
        raise ValueError(f"volume must be (D, H, W[, C]), got shape {volume.shape}")
    depth, height, width = volume.shape[:3]
    columns, rows = tiling_shape(depth)
    if depth == 0 or height == 0 or width == 0:
        return np.zeros((1, 1) + channels, dtype=np.uint8)
    sheet = np.zeros((rows * height, columns * width) + channels, dtype=np.uint8)
    for z in range(depth):
        r, c = divmod(z, columns)
        sheet[r * height : (r + 1) * height, c * width : (c + 1) * width] = volume[z]
    return sheet


def untile_volume(sheet: np.ndarray, depth: int, height: int, width: int) -> np.ndarray:
    """Invert :func:`tile_volume` given the original volume dimensions."""
    sheet = np.asarray(sheet)
    channels = sheet.shape[2:]
    if depth == 0 or height == 0 or width == 0:
        return np.zeros((depth, height, width) + channels, dtype=np.uint8)
    columns, rows = tiling_shape(depth)
    if sheet.shape[:2] != (rows * height, columns * width):
        raise ValueError(
            f"sheet is {sheet.shape[:2]}, expected {(rows * height, columns * width)} "
            f"for {depth} slices of {height}x{width}"
        )
    volume = np.empty((depth, height, width) + channels, dtype=np.uint8)
    for z in range(depth):
        r, c = divmod(z, columns)
        volume[z] = sheet[r * height : (r + 1) * height, c * width : (c + 1) * width]
    return volume


def encode_png(array: np.ndarray) -> bytes:
    """Lossless PNG bytes for a uint8 image (grayscale, RGB or RGBA)."""
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise ValueError(f"PNG encoding expects uint8, got {array.dtype}")
    if array.ndim == 2:
        mode = "L"
    elif array.ndim == 3 and array.shape[2] in _MODES:
        mode = _MODES[array.shape[2]]
        if array.shape[2] == 1:
            array = array[..., 0]
    else:
        raise ValueError(f"unsupported image shape {array.shape}")
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    """uint8 array from PNG bytes; shape (H, W) or (H, W, C)."""
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img)


def save_png(path, array: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(array))


def load_png(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_png(fh.read())


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB between two [0, 1] images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)
