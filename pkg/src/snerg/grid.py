"""Block-sparse voxel containers and 8-bit quantization.

A scene baked onto an ``N``-cubed voxel grid is stored as a low-resolution
indirection grid over ``B``-cubed macroblocks plus a dense atlas holding the
occupied blocks' voxel payloads. Physical atlas blocks are ``(B+1)``-cubed:
a one-voxel border on each positive face duplicates the neighbouring content
so trilinear filtering never has to cross block seams.

Array index order is ``[z][y][x]`` throughout; coordinate triples are
``(x, y, z)``. Indirection cells hold an atlas block coordinate triple, or
``(-1, -1, -1)`` for empty (culled) blocks.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .core import Box

EMPTY = -1  # indirection sentinel for culled macroblocks

_MAX_BLOCKS_PER_AXIS = 255  # serialized coordinates must fit one byte below the sentinel


class AtlasCapacityError(ValueError):
    """Raised when more macroblocks survive culling than the atlas can address."""


def quantize8(x):
    """Map [0, 1] values to 0..255 codes, rounding halves up.

    Out-of-range input is clamped first. Works elementwise on arrays.
    """
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    q = np.floor(x * 255.0 + 0.5).astype(np.uint8)
    return q if q.ndim else int(q)


def dequantize8(q):
    """Invert :func:`quantize8`: code / 255 as float."""
    out = np.asarray(q, dtype=np.float64) / 255.0
    return out if out.ndim else float(out)


def _check_channels(name: str, arr: np.ndarray, shape: tuple, dtype) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if dtype == np.uint8:
        if arr.dtype != np.uint8:
            raise ValueError(f"{name} must be uint8, got {arr.dtype}")
    else:
        arr = arr.astype(np.float32, copy=False)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError(f"{name} channels must lie in [0, 1]")
    return arr


def _validate_grid(grid, dtype) -> None:
    n, b = grid.grid_resolution, grid.block_size
    if not (isinstance(n, int) and isinstance(b, int)):
        raise ValueError("grid_resolution and block_size must be integers")
    if b < 2 or n < b or n % b:
        raise ValueError(f"grid resolution {n} must be a positive multiple of block size {b} >= 2")
    if not isinstance(grid.bounds, Box):
        raise ValueError("bounds must be a Box")
    grid.bounds.edge()  # cubic check

    nb = n // b
    indirection = np.asarray(grid.indirection)
    if indirection.shape != (nb, nb, nb, 3) or not np.issubdtype(indirection.dtype, np.integer):
        raise ValueError(f"indirection must be integer with shape {(nb, nb, nb, 3)}")
    object.__setattr__(grid, "indirection", indirection.astype(np.int32, copy=False))

    blocks = tuple(int(v) for v in grid.atlas_blocks)
    if len(blocks) != 3 or any(v < 0 or v > _MAX_BLOCKS_PER_AXIS for v in blocks):
        raise ValueError(f"atlas_blocks must be three counts in [0, {_MAX_BLOCKS_PER_AXIS}]")
    object.__setattr__(grid, "atlas_blocks", blocks)

    p = b + 1
    ax, ay, az = blocks
    vol = (az * p, ay * p, ax * p)
    object.__setattr__(grid, "atlas_alpha", _check_channels("atlas_alpha", grid.atlas_alpha, vol, dtype))
    object.__setattr__(grid, "atlas_diffuse", _check_channels("atlas_diffuse", grid.atlas_diffuse, vol + (3,), dtype))
    object.__setattr__(grid, "atlas_feature", _check_channels("atlas_feature", grid.atlas_feature, vol + (4,), dtype))

    cells = indirection.reshape(-1, 3)
    empty = np.all(cells == EMPTY, axis=1)
    used = cells[~empty]
    if used.size:
        limits = np.array(blocks)
        if np.any(used < 0) or np.any(used >= limits):
            raise ValueError("indirection references an atlas block outside the atlas")
        if len({tuple(c) for c in used}) != len(used):
            raise ValueError("two indirection cells reference the same atlas block")


@dataclasses.dataclass(frozen=True)
class SnergGrid:
    """Float-valued baked grid: indirection plus padded-block atlas.

    ``atlas_blocks`` is the (x, y, z) count of physical blocks along each
    atlas axis; atlas arrays are the corresponding dense volumes with one
    ``(B+1)``-cubed slot per block.
    """

    grid_resolution: int
    block_size: int
    bounds: Box
    indirection: np.ndarray  # (nb, nb, nb, 3) int32, EMPTY sentinel
    atlas_alpha: np.ndarray  # (D, H, W) float32 in [0, 1]
    atlas_diffuse: np.ndarray  # (D, H, W, 3)
    atlas_feature: np.ndarray  # (D, H, W, 4)
    atlas_blocks: tuple[int, int, int]

    def __post_init__(self):
        _validate_grid(self, np.float32)

    @property
    def blocks_per_axis(self) -> int:
        return self.grid_resolution // self.block_size

    @property
    def physical_block_size(self) -> int:
        return self.block_size + 1

    @property
    def voxel_width(self) -> float:
        return self.bounds.edge() / self.grid_resolution

    @property
    def occupied_count(self) -> int:
        return int(np.sum(np.any(self.indirection != EMPTY, axis=-1)))


@dataclasses.dataclass(frozen=True)
class QuantizedGrid:
    """Same layout as :class:`SnergGrid` with all channels as 8-bit codes."""

    grid_resolution: int
    block_size: int
    bounds: Box
    indirection: np.ndarray
    atlas_alpha: np.ndarray  # uint8
    atlas_diffuse: np.ndarray
    atlas_feature: np.ndarray
    atlas_blocks: tuple[int, int, int]

    def __post_init__(self):
        _validate_grid(self, np.uint8)

    blocks_per_axis = SnergGrid.blocks_per_axis
    physical_block_size = SnergGrid.physical_block_size
    voxel_width = SnergGrid.voxel_width
    occupied_count = SnergGrid.occupied_count


def _quantize_channel(arr: np.ndarray, bits: int) -> np.ndarray:
    levels = (1 << bits) - 1
    coarse = np.floor(arr.astype(np.float64) * levels + 0.5)
    return np.floor(coarse * (255.0 / levels) + 0.5).astype(np.uint8)


def quantize_grid(grid: SnergGrid, bits: int = 8) -> QuantizedGrid:
    """Quantize every channel to ``bits`` levels, stored as 8-bit codes.

    ``bits`` below 8 restricts codes to a coarser codebook (each level is
    re-expanded into the 0..255 range) so lower-precision storage can be
    studied without changing the container format.
    """
    if not 1 <= bits <= 8:
        raise ValueError(f"bits must be in 1..8, got {bits}")
    return QuantizedGrid(
        grid_resolution=grid.grid_resolution,
        block_size=grid.block_size,
        bounds=grid.bounds,
        indirection=grid.indirection.copy(),
        atlas_alpha=_quantize_channel(grid.atlas_alpha, bits),
        atlas_diffuse=_quantize_channel(grid.atlas_diffuse, bits),
        atlas_feature=_quantize_channel(grid.atlas_feature, bits),
        atlas_blocks=grid.atlas_blocks,
    )


def dequantize_grid(grid: QuantizedGrid) -> SnergGrid:
    """Expand 8-bit codes back to float32 channels (code / 255)."""
    return SnergGrid(
        grid_resolution=grid.grid_resolution,
        block_size=grid.block_size,
        bounds=grid.bounds,
        indirection=grid.indirection.copy(),
        atlas_alpha=(grid.atlas_alpha / 255.0).astype(np.float32),
        atlas_diffuse=(grid.atlas_diffuse / 255.0).astype(np.float32),
        atlas_feature=(grid.atlas_feature / 255.0).astype(np.float32),
        atlas_blocks=grid.atlas_blocks,
    )


def atlas_layout(count: int) -> tuple[int, int, int]:
    """Near-cubic (x, y, z) block counts able to hold ``count`` slots."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return (0, 0, 0)
    if count > _MAX_BLOCKS_PER_AXIS**3:
        raise AtlasCapacityError(f"{count} occupied blocks exceed the {_MAX_BLOCKS_PER_AXIS}^3 atlas limit")
    ax = min(int(math.ceil(count ** (1.0 / 3.0))), _MAX_BLOCKS_PER_AXIS)
    ay = min(int(math.ceil(math.sqrt(count / ax))), _MAX_BLOCKS_PER_AXIS)
    az = int(math.ceil(count / (ax * ay)))
    if az > _MAX_BLOCKS_PER_AXIS:
        raise AtlasCapacityError(f"{count} occupied blocks exceed the {_MAX_BLOCKS_PER_AXIS}^3 atlas limit")
    return (ax, ay, az)


def slot_coord(index: int, layout: tuple[int, int, int]) -> tuple[int, int, int]:
    """Atlas block coordinate of flat slot ``index`` (x fastest, then y, z)."""
    ax, ay, az = layout
    if not 0 <= index < ax * ay * az:
        raise ValueError(f"slot {index} outside atlas layout {layout}")
    return (index % ax, (index // ax) % ay, index // (ax * ay))


def pack_atlas(payloads: dict, grid_resolution: int, block_size: int, bounds: Box) -> SnergGrid:
    """Assemble a :class:`SnergGrid` from per-block padded payloads.

    ``payloads`` maps block coordinates ``(bx, by, bz)`` to
    ``(alpha, diffuse, feature)`` arrays of shape ``(B+1, B+1, B+1[, C])``.
    Blocks are assigned atlas slots in a fixed (z, y, x) key order so packing
    is deterministic.
    """
    nb = grid_resolution // block_size
    p = block_size + 1
    order = sorted(payloads, key=lambda c: (c[2], c[1], c[0]))
    layout = atlas_layout(len(order))
    ax, ay, az = layout
    vol = (az * p, ay * p, ax * p)
    atlas_alpha = np.zeros(vol, dtype=np.float32)
    atlas_diffuse = np.zeros(vol + (3,), dtype=np.float32)
    atlas_feature = np.zeros(vol + (4,), dtype=np.float32)
    indirection = np.full((nb, nb, nb, 3), EMPTY, dtype=np.int32)

    for slot, (bx, by, bz) in enumerate(order):
        if not (0 <= bx < nb and 0 <= by < nb and 0 <= bz < nb):
            raise ValueError(f"block coordinate {(bx, by, bz)} outside {nb}^3 grid")
        alpha, diffuse, feature = payloads[(bx, by, bz)]
        if np.shape(alpha) != (p, p, p):
            raise ValueError(f"block payload must be {(p, p, p)}, got {np.shape(alpha)}")
        sx, sy, sz = slot_coord(slot, layout)
        zs, ys, xs = slice(sz * p, sz * p + p), slice(sy * p, sy * p + p), slice(sx * p, sx * p + p)
        atlas_alpha[zs, ys, xs] = alpha
        atlas_diffuse[zs, ys, xs] = diffuse
        atlas_feature[zs, ys, xs] = feature
        indirection[bz, by, bx] = (sx, sy, sz)

    return SnergGrid(
        grid_resolution=grid_resolution,
        block_size=block_size,
        bounds=bounds,
        indirection=indirection,
        atlas_alpha=atlas_alpha,
        atlas_diffuse=atlas_diffuse,
        atlas_feature=atlas_feature,
        atlas_blocks=layout,
    )
