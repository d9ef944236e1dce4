"""Shared test utilities: toy scenes, camera rigs, atlas block access."""

import numpy as np

from snerg.core import Box, orbit_cameras
from snerg.mlp import DeferredMlp
from snerg.scenes import SceneFunction

UNIT_BOX = Box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


class ConstantScene(SceneFunction):
    """Uniform density and emissions everywhere inside the box."""

    name = "constant"

    def __init__(self, density, diffuse, feature, bounds=UNIT_BOX, seed=0):
        super().__init__(bounds, DeferredMlp.init(seed=seed), {})
        self.density = float(density)
        self.diffuse = np.asarray(diffuse, dtype=np.float64)
        self.feature = np.asarray(feature, dtype=np.float64)

    def _evaluate_raw(self, pts):
        m = pts.shape[0]
        return (
            np.full(m, self.density),
            np.tile(self.diffuse, (m, 1)),
            np.tile(self.feature, (m, 1)),
        )


def two_ring_rig(count=8, radius=3.0, elevation=30.0, focal=80.0, width=64, height=64):
    """Cameras on two orbit rings (above and below) so undersides stay visible."""
    per_ring = max(1, count // 2)
    return orbit_cameras(per_ring, radius, elevation, focal, width, height) + orbit_cameras(
        per_ring, radius, -elevation, focal, width, height
    )


def fetch_block(grid, coord):
    """(alpha, diffuse, feature) padded payload views for an occupied block."""
    bx, by, bz = coord
    sx, sy, sz = (int(c) for c in grid.indirection[bz, by, bx])
    if sx < 0:
        raise AssertionError(f"block {coord} is empty")
    p = grid.physical_block_size
    zs, ys, xs = slice(sz * p, sz * p + p), slice(sy * p, sy * p + p), slice(sx * p, sx * p + p)
    return grid.atlas_alpha[zs, ys, xs], grid.atlas_diffuse[zs, ys, xs], grid.atlas_feature[zs, ys, xs]


def occupied_set(grid):
    """Set of (bx, by, bz) block coordinates with atlas entries."""
    nb = grid.blocks_per_axis
    out = set()
    for bz in range(nb):
        for by in range(nb):
            for bx in range(nb):
                if grid.indirection[bz, by, bx, 0] >= 0:
                    out.add((bx, by, bz))
    return out


def random_quantized_grid(n, b, seed, occupancy=0.3):
    """Random sparse grid with arbitrary [0,1] payloads (no bake semantics)."""
    from snerg.grid import pack_atlas, quantize_grid

    rng = np.random.default_rng(seed)
    nb = n // b
    p = b + 1
    payloads = {}
    for bz in range(nb):
        for by in range(nb):
            for bx in range(nb):
                if rng.random() < occupancy:
                    payloads[(bx, by, bz)] = (
                        rng.random((p, p, p), dtype=np.float32),
                        rng.random((p, p, p, 3), dtype=np.float32),
                        rng.random((p, p, p, 4), dtype=np.float32),
                    )
    return quantize_grid(pack_atlas(payloads, n, b, UNIT_BOX))


def assert_grids_identical(a, b):
    assert a.grid_resolution == b.grid_resolution
    assert a.block_size == b.block_size
    assert a.atlas_blocks == b.atlas_blocks
    np.testing.assert_array_equal(np.asarray(a.bounds.lo), np.asarray(b.bounds.lo))
    np.testing.assert_array_equal(np.asarray(a.bounds.hi), np.asarray(b.bounds.hi))
    np.testing.assert_array_equal(a.indirection, b.indirection)
    np.testing.assert_array_equal(a.atlas_alpha, b.atlas_alpha)
    np.testing.assert_array_equal(a.atlas_diffuse, b.atlas_diffuse)
    np.testing.assert_array_equal(a.atlas_feature, b.atlas_feature)


def dark_mlp(bands=4):
    """Shading network whose residual is numerically zero (sigmoid of -100).

    Lets tests compare shaded output directly against raw accumulations.
    """
    from snerg.mlp import HIDDEN_WIDTH, mlp_input_width

    width = mlp_input_width(bands)
    return DeferredMlp(
        weights=(
            np.zeros((HIDDEN_WIDTH, width)),
            np.zeros((HIDDEN_WIDTH, HIDDEN_WIDTH)),
            np.zeros((3, HIDDEN_WIDTH)),
        ),
        biases=(np.zeros(HIDDEN_WIDTH), np.zeros(HIDDEN_WIDTH), np.full(3, -100.0)),
        dir_encoding_bands=bands,
    )


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images."""
    from snerg.image import psnr as _psnr

    return _psnr(a, b)
