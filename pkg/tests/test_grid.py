"""Store container and quantization tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snerg.core import Box
from snerg.grid import (
    EMPTY,
    AtlasCapacityError,
    QuantizedGrid,
    SnergGrid,
    atlas_layout,
    dequantize8,
    dequantize_grid,
    pack_atlas,
    quantize8,
    quantize_grid,
    slot_coord,
)

BOX = Box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


def constant_payload(p, alpha, diffuse, feature):
    return (
        np.full((p, p, p), alpha, dtype=np.float32),
        np.full((p, p, p, 3), diffuse, dtype=np.float32),
        np.full((p, p, p, 4), feature, dtype=np.float32),
    )


def tiny_grid(payload_coords=((0, 0, 0),), n=4, b=2):
    payloads = {
        coord: constant_payload(b + 1, 0.5, 0.25 * (i + 1) / len(payload_coords), 0.5)
        for i, coord in enumerate(payload_coords)
    }
    return pack_atlas(payloads, n, b, BOX)


class TestQuantize8:
    def test_endpoints(self):
        assert quantize8(0.0) == 0 and dequantize8(0) == 0.0
        assert quantize8(1.0) == 255 and dequantize8(255) == 1.0

    def test_half_rounds_up(self):
        # 255 * 0.5 = 127.5 sits exactly between codes; halves round up.
        assert quantize8(0.5) == 128
        assert dequantize8(128) == pytest.approx(0.5019607843137255, abs=1e-15)

    def test_out_of_range_clamps(self):
        assert quantize8(-0.25) == 0
        assert quantize8(1.75) == 255

    def test_dense_sweep_roundtrip_bound(self):
        x = np.linspace(0.0, 1.0, 100_001)
        err = np.abs(dequantize8(quantize8(x)) - x)
        assert err.max() <= 1.0 / 510.0 + 1e-12

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=50))
    def test_roundtrip_bound_property(self, values):
        x = np.array(values)
        assert np.abs(dequantize8(quantize8(x)) - x).max() <= 1.0 / 510.0 + 1e-12

    def test_array_dtype(self):
        q = quantize8(np.array([0.1, 0.9]))
        assert q.dtype == np.uint8


class TestAtlasLayout:
    def test_small_counts(self):
        assert atlas_layout(0) == (0, 0, 0)
        assert atlas_layout(1) == (1, 1, 1)
        assert atlas_layout(8) == (2, 2, 2)

    def test_capacity_covers_count(self):
        for count in [2, 3, 5, 9, 17, 100, 1000]:
            ax, ay, az = atlas_layout(count)
            assert ax * ay * az >= count
            assert max(ax, ay, az) <= 255
            # near-cubic: no axis more than one subdivision beyond the cube root
            assert max(ax, ay, az) <= int(np.ceil(count ** (1 / 3))) + 1

    def test_over_capacity_raises(self):
        with pytest.raises(AtlasCapacityError):
            atlas_layout(255**3 + 1)

    def test_slot_coord_order(self):
        assert slot_coord(0, (3, 2, 2)) == (0, 0, 0)
        assert slot_coord(1, (3, 2, 2)) == (1, 0, 0)
        assert slot_coord(7, (3, 2, 2)) == (1, 0, 1)
        with pytest.raises(ValueError):
            slot_coord(12, (3, 2, 2))


class TestPackAtlas:
    def test_two_blocks(self):
        grid = tiny_grid([(0, 0, 0), (1, 1, 1)])
        assert grid.occupied_count == 2
        assert grid.atlas_blocks == (2, 1, 1)
        assert tuple(grid.indirection[0, 0, 0]) == (0, 0, 0)
        assert tuple(grid.indirection[1, 1, 1]) == (1, 0, 0)
        assert tuple(grid.indirection[0, 1, 0]) == (EMPTY,) * 3
        # slot 1 holds the second block's payload
        assert grid.atlas_diffuse[0, 0, 3, 0] == pytest.approx(0.25)

    def test_empty_grid(self):
        grid = pack_atlas({}, 4, 2, BOX)
        assert grid.occupied_count == 0
        assert grid.atlas_blocks == (0, 0, 0)
        assert grid.atlas_alpha.size == 0

    def test_bad_payload_shape(self):
        payloads = {(0, 0, 0): constant_payload(2, 0.5, 0.5, 0.5)}  # B, not B+1
        with pytest.raises(ValueError, match="payload"):
            pack_atlas(payloads, 4, 2, BOX)

    def test_block_coord_out_of_range(self):
        payloads = {(2, 0, 0): constant_payload(3, 0.5, 0.5, 0.5)}
        with pytest.raises(ValueError, match="outside"):
            pack_atlas(payloads, 4, 2, BOX)

    def test_properties(self):
        grid = tiny_grid()
        assert grid.blocks_per_axis == 2
        assert grid.physical_block_size == 3
        assert grid.voxel_width == pytest.approx(0.5)


class TestGridValidation:
    def test_rejects_duplicate_reference(self):
        grid = tiny_grid([(0, 0, 0), (1, 1, 1)])
        indirection = grid.indirection.copy()
        indirection[1, 1, 1] = indirection[0, 0, 0]
        with pytest.raises(ValueError, match="same atlas block"):
            SnergGrid(4, 2, BOX, indirection, grid.atlas_alpha, grid.atlas_diffuse, grid.atlas_feature, grid.atlas_blocks)

    def test_rejects_out_of_atlas_reference(self):
        grid = tiny_grid()
        indirection = grid.indirection.copy()
        indirection[1, 1, 1] = (5, 0, 0)
        with pytest.raises(ValueError, match="outside the atlas"):
            SnergGrid(4, 2, BOX, indirection, grid.atlas_alpha, grid.atlas_diffuse, grid.atlas_feature, grid.atlas_blocks)

    def test_rejects_out_of_range_channels(self):
        grid = tiny_grid()
        bad = grid.atlas_alpha.copy()
        bad[0, 0, 0] = 1.5
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            SnergGrid(4, 2, BOX, grid.indirection, bad, grid.atlas_diffuse, grid.atlas_feature, grid.atlas_blocks)

    def test_rejects_indivisible_resolution(self):
        grid = tiny_grid()
        with pytest.raises(ValueError, match="multiple"):
            SnergGrid(5, 2, BOX, grid.indirection, grid.atlas_alpha, grid.atlas_diffuse, grid.atlas_feature, grid.atlas_blocks)

    def test_quantized_requires_uint8(self):
        grid = tiny_grid()
        with pytest.raises(ValueError, match="uint8"):
            QuantizedGrid(4, 2, BOX, grid.indirection, grid.atlas_alpha, grid.atlas_diffuse, grid.atlas_feature, grid.atlas_blocks)


class TestQuantizeGrid:
    def test_eight_bit_matches_quantize8(self):
        grid = tiny_grid([(0, 0, 0), (1, 0, 1)])
        q = quantize_grid(grid)
        np.testing.assert_array_equal(q.atlas_alpha, quantize8(grid.atlas_alpha))
        np.testing.assert_array_equal(q.indirection, grid.indirection)
        assert q.atlas_blocks == grid.atlas_blocks

    def test_dequantize_roundtrip_bitexact(self):
        grid = tiny_grid([(0, 0, 0), (1, 0, 1)])
        q = quantize_grid(grid)
        again = quantize_grid(dequantize_grid(q))
        np.testing.assert_array_equal(again.atlas_alpha, q.atlas_alpha)
        np.testing.assert_array_equal(again.atlas_diffuse, q.atlas_diffuse)
        np.testing.assert_array_equal(again.atlas_feature, q.atlas_feature)

    def test_six_bit_error_bound(self):
        rng = np.random.default_rng(7)
        p = 3
        payloads = {
            (0, 0, 0): (
                rng.random((p, p, p), dtype=np.float32),
                rng.random((p, p, p, 3), dtype=np.float32),
                rng.random((p, p, p, 4), dtype=np.float32),
            )
        }
        grid = pack_atlas(payloads, 4, 2, BOX)
        q6 = quantize_grid(grid, bits=6)
        err = np.abs(q6.atlas_alpha / 255.0 - grid.atlas_alpha)
        assert err.max() <= 1.0 / (2 * 63) + 1.0 / 510.0 + 1e-9
        # coarser codebook: strictly fewer distinct codes than 8-bit
        q8 = quantize_grid(grid, bits=8)
        assert len(np.unique(q6.atlas_diffuse)) <= len(np.unique(q8.atlas_diffuse))

    def test_six_bit_half_value(self):
        # 0.5 -> level 32 of 63 -> code 130 in the 8-bit container
        grid = tiny_grid()
        q6 = quantize_grid(grid, bits=6)
        assert q6.atlas_alpha[0, 0, 0] == 130

    def test_bits_range(self):
        grid = tiny_grid()
        with pytest.raises(ValueError, match="bits"):
            quantize_grid(grid, bits=0)

    @settings(max_examples=25)
    @given(st.integers(min_value=1, max_value=8), st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_bits_bound_property(self, bits, value):
        levels = (1 << bits) - 1
        coarse = np.floor(value * levels + 0.5)
        code = np.floor(coarse * (255.0 / levels) + 0.5)
        assert abs(code / 255.0 - value) <= 1.0 / (2 * levels) + 1.0 / 510.0 + 1e-9
