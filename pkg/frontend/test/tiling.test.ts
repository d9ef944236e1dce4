import { describe, expect, it } from "vitest";
import { join } from "node:path";

import { BundleFormatError } from "../src/manifest.js";
import { tilingShape, untileVolume, type Sheet } from "../src/tiling.js";
import { FIXTURES, readManifestJson, readSheet } from "./helpers.js";

function syntheticSheet(width: number, height: number): Sheet {
  const pixels = new Uint8Array(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    pixels[i * 4] = i % 251;
    pixels[i * 4 + 1] = (i * 3) % 251;
    pixels[i * 4 + 2] = (i * 7) % 251;
    pixels[i * 4 + 3] = 255;
  }
  return { width, height, pixels };
}

describe("tilingShape", () => {
  it("lays depth out on a near-square grid", () => {
    expect(tilingShape(0)).toEqual({ columns: 1, rows: 1 });
    expect(tilingShape(1)).toEqual({ columns: 1, rows: 1 });
    expect(tilingShape(2)).toEqual({ columns: 2, rows: 1 });
    expect(tilingShape(5)).toEqual({ columns: 3, rows: 2 });
    expect(tilingShape(9)).toEqual({ columns: 3, rows: 3 });
    expect(tilingShape(10)).toEqual({ columns: 4, rows: 3 });
  });
});

describe("untileVolume", () => {
  it("maps every voxel back to its sheet pixel", () => {
    // 5 slices of 3x4 -> 3 columns x 2 rows of tiles
    const depth = 5;
    const height = 3;
    const width = 4;
    const sheet = syntheticSheet(3 * width, 2 * height);
    const volume = untileVolume(sheet, depth, height, width, 3, "test.png");
    for (let z = 0; z < depth; z++) {
      const tileRow = Math.floor(z / 3);
      const tileCol = z % 3;
      for (let y = 0; y < height; y++) {
        for (let x = 0; x < width; x++) {
          const src = ((tileRow * height + y) * sheet.width + tileCol * width + x) * 4;
          const dst = ((z * height + y) * width + x) * 3;
          expect(volume[dst]).toBe(sheet.pixels[src]);
          expect(volume[dst + 1]).toBe(sheet.pixels[src + 1]);
          expect(volume[dst + 2]).toBe(sheet.pixels[src + 2]);
        }
      }
    }
  });

  it("rejects sheets of the wrong size, naming the file", () => {
    const sheet = syntheticSheet(8, 8);
    expect(() => untileVolume(sheet, 5, 3, 4, 3, "atlas_rgb.png")).toThrowError(BundleFormatError);
    try {
      untileVolume(sheet, 5, 3, 4, 3, "atlas_rgb.png");
    } catch (err) {
      expect((err as BundleFormatError).file).toBe("atlas_rgb.png");
      expect((err as BundleFormatError).message).toContain("atlas_rgb.png");
    }
  });

  it("requires the 1x1 placeholder for empty volumes", () => {
    expect(untileVolume(syntheticSheet(1, 1), 0, 0, 0, 3, "x.png")).toHaveLength(0);
    expect(() => untileVolume(syntheticSheet(2, 1), 0, 0, 0, 3, "x.png")).toThrowError(
      BundleFormatError,
    );
  });

  it("recovers exported atlas texels from their tiled source image", () => {
    // the store contract: texel (x, y, z) of the decoded volume equals the
    // tiled sheet pixel of slice z at tile (z // columns, z % columns)
    const dir = join(FIXTURES, "tiny_bundle");
    const manifest = readManifestJson(dir) as {
      atlas_blocks: number[];
      physical_block_size: number;
    };
    const [ax, ay, az] = manifest.atlas_blocks;
    const p = manifest.physical_block_size;
    const sheet = readSheet(join(dir, "atlas_rgb.png"));
    const { columns } = tilingShape(az * p);
    const volume = untileVolume(sheet, az * p, ay * p, ax * p, 3, "atlas_rgb.png");
    for (let z = 0; z < az * p; z++) {
      for (let y = 0; y < ay * p; y++) {
        for (let x = 0; x < ax * p; x++) {
          const tileRow = Math.floor(z / columns);
          const tileCol = z % columns;
          const src = ((tileRow * ay * p + y) * sheet.width + tileCol * ax * p + x) * 4;
          const dst = ((z * ay * p + y) * (ax * p) + x) * 3;
          for (let c = 0; c < 3; c++) {
            expect(volume[dst + c]).toBe(sheet.pixels[src + c]);
          }
        }
      }
    }
  });
});
