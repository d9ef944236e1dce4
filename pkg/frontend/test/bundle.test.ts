import { describe, expect, it } from "vitest";

import { assembleBundle, EMPTY } from "../src/bundle.js";
import { BundleFormatError } from "../src/manifest.js";
import { loadFixtureBundle, readManifestJson, readSheets, FIXTURES } from "./helpers.js";
import { join } from "node:path";

describe("assembleBundle", () => {
  it("reconstructs the slab bundle's geometry", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    expect(bundle.gridResolution).toBe(32);
    expect(bundle.blockSize).toBe(8);
    expect(bundle.blocksPerAxis).toBe(4);
    expect(bundle.physicalBlockSize).toBe(9);
    expect(bundle.voxelWidth).toBeCloseTo(2 / 32, 12);
    expect(bundle.boundsMin).toEqual([-1, -1, -1]);

    const [ax, ay, az] = bundle.atlasBlocks;
    expect(bundle.alpha).toHaveLength(ax * 9 * ay * 9 * az * 9);
    expect(bundle.diffuse).toHaveLength(bundle.alpha.length * 3);
    expect(bundle.feature).toHaveLength(bundle.alpha.length * 4);

    let occupied = 0;
    for (let i = 0; i < bundle.indirection.length; i += 3) {
      const sx = bundle.indirection[i];
      if (sx === EMPTY) {
        expect(bundle.indirection[i + 1]).toBe(EMPTY);
        expect(bundle.indirection[i + 2]).toBe(EMPTY);
      } else {
        occupied += 1;
        expect(sx).toBeLessThan(ax);
        expect(bundle.indirection[i + 1]).toBeLessThan(ay);
        expect(bundle.indirection[i + 2]).toBeLessThan(az);
      }
    }
    // a horizontal slab occupies a band of blocks, never the whole grid
    expect(occupied).toBeGreaterThan(0);
    expect(occupied).toBeLessThan(64);
    expect(occupied).toBeLessThanOrEqual(ax * ay * az);
  });

  it("wires the shading network with the exported layout", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    expect(bundle.mlp.bands).toBe(4);
    expect(bundle.mlp.inputWidth).toBe(34);
    expect(bundle.mlp.layers.map((l) => [l.rows, l.cols])).toEqual([
      [16, 34],
      [16, 16],
      [3, 16],
    ]);
  });

  it("loads an empty bundle with every block culled", () => {
    const bundle = loadFixtureBundle("empty_bundle");
    expect(bundle.background).toEqual([0.2, 0.4, 0.6]);
    expect(bundle.alpha).toHaveLength(0);
    for (let i = 0; i < bundle.indirection.length; i++) {
      expect(bundle.indirection[i]).toBe(EMPTY);
    }
  });

  it("rejects a manifest with the wrong format version", () => {
    const dir = join(FIXTURES, "slab_bundle");
    const manifest = readManifestJson(dir) as Record<string, unknown>;
    manifest.format_version = 2;
    expect(() => assembleBundle(manifest, readSheets(dir))).toThrowError(/format_version/);
  });

  it("rejects inconsistent block geometry", () => {
    const dir = join(FIXTURES, "slab_bundle");
    const manifest = readManifestJson(dir) as Record<string, unknown>;
    manifest.physical_block_size = 8;
    expect(() => assembleBundle(manifest, readSheets(dir))).toThrowError(BundleFormatError);
  });

  it("names the missing image file", () => {
    const dir = join(FIXTURES, "slab_bundle");
    const sheets = readSheets(dir);
    delete sheets["atlas_features.png"];
    try {
      assembleBundle(readManifestJson(dir), sheets);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(BundleFormatError);
      expect((err as BundleFormatError).file).toBe("atlas_features.png");
    }
  });

  it("names a wrongly-sized atlas image", () => {
    const dir = join(FIXTURES, "slab_bundle");
    const sheets = readSheets(dir);
    sheets["atlas_alpha.png"] = { width: 3, height: 3, pixels: new Uint8Array(36) };
    try {
      assembleBundle(readManifestJson(dir), sheets);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(BundleFormatError);
      expect((err as BundleFormatError).file).toBe("atlas_alpha.png");
    }
  });

  it("is idempotent: two loads from the same files agree byte for byte", () => {
    const dir = join(FIXTURES, "spheres_bundle");
    const a = assembleBundle(readManifestJson(dir), readSheets(dir));
    const b = assembleBundle(readManifestJson(dir), readSheets(dir));
    expect(Buffer.from(a.alpha).equals(Buffer.from(b.alpha))).toBe(true);
    expect(Buffer.from(a.diffuse).equals(Buffer.from(b.diffuse))).toBe(true);
    expect(a.indirection).toEqual(b.indirection);
  });
});
