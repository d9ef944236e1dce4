/** Assembling decoded bundle images into renderable volumes. */

import { BundleFormatError, parseManifest, type Manifest } from "./manifest.js";
import { mlpFromSpec, type Mlp } from "./mlp.js";
import { untileVolume, type Sheet } from "./tiling.js";

export const EMPTY = -1;
const SENTINEL = 255;

export const VOLUME_FILES = [
  "indirection.png",
  "atlas_alpha.png",
  "atlas_rgb.png",
  "atlas_features.png",
] as const;

export interface Bundle {
  manifest: Manifest;
  gridResolution: number;
  blockSize: number;
  blocksPerAxis: number;
  physicalBlockSize: number;
  boundsMin: Vec3;
  voxelWidth: number;
  /** atlas extent in blocks, (x, y, z) */
  atlasBlocks: [number, number, number];
  /** (nb, nb, nb, 3) block -> atlas slot coordinates, EMPTY for culled blocks */
  indirection: Int32Array;
  /** (az*p, ay*p, ax*p) opacity per voxel width, and its 3/4-channel siblings */
  alpha: Uint8Array;
  diffuse: Uint8Array;
  feature: Uint8Array;
  background: [number, number, number];
  mlp: Mlp;
}

type Vec3 = [number, number, number];

/** Pure assembly step shared by the browser loader and headless tests. */
export function assembleBundle(manifestJson: unknown, sheets: Record<string, Sheet>): Bundle {
  const manifest = parseManifest(manifestJson);
  for (const name of VOLUME_FILES) {
    if (!(name in sheets)) {
      throw new BundleFormatError(`bundle image missing: ${name}`, name);
    }
  }
  const n = manifest.grid_resolution;
  const b = manifest.block_size;
  const nb = n / b;
  const p = manifest.physical_block_size;
  const [ax, ay, az] = manifest.atlas_blocks;

  const indRaw = untileVolume(sheets["indirection.png"], nb, nb, nb, 3, "indirection.png");
  const indirection = new Int32Array(indRaw.length);
  for (let i = 0; i < indRaw.length; i += 3) {
    const empty = indRaw[i] === SENTINEL && indRaw[i + 1] === SENTINEL && indRaw[i + 2] === SENTINEL;
    indirection[i] = empty ? EMPTY : indRaw[i];
    indirection[i + 1] = empty ? EMPTY : indRaw[i + 1];
    indirection[i + 2] = empty ? EMPTY : indRaw[i + 2];
  }
  for (let i = 0; i < indirection.length; i += 3) {
    if (indirection[i] >= ax || indirection[i + 1] >= ay || indirection[i + 2] >= az) {
      throw new BundleFormatError(
        `indirection.png: slot (${indirection[i]}, ${indirection[i + 1]}, ${indirection[i + 2]}) ` +
          `outside the ${ax}x${ay}x${az} atlas`,
        "indirection.png",
      );
    }
  }

  const depth = az * p;
  const height = ay * p;
  const width = ax * p;
  const alpha = untileVolume(sheets["atlas_alpha.png"], depth, height, width, 1, "atlas_alpha.png");
  const diffuse = untileVolume(sheets["atlas_rgb.png"], depth, height, width, 3, "atlas_rgb.png");
  const feature = untileVolume(sheets["atlas_features.png"], depth, height, width, 4, "atlas_features.png");

  const lo = manifest.bounds.min as Vec3;
  const edge = manifest.bounds.max[0] - manifest.bounds.min[0];
  return {
    manifest,
    gridResolution: n,
    blockSize: b,
    blocksPerAxis: nb,
    physicalBlockSize: p,
    boundsMin: [lo[0], lo[1], lo[2]],
    voxelWidth: edge / n,
    atlasBlocks: [ax, ay, az],
    indirection,
    alpha,
    diffuse,
    feature,
    background: [
      manifest.background_color[0],
      manifest.background_color[1],
      manifest.background_color[2],
    ],
    mlp: mlpFromSpec(manifest.mlp),
  };
}
