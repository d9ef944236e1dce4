/** Slice tiling: volumes are stored as z-slices on a near-square 2D sheet.
 *
 * Mirrors the store contract exactly: ceil(sqrt(depth)) columns, slices laid
 * out row-major, zero-filled tail tiles, and a 1x1 placeholder for empty
 * volumes.
 */

import { BundleFormatError } from "./manifest.js";

/** Decoded image pixels, always RGBA (canvas and pngjs both produce this). */
export interface Sheet {
  width: number;
  height: number;
  pixels: Uint8Array;
}

export function tilingShape(depth: number): { columns: number; rows: number } {
  if (depth <= 0) {
    return { columns: 1, rows: 1 };
  }
  const columns = Math.ceil(Math.sqrt(depth));
  return { columns, rows: Math.ceil(depth / columns) };
}

/**
 * Rebuild a (depth, height, width, channels) volume from its tiled sheet.
 *
 * The output is a flat array indexed ((z * height + y) * width + x) * channels + c;
 * `channels` selects the leading channels of each RGBA source pixel.
 */
export function untileVolume(
  sheet: Sheet,
  depth: number,
  height: number,
  width: number,
  channels: number,
  file: string,
): Uint8Array {
  if (depth === 0 || height === 0 || width === 0) {
    if (sheet.width !== 1 || sheet.height !== 1) {
      throw new BundleFormatError(
        `${file}: empty-grid placeholder must be 1x1, got ${sheet.height}x${sheet.width}`,
        file,
      );
    }
    return new Uint8Array(0);
  }
  const { columns, rows } = tilingShape(depth);
  if (sheet.height !== rows * height || sheet.width !== columns * width) {
    throw new BundleFormatError(
      `${file}: image is ${sheet.height}x${sheet.width}, expected ` +
        `${rows * height}x${columns * width} for ${depth} slices of ${height}x${width}`,
      file,
    );
  }
  const out = new Uint8Array(depth * height * width * channels);
  for (let z = 0; z < depth; z++) {
    const tileRow = Math.floor(z / columns);
    const tileCol = z % columns;
    for (let y = 0; y < height; y++) {
      const srcRow = tileRow * height + y;
      for (let x = 0; x < width; x++) {
        const src = (srcRow * sheet.width + tileCol * width + x) * 4;
        const dst = ((z * height + y) * width + x) * channels;
        for (let c = 0; c < channels; c++) {
          out[dst + c] = sheet.pixels[src + c];
        }
      }
    }
  }
  return out;
}
