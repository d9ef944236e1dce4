/** Shared fixture loading for the headless test suite. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { PNG } from "pngjs";

import { assembleBundle, VOLUME_FILES, type Bundle } from "../src/bundle.js";
import type { Sheet } from "../src/tiling.js";

export const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export interface ViewFixture {
  name: string;
  bundle: string;
  pose: number[];
  focal: number;
  width: number;
  height: number;
  reference: string;
}

export interface RayFixture {
  pose: number[];
  focal: number;
  width: number;
  height: number;
  row: number;
  col: number;
  origin: number[];
  dir: number[];
}

export interface FixtureIndex {
  views: ViewFixture[];
  rays: RayFixture[];
}

export const fixtureIndex: FixtureIndex = JSON.parse(
  readFileSync(join(FIXTURES, "fixtures.json"), "utf8"),
);

export function readSheet(path: string): Sheet {
  const png = PNG.sync.read(readFileSync(path));
  return { width: png.width, height: png.height, pixels: new Uint8Array(png.data) };
}

export function readManifestJson(dir: string): unknown {
  return JSON.parse(readFileSync(join(dir, "manifest.json"), "utf8"));
}

export function readSheets(dir: string): Record<string, Sheet> {
  const sheets: Record<string, Sheet> = {};
  for (const name of VOLUME_FILES) {
    sheets[name] = readSheet(join(dir, name));
  }
  return sheets;
}

const bundleCache = new Map<string, Bundle>();

export function loadFixtureBundle(name: string): Bundle {
  let bundle = bundleCache.get(name);
  if (!bundle) {
    const dir = join(FIXTURES, name);
    bundle = assembleBundle(readManifestJson(dir), readSheets(dir));
    bundleCache.set(name, bundle);
  }
  return bundle;
}

/** Reference render as float32 (height * width * 3, row-major). */
export function readReference(name: string): Float32Array {
  const raw = Uint8Array.from(readFileSync(join(FIXTURES, name)));
  return new Float32Array(raw.buffer, 0, raw.length / 4);
}

export function poseToMat(pose: number[]): Float64Array {
  if (pose.length !== 16) {
    throw new Error(`pose must have 16 entries, got ${pose.length}`);
  }
  return Float64Array.from(pose);
}
