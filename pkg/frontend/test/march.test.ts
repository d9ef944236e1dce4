import { describe, expect, it } from "vitest";

import type { CameraSpec } from "../src/camera.js";
import { marchRay, renderFrame, shadePixel } from "../src/march.js";
import { fixtureIndex, loadFixtureBundle, poseToMat, readReference } from "./helpers.js";
import type { ViewFixture } from "./helpers.js";

const PARITY_BUDGET = 3 / 255; // mean abs per channel vs the reference renderer
const SKIP_BUDGET = 1 / 255; // max abs when toggling empty-space skipping

function cameraFor(view: ViewFixture): CameraSpec {
  return { pose: poseToMat(view.pose), focal: view.focal, width: view.width, height: view.height };
}

function meanAbsDiff(a: Float64Array, b: Float32Array): number {
  expect(a.length).toBe(b.length);
  let total = 0;
  for (let i = 0; i < a.length; i++) total += Math.abs(a[i] - b[i]);
  return total / a.length;
}

describe("renderFrame parity with the reference renderer", () => {
  for (const view of fixtureIndex.views) {
    it(`matches the ${view.name} reference within ${PARITY_BUDGET.toFixed(4)}`, () => {
      const bundle = loadFixtureBundle(view.bundle);
      const image = renderFrame(bundle, cameraFor(view));
      const reference = readReference(view.reference);
      const diff = meanAbsDiff(image, reference);
      expect(diff).toBeLessThanOrEqual(PARITY_BUDGET);
    });
  }

  it("covers both test bundles and at least three poses each", () => {
    const byBundle = new Map<string, number>();
    for (const view of fixtureIndex.views) {
      byBundle.set(view.bundle, (byBundle.get(view.bundle) ?? 0) + 1);
    }
    expect(byBundle.size).toBeGreaterThanOrEqual(2);
    for (const count of byBundle.values()) expect(count).toBeGreaterThanOrEqual(3);
  });
});

describe("empty-space skipping", () => {
  it("changes nothing visible when toggled", () => {
    const view = fixtureIndex.views.find((v) => v.bundle === "spheres_bundle");
    expect(view).toBeDefined();
    const bundle = loadFixtureBundle(view!.bundle);
    const camera = cameraFor(view!);
    const withSkip = renderFrame(bundle, camera, { skipEmpty: true });
    const without = renderFrame(bundle, camera, { skipEmpty: false });
    let worst = 0;
    for (let i = 0; i < withSkip.length; i++) {
      worst = Math.max(worst, Math.abs(withSkip[i] - without[i]));
    }
    expect(worst).toBeLessThanOrEqual(SKIP_BUDGET);
  });
});

describe("degenerate inputs", () => {
  it("renders an empty bundle as pure background", () => {
    const bundle = loadFixtureBundle("empty_bundle");
    const camera: CameraSpec = { pose: poseToMat(fixtureIndex.views[0].pose), focal: 24, width: 16, height: 12 };
    const image = renderFrame(bundle, camera);
    for (let p = 0; p < image.length; p += 3) {
      expect(image[p]).toBe(bundle.background[0]);
      expect(image[p + 1]).toBe(bundle.background[1]);
      expect(image[p + 2]).toBe(bundle.background[2]);
    }
  });

  it("returns zero alpha for rays that miss the scene box", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    const result = marchRay(bundle, [10, 10, 10], [0, 0, 1]);
    expect(result.alpha).toBe(0);
    const shaded = shadePixel(bundle, result, [0, 0, 1]);
    for (let c = 0; c < 3; c++) expect(shaded[c]).toBe(bundle.background[c]);
  });
});
