import { describe, expect, it } from "vitest";

import { lookAtPose, orbitPose, rayThroughPixel } from "../src/camera.js";
import { fixtureIndex, poseToMat } from "./helpers.js";

describe("rayThroughPixel", () => {
  it("reproduces the exporter's rays exactly", () => {
    expect(fixtureIndex.rays.length).toBeGreaterThan(0);
    for (const fixture of fixtureIndex.rays) {
      const { origin, dir } = rayThroughPixel(
        { pose: poseToMat(fixture.pose), focal: fixture.focal, width: fixture.width, height: fixture.height },
        fixture.row,
        fixture.col,
      );
      for (let c = 0; c < 3; c++) {
        expect(origin[c]).toBeCloseTo(fixture.origin[c], 12);
        expect(dir[c]).toBeCloseTo(fixture.dir[c], 12);
      }
    }
  });

  it("produces unit directions", () => {
    const pose = orbitPose(2, 123, -45);
    const { dir } = rayThroughPixel({ pose, focal: 10, width: 32, height: 16 }, 3, 29);
    expect(Math.hypot(dir[0], dir[1], dir[2])).toBeCloseTo(1, 14);
  });
});

describe("pose construction", () => {
  it("matches the exported oblique orbit pose", () => {
    const oblique = fixtureIndex.views.find((v) => v.name === "slab_oblique");
    expect(oblique).toBeDefined();
    const pose = orbitPose(3, 40, 35);
    for (let i = 0; i < 16; i++) {
      expect(pose[i]).toBeCloseTo(oblique!.pose[i], 12);
    }
  });

  it("matches the exported top-down look-at pose", () => {
    const top = fixtureIndex.views.find((v) => v.name === "slab_top");
    expect(top).toBeDefined();
    const pose = lookAtPose([0, 0, 2.5], [0, 0, 0], [0, 1, 0]);
    for (let i = 0; i < 16; i++) {
      expect(pose[i]).toBeCloseTo(top!.pose[i], 12);
    }
  });

  it("keeps the camera looking at the target", () => {
    const pose = orbitPose(5, 77, 31, [0.5, -0.25, 1]);
    // -z column must point from eye toward the target
    const eye = [pose[3], pose[7], pose[11]];
    const toTarget = [0.5 - eye[0], -0.25 - eye[1], 1 - eye[2]];
    const n = Math.hypot(toTarget[0], toTarget[1], toTarget[2]);
    expect(n).toBeCloseTo(5, 12);
    expect(-pose[2]).toBeCloseTo(toTarget[0] / n, 12);
    expect(-pose[6]).toBeCloseTo(toTarget[1] / n, 12);
    expect(-pose[10]).toBeCloseTo(toTarget[2] / n, 12);
  });
});
