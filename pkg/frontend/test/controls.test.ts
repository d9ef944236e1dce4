import { describe, expect, it } from "vitest";

import { WHEEL_STEP, applyDrag, applyWheel } from "../src/controls.js";
import { MAX_ELEVATION_DEG, MIN_RADIUS, ViewerState } from "../src/state.js";

describe("applyDrag", () => {
  it("maps a full-width drag to a full turn", () => {
    const state = new ViewerState();
    applyDrag(state, 640, 0, 640, 480);
    expect(state.azimuthDeg).toBeCloseTo(360, 12);
  });

  it("scales with the sensitivity setting", () => {
    const state = new ViewerState();
    applyDrag(state, 640, 0, 640, 480, 0.5);
    expect(state.azimuthDeg).toBeCloseTo(180, 12);
    applyDrag(state, -160, 0, 640, 480, 2);
    expect(state.azimuthDeg).toBeCloseTo(180 - 180, 12);
  });

  it("tilts with vertical drags and respects the elevation clamp", () => {
    const state = new ViewerState();
    applyDrag(state, 0, 120, 640, 480);
    expect(state.elevationDeg).toBeCloseTo(20 + (180 * 120) / 480, 12);
    applyDrag(state, 0, 10_000, 640, 480);
    expect(state.elevationDeg).toBe(MAX_ELEVATION_DEG);
    applyDrag(state, 0, -100_000, 640, 480);
    expect(state.elevationDeg).toBe(-MAX_ELEVATION_DEG);
  });
});

describe("applyWheel", () => {
  it("zooms in by a fixed factor per notch", () => {
    const state = new ViewerState();
    state.radius = 4;
    applyWheel(state, 1);
    expect(state.radius).toBeCloseTo(4 * WHEEL_STEP, 12);
    applyWheel(state, 2);
    expect(state.radius).toBeCloseTo(4 * WHEEL_STEP ** 3, 12);
  });

  it("zooms out with negative notches", () => {
    const state = new ViewerState();
    state.radius = 4;
    applyWheel(state, -1);
    expect(state.radius).toBeCloseTo(4 / WHEEL_STEP, 12);
  });

  it("never collapses the radius to zero", () => {
    const state = new ViewerState();
    state.radius = 1;
    for (let i = 0; i < 500; i++) applyWheel(state, 1);
    expect(state.radius).toBeGreaterThanOrEqual(MIN_RADIUS);
    expect(state.radius).toBeGreaterThan(0);
  });
});
