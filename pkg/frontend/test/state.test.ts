import { describe, expect, it } from "vitest";

import {
  FPS_SMOOTHING,
  MAX_ELEVATION_DEG,
  MAX_RENDER_SCALE,
  MIN_RADIUS,
  MIN_RENDER_SCALE,
  ViewerState,
} from "../src/state.js";

describe("ViewerState", () => {
  it("clamps elevation to the vertical limit", () => {
    const state = new ViewerState();
    state.elevationDeg = 140;
    expect(state.elevationDeg).toBe(MAX_ELEVATION_DEG);
    state.elevationDeg = -140;
    expect(state.elevationDeg).toBe(-MAX_ELEVATION_DEG);
    state.elevationDeg = 45;
    expect(state.elevationDeg).toBe(45);
  });

  it("keeps the orbit radius strictly positive", () => {
    const state = new ViewerState();
    state.radius = 0;
    expect(state.radius).toBe(MIN_RADIUS);
    state.radius = -7;
    expect(state.radius).toBe(MIN_RADIUS);
    state.radius = 2.5;
    expect(state.radius).toBe(2.5);
  });

  it("clamps the render scale to its slider range", () => {
    const state = new ViewerState();
    state.renderScale = 0.05;
    expect(state.renderScale).toBe(MIN_RENDER_SCALE);
    state.renderScale = 3;
    expect(state.renderScale).toBe(MAX_RENDER_SCALE);
    state.renderScale = 0.5;
    expect(state.renderScale).toBe(0.5);
  });

  it("reports zero FPS before the first frame", () => {
    const state = new ViewerState();
    expect(state.fps).toBe(0);
    expect(state.frameCount).toBe(0);
  });

  it("seeds the FPS estimate from the first frame", () => {
    const state = new ViewerState();
    state.recordFrame(20);
    expect(state.fps).toBeCloseTo(50, 12);
    expect(state.frameCount).toBe(1);
  });

  it("smooths later frames exponentially", () => {
    const state = new ViewerState();
    state.recordFrame(10); // 100 fps seed
    state.recordFrame(40); // 25 fps instant
    const expected = 100 + FPS_SMOOTHING * (25 - 100);
    expect(state.fps).toBeCloseTo(expected, 12);
    expect(state.frameCount).toBe(2);
  });

  it("averages over well more than ten frames", () => {
    const state = new ViewerState();
    // Steady 60 fps stream with one 6 fps dropout: after the dropout the
    // estimate must still be dominated by history, not by the outlier.
    for (let i = 0; i < 30; i++) state.recordFrame(1000 / 60);
    const before = state.fps;
    state.recordFrame(1000 / 6);
    expect(state.fps).toBeGreaterThan(0.8 * before);
    expect(state.frameCount).toBe(31);
  });

  it("ignores non-positive frame times", () => {
    const state = new ViewerState();
    state.recordFrame(0);
    state.recordFrame(-5);
    expect(state.fps).toBe(0);
    expect(state.frameCount).toBe(0);
  });
});
