/** Interaction state: orbit parameters, render scale, and an FPS estimate. */

import type { Manifest } from "./manifest.js";

export const MIN_RADIUS = 1e-3;
export const MAX_ELEVATION_DEG = 89;
export const MIN_RENDER_SCALE = 0.25;
export const MAX_RENDER_SCALE = 1;

// exponential moving average weight 2 / (window + 1) for a 19-frame window,
// comfortably past the ten frames the estimate must span
export const FPS_SMOOTHING = 0.1;

function clamp(x: number, lo: number, hi: number): number {
  return x < lo ? lo : x > hi ? hi : x;
}

export class ViewerState {
  azimuthDeg = 0;
  target: [number, number, number] = [0, 0, 0];
  bundleMeta: Manifest | null = null;

  private _elevationDeg = 20;
  private _radius = 3;
  private _renderScale = 1;
  private _fps = 0;
  private _frameCount = 0;

  get elevationDeg(): number {
    return this._elevationDeg;
  }

  set elevationDeg(value: number) {
    this._elevationDeg = clamp(value, -MAX_ELEVATION_DEG, MAX_ELEVATION_DEG);
  }

  get radius(): number {
    return this._radius;
  }

  set radius(value: number) {
    this._radius = Math.max(value, MIN_RADIUS);
  }

  get renderScale(): number {
    return this._renderScale;
  }

  set renderScale(value: number) {
    this._renderScale = clamp(value, MIN_RENDER_SCALE, MAX_RENDER_SCALE);
  }

  /** Smoothed frames-per-second; 0 until the first frame lands. */
  get fps(): number {
    return this._fps;
  }

  /** Number of frames folded into the FPS estimate so far. */
  get frameCount(): number {
    return this._frameCount;
  }

  recordFrame(frameMs: number): void {
    if (!(frameMs > 0)) {
      return;
    }
    const instant = 1000 / frameMs;
    this._frameCount += 1;
    this._fps = this._frameCount === 1 ? instant : this._fps + FPS_SMOOTHING * (instant - this._fps);
  }
}
