/** Orbit control mappings: pointer drags and wheel zoom onto ViewerState.
 *
 * A drag across the full canvas width turns the orbit by 360 degrees times
 * the sensitivity (1.0 by default); a full-height drag sweeps 180 degrees of
 * elevation before the pole clamp; each wheel notch toward the scene scales
 * the radius by 0.9.
 */

import type { ViewerState } from "./state.js";

export const WHEEL_STEP = 0.9;

export function applyDrag(
  state: ViewerState,
  dxPixels: number,
  dyPixels: number,
  canvasWidth: number,
  canvasHeight: number,
  sensitivity = 1,
): void {
  state.azimuthDeg += (360 * dxPixels * sensitivity) / canvasWidth;
  state.elevationDeg += (180 * dyPixels * sensitivity) / canvasHeight;
}

/** `notches` counts wheel clicks toward the scene; negative clicks zoom out. */
export function applyWheel(state: ViewerState, notches: number): void {
  state.radius *= WHEEL_STEP ** notches;
}
