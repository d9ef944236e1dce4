/** Pinhole camera math matching the exporter's conventions.
 *
 * Poses are row-major 4x4 camera-to-world matrices; the camera looks down
 * its -z axis and pixel (row, col) has its centre at offset
 * (col + 0.5 - width/2, row + 0.5 - height/2) pixels from the optical axis.
 */

export type Mat4 = Float64Array;
export type Vec3 = [number, number, number];

function sub(a: ArrayLike<number>, b: ArrayLike<number>): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: ArrayLike<number>, b: ArrayLike<number>): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}

function norm(a: ArrayLike<number>): number {
  return Math.hypot(a[0], a[1], a[2]);
}

function scale(a: ArrayLike<number>, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function lookAtPose(eye: ArrayLike<number>, target: ArrayLike<number>, up: ArrayLike<number> = [0, 0, 1]): Mat4 {
  const backward = sub(eye, target);
  const bn = norm(backward);
  if (bn === 0) {
    throw new Error("eye and target coincide");
  }
  const z = scale(backward, 1 / bn);
  const xRaw = cross(up, z);
  const xn = norm(xRaw);
  if (xn < 1e-9) {
    throw new Error("up direction is parallel to the view direction");
  }
  const x = scale(xRaw, 1 / xn);
  const y = cross(z, x);
  // columns are the camera axes, the last column the eye position
  return Float64Array.of(
    x[0], y[0], z[0], eye[0],
    x[1], y[1], z[1], eye[1],
    x[2], y[2], z[2], eye[2],
    0, 0, 0, 1,
  );
}

export function orbitPose(
  radius: number,
  azimuthDeg: number,
  elevationDeg: number,
  target: ArrayLike<number> = [0, 0, 0],
): Mat4 {
  const phi = (elevationDeg * Math.PI) / 180;
  const theta = (azimuthDeg * Math.PI) / 180;
  const eye: Vec3 = [
    target[0] + radius * Math.cos(phi) * Math.cos(theta),
    target[1] + radius * Math.cos(phi) * Math.sin(theta),
    target[2] + radius * Math.sin(phi),
  ];
  return lookAtPose(eye, target);
}

export interface CameraSpec {
  pose: Mat4;
  focal: number;
  width: number;
  height: number;
}

export interface RaySample {
  origin: Vec3;
  dir: Vec3;
}

/** Unit-direction ray through the centre of pixel (row, col). */
export function rayThroughPixel(camera: CameraSpec, row: number, col: number): RaySample {
  const { pose, focal, width, height } = camera;
  const cx = (col + 0.5 - width / 2) / focal;
  const cy = -(row + 0.5 - height / 2) / focal;
  const cz = -1;
  const dx = pose[0] * cx + pose[1] * cy + pose[2] * cz;
  const dy = pose[4] * cx + pose[5] * cy + pose[6] * cz;
  const dz = pose[8] * cx + pose[9] * cy + pose[10] * cz;
  const n = Math.hypot(dx, dy, dz);
  return {
    origin: [pose[3], pose[7], pose[11]],
    dir: [dx / n, dy / n, dz / n],
  };
}
