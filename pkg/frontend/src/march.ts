/** Software ray-marcher over an assembled bundle.
 *
 * Mirrors the fragment shader (and the exporter's CPU renderer) operation for
 * operation: indirection lookup, ray-box skip over empty blocks, a
 * nearest-neighbour alpha pre-check, trilinear fetches from padded atlas
 * blocks, front-to-back compositing with early termination, then one deferred
 * network evaluation per pixel. Used headlessly for parity tests and as the
 * reference the shader source is generated from.
 */

import { rayThroughPixel, type CameraSpec } from "./camera.js";
import { shadeResidual } from "./mlp.js";
import type { Bundle } from "./bundle.js";

export interface MarchOptions {
  /** world-space sample spacing; defaults to one voxel width */
  step?: number;
  /** transmittance below which a ray stops; 0 disables early termination */
  terminationTransmittance?: number;
  skipEmpty?: boolean;
}

export interface RayResult {
  diffuse: [number, number, number];
  feature: [number, number, number, number];
  alpha: number;
}

const INV255 = 1 / 255;

export function marchRay(
  bundle: Bundle,
  origin: ArrayLike<number>,
  dir: ArrayLike<number>,
  options: MarchOptions = {},
): RayResult {
  const step = options.step ?? bundle.voxelWidth;
  const epsT = options.terminationTransmittance ?? 0.005;
  const skip = options.skipEmpty ?? true;

  const n = bundle.gridResolution;
  const b = bundle.blockSize;
  const nb = bundle.blocksPerAxis;
  const p = bundle.physicalBlockSize;
  const v = bundle.voxelWidth;
  const [lox, loy, loz] = bundle.boundsMin;
  const edge = n * v;
  const sv = step / v;
  const [apx, apy] = [bundle.atlasBlocks[0] * p, bundle.atlasBlocks[1] * p];
  const { indirection, alpha: alphaVol, diffuse: diffuseVol, feature: featureVol } = bundle;

  const ox = origin[0];
  const oy = origin[1];
  const oz = origin[2];
  const dx = dir[0];
  const dy = dir[1];
  const dz = dir[2];

  const result: RayResult = { diffuse: [0, 0, 0], feature: [0, 0, 0, 0], alpha: 0 };

  let tNear = -Infinity;
  let tFar = Infinity;
  for (let axis = 0; axis < 3; axis++) {
    const o = axis === 0 ? ox : axis === 1 ? oy : oz;
    const d = axis === 0 ? dx : axis === 1 ? dy : dz;
    const loA = axis === 0 ? lox : axis === 1 ? loy : loz;
    const hiA = loA + edge;
    if (d === 0) {
      if (o < loA || o > hiA) {
        return result;
      }
    } else {
      let ta = (loA - o) / d;
      let tb = (hiA - o) / d;
      if (ta > tb) {
        [ta, tb] = [tb, ta];
      }
      if (ta > tNear) tNear = ta;
      if (tb < tFar) tFar = tb;
    }
  }
  if (tFar < 0 || tNear > tFar) {
    return result;
  }

  const t0 = tNear > 0 ? tNear : 0;
  let transmittance = 1;
  let d0 = 0;
  let d1 = 0;
  let d2 = 0;
  let f0 = 0;
  let f1 = 0;
  let f2 = 0;
  let f3 = 0;
  let k = 0;
  for (;;) {
    const t = t0 + (k + 0.5) * step;
    if (t >= tFar) {
      break;
    }
    let gx = (ox + dx * t - lox) / v;
    let gy = (oy + dy * t - loy) / v;
    let gz = (oz + dz * t - loz) / v;
    gx = gx < 0 ? 0 : gx > n ? n : gx;
    gy = gy < 0 ? 0 : gy > n ? n : gy;
    gz = gz < 0 ? 0 : gz > n ? n : gz;
    const ux = gx - 0.5;
    const uy = gy - 0.5;
    const uz = gz - 0.5;
    let bx = Math.floor(ux / b);
    let by = Math.floor(uy / b);
    let bz = Math.floor(uz / b);
    bx = bx < 0 ? 0 : bx >= nb ? nb - 1 : bx;
    by = by < 0 ? 0 : by >= nb ? nb - 1 : by;
    bz = bz < 0 ? 0 : bz >= nb ? nb - 1 : bz;

    const entry = ((bz * nb + by) * nb + bx) * 3;
    const sx = indirection[entry];
    if (sx < 0) {
      if (!skip) {
        k += 1;
        continue;
      }
      // jump to the first sample past this fetch region's exit
      let tExit = Infinity;
      for (let axis = 0; axis < 3; axis++) {
        const bcoord = axis === 0 ? bx : axis === 1 ? by : bz;
        const loA = axis === 0 ? lox : axis === 1 ? loy : loz;
        const o = axis === 0 ? ox : axis === 1 ? oy : oz;
        const d = axis === 0 ? dx : axis === 1 ? dy : dz;
        let glo = bcoord * b + 0.5;
        let ghi = glo + b;
        if (glo < 0) glo = 0;
        if (ghi > n) ghi = n;
        let ta: number;
        if (d > 0) {
          ta = (loA + ghi * v - o) / d;
        } else if (d < 0) {
          ta = (loA + glo * v - o) / d;
        } else {
          continue;
        }
        if (ta < tExit) tExit = ta;
      }
      const kNext = Math.ceil((tExit - t0) / step - 0.5);
      k = kNext > k ? kNext : k + 1;
      continue;
    }

    const aox = sx * p;
    const aoy = indirection[entry + 1] * p;
    const aoz = indirection[entry + 2] * p;

    let ulx = ux - bx * b;
    let uly = uy - by * b;
    let ulz = uz - bz * b;
    ulx = ulx < 0 ? 0 : ulx > b ? b : ulx;
    uly = uly < 0 ? 0 : uly > b ? b : uly;
    ulz = ulz < 0 ? 0 : ulz > b ? b : ulz;

    const nx = Math.min(Math.floor(ulx + 0.5), b);
    const ny = Math.min(Math.floor(uly + 0.5), b);
    const nz = Math.min(Math.floor(ulz + 0.5), b);
    if (alphaVol[((aoz + nz) * apy + aoy + ny) * apx + aox + nx] <= 0) {
      k += 1;
      continue;
    }

    const ix = Math.min(Math.floor(ulx), b - 1);
    const iy = Math.min(Math.floor(uly), b - 1);
    const iz = Math.min(Math.floor(ulz), b - 1);
    const fx = ulx - ix;
    const fy = uly - iy;
    const fz = ulz - iz;
    const x0 = aox + ix;
    const y0 = aoy + iy;
    const z0 = aoz + iz;
    const w000 = (1 - fz) * (1 - fy) * (1 - fx);
    const w001 = (1 - fz) * (1 - fy) * fx;
    const w010 = (1 - fz) * fy * (1 - fx);
    const w011 = (1 - fz) * fy * fx;
    const w100 = fz * (1 - fy) * (1 - fx);
    const w101 = fz * (1 - fy) * fx;
    const w110 = fz * fy * (1 - fx);
    const w111 = fz * fy * fx;

    const i000 = (z0 * apy + y0) * apx + x0;
    const i001 = i000 + 1;
    const i010 = i000 + apx;
    const i011 = i010 + 1;
    const i100 = i000 + apy * apx;
    const i101 = i100 + 1;
    const i110 = i100 + apx;
    const i111 = i110 + 1;

    const a =
      (w000 * alphaVol[i000] +
        w001 * alphaVol[i001] +
        w010 * alphaVol[i010] +
        w011 * alphaVol[i011] +
        w100 * alphaVol[i100] +
        w101 * alphaVol[i101] +
        w110 * alphaVol[i110] +
        w111 * alphaVol[i111]) *
      INV255;
    if (a > 0) {
      // stored opacity is per voxel width; rescale to the actual step
      const aStep = 1 - (1 - a) ** sv;
      const weight = transmittance * aStep;
      for (let c = 0; c < 3; c++) {
        const acc =
          (w000 * diffuseVol[i000 * 3 + c] +
            w001 * diffuseVol[i001 * 3 + c] +
            w010 * diffuseVol[i010 * 3 + c] +
            w011 * diffuseVol[i011 * 3 + c] +
            w100 * diffuseVol[i100 * 3 + c] +
            w101 * diffuseVol[i101 * 3 + c] +
            w110 * diffuseVol[i110 * 3 + c] +
            w111 * diffuseVol[i111 * 3 + c]) *
          INV255;
        if (c === 0) d0 += weight * acc;
        else if (c === 1) d1 += weight * acc;
        else d2 += weight * acc;
      }
      for (let c = 0; c < 4; c++) {
        const acc =
          (w000 * featureVol[i000 * 4 + c] +
            w001 * featureVol[i001 * 4 + c] +
            w010 * featureVol[i010 * 4 + c] +
            w011 * featureVol[i011 * 4 + c] +
            w100 * featureVol[i100 * 4 + c] +
            w101 * featureVol[i101 * 4 + c] +
            w110 * featureVol[i110 * 4 + c] +
            w111 * featureVol[i111 * 4 + c]) *
          INV255;
        if (c === 0) f0 += weight * acc;
        else if (c === 1) f1 += weight * acc;
        else if (c === 2) f2 += weight * acc;
        else f3 += weight * acc;
      }
      transmittance *= 1 - aStep;
      if (transmittance < epsT) {
        break;
      }
    }
    k += 1;
  }

  result.diffuse = [d0, d1, d2];
  result.feature = [f0, f1, f2, f3];
  result.alpha = 1 - transmittance;
  return result;
}

function clamp01(x: number): number {
  return x < 0 ? 0 : x > 1 ? 1 : x;
}

/** Shade one marched ray: deferred residual (alpha > 0 only) plus background. */
export function shadePixel(bundle: Bundle, ray: RayResult, dir: ArrayLike<number>): [number, number, number] {
  const [bgR, bgG, bgB] = bundle.background;
  const rest = 1 - ray.alpha;
  if (ray.alpha === 0) {
    return [
      clamp01(ray.diffuse[0] + rest * bgR),
      clamp01(ray.diffuse[1] + rest * bgG),
      clamp01(ray.diffuse[2] + rest * bgB),
    ];
  }
  const residual = shadeResidual(bundle.mlp, ray.diffuse, ray.feature, dir);
  return [
    clamp01(clamp01(ray.diffuse[0] + residual[0]) + rest * bgR),
    clamp01(clamp01(ray.diffuse[1] + residual[1]) + rest * bgG),
    clamp01(clamp01(ray.diffuse[2] + residual[2]) + rest * bgB),
  ];
}

/** Full-frame software render; returns row-major (height, width, 3) floats in [0, 1]. */
export function renderFrame(bundle: Bundle, camera: CameraSpec, options: MarchOptions = {}): Float64Array {
  const out = new Float64Array(camera.height * camera.width * 3);
  for (let row = 0; row < camera.height; row++) {
    for (let col = 0; col < camera.width; col++) {
      const { origin, dir } = rayThroughPixel(camera, row, col);
      const ray = marchRay(bundle, origin, dir, options);
      const [r, g, bl] = shadePixel(bundle, ray, dir);
      const o = (row * camera.width + col) * 3;
      out[o] = r;
      out[o + 1] = g;
      out[o + 2] = bl;
    }
  }
  return out;
}
