/** The deferred shading network: plain nested-loop inference.
 *
 * Input layout is [diffuse(3), feature(4), direction(3), sin/cos pairs of the
 * direction at frequencies 2^j * pi for j < bands]. Hidden layers are ReLU,
 * the output is a sigmoid residual added to the accumulated diffuse color.
 */

import { BundleFormatError, type MlpSpec } from "./manifest.js";

export interface Layer {
  rows: number;
  cols: number;
  weights: Float64Array;
  bias: Float64Array;
}

export interface Mlp {
  bands: number;
  layers: Layer[];
  inputWidth: number;
}

export function inputWidth(bands: number): number {
  return 3 + 4 + 3 * (1 + 2 * bands);
}

export function mlpFromSpec(spec: MlpSpec): Mlp {
  const bands = spec.dir_encoding_bands;
  if (!Number.isInteger(bands) || bands < 0) {
    throw new BundleFormatError(`dir_encoding_bands must be a non-negative integer, got ${bands}`);
  }
  const layers: Layer[] = spec.layers.map((layer) => ({
    rows: layer.rows,
    cols: layer.cols,
    weights: Float64Array.from(layer.weights),
    bias: Float64Array.from(layer.bias),
  }));
  const width = inputWidth(bands);
  if (layers[0].cols !== width) {
    throw new BundleFormatError(
      `mlp expects input width ${layers[0].cols} but ${bands} bands encode to ${width}`,
    );
  }
  for (let i = 1; i < layers.length; i++) {
    if (layers[i].cols !== layers[i - 1].rows) {
      throw new BundleFormatError(`mlp layer ${i} width ${layers[i].cols} does not chain`);
    }
  }
  if (layers[layers.length - 1].rows !== 3) {
    throw new BundleFormatError("mlp must end in a 3-channel residual");
  }
  return { bands, layers, inputWidth: width };
}

export function encodeDirection(dir: ArrayLike<number>, bands: number): Float64Array {
  const out = new Float64Array(3 * (1 + 2 * bands));
  out[0] = dir[0];
  out[1] = dir[1];
  out[2] = dir[2];
  let o = 3;
  for (let j = 0; j < bands; j++) {
    const freq = Math.PI * 2 ** j;
    for (let c = 0; c < 3; c++) {
      out[o + c] = Math.sin(freq * dir[c]);
      out[o + 3 + c] = Math.cos(freq * dir[c]);
    }
    o += 6;
  }
  return out;
}

function sigmoid(z: number): number {
  if (z >= 0) {
    return 1 / (1 + Math.exp(-z));
  }
  const ez = Math.exp(z);
  return ez / (1 + ez);
}

/** Forward pass on one pixel's accumulated values; returns the RGB residual. */
export function shadeResidual(
  mlp: Mlp,
  diffuse: ArrayLike<number>,
  feature: ArrayLike<number>,
  direction: ArrayLike<number>,
): Float64Array {
  let x = new Float64Array(mlp.inputWidth);
  x[0] = diffuse[0];
  x[1] = diffuse[1];
  x[2] = diffuse[2];
  for (let c = 0; c < 4; c++) {
    x[3 + c] = feature[c];
  }
  x.set(encodeDirection(direction, mlp.bands), 7);

  for (let li = 0; li < mlp.layers.length; li++) {
    const { rows, cols, weights, bias } = mlp.layers[li];
    const y = new Float64Array(rows);
    for (let r = 0; r < rows; r++) {
      let acc = bias[r];
      const base = r * cols;
      for (let c = 0; c < cols; c++) {
        acc += weights[base + c] * x[c];
      }
      y[r] = li === mlp.layers.length - 1 ? sigmoid(acc) : Math.max(acc, 0);
    }
    x = y;
  }
  return x;
}
