import { describe, expect, it } from "vitest";

import { VERTEX_SHADER, buildFragmentShader } from "../src/shader.js";
import { loadFixtureBundle } from "./helpers.js";

function braceBalance(source: string): number {
  let depth = 0;
  for (const ch of source) {
    if (ch === "{") depth++;
    else if (ch === "}") depth--;
  }
  return depth;
}

describe("buildFragmentShader", () => {
  it("emits a complete GLSL 3.00 program", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    const source = buildFragmentShader(bundle);
    expect(source.startsWith("#version 300 es")).toBe(true);
    expect(source).toContain("void main()");
    expect(braceBalance(source)).toBe(0);
    expect(source).not.toMatch(/\b(NaN|Infinity)\b/);
  });

  it("bakes the bundle geometry into constants", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    const source = buildFragmentShader(bundle);
    expect(source).toContain(`const float N = ${bundle.gridResolution}.0;`);
    expect(source).toContain(`const float B = ${bundle.blockSize}.0;`);
    expect(source).toContain(`const int NB = ${bundle.blocksPerAxis};`);
    expect(source).toContain(`const float P = ${bundle.physicalBlockSize}.0;`);
    expect(source).toContain(`const int BANDS = ${bundle.mlp.bands};`);
    expect(source).toContain(`const float VOXEL = ${bundle.voxelWidth};`);
  });

  it("inlines every network weight and bias as shader constants", () => {
    const bundle = loadFixtureBundle("slab_bundle");
    const source = buildFragmentShader(bundle);
    for (const name of ["W0", "B0", "W1", "B1", "W2", "B2"]) {
      expect(source).toContain(`const float ${name}[`);
    }
    // Spot-check actual values survive the float formatter.
    for (const layer of bundle.mlp.layers) {
      const bias = layer.bias[0];
      expect(source).toContain(bias.toString().includes(".") || bias.toString().includes("e")
        ? bias.toString()
        : `${bias}.0`);
    }
    // Weight counts match the layer shapes: every array is fully populated.
    const counts = source.match(/const float W\d\[(\d+)\]/g);
    expect(counts).not.toBeNull();
    const sizes = counts!.map((m) => Number(m.match(/\[(\d+)\]/)![1]));
    expect(sizes).toEqual(bundle.mlp.layers.map((l) => l.rows * l.cols));
  });

  it("declares the sampler and camera uniforms the viewer binds", () => {
    const bundle = loadFixtureBundle("spheres_bundle");
    const source = buildFragmentShader(bundle);
    for (const uniform of [
      "uniform usampler3D u_indirection;",
      "uniform sampler3D u_alpha;",
      "uniform sampler3D u_rgb;",
      "uniform sampler3D u_features;",
      "uniform vec3 u_origin;",
      "uniform mat3 u_basis;",
      "uniform float u_focal;",
      "uniform vec2 u_image_size;",
      "uniform vec3 u_background;",
      "uniform int u_skip_empty;",
    ]) {
      expect(source).toContain(uniform);
    }
  });

  it("formats every inlined float as a valid GLSL literal", () => {
    const bundle = loadFixtureBundle("tiny_bundle");
    const source = buildFragmentShader(bundle);
    const arrays = source.match(/float\[\]\(([^)]*)\)/g);
    expect(arrays).not.toBeNull();
    for (const arr of arrays!) {
      for (const token of arr.slice("float[](".length, -1).split(",")) {
        const text = token.trim();
        expect(text).toMatch(/^-?\d/);
        expect(Number.isFinite(Number(text))).toBe(true);
        // GLSL float literals need a decimal point or exponent
        expect(text).toMatch(/[.e]/);
      }
    }
  });
});

describe("VERTEX_SHADER", () => {
  it("is a self-contained fullscreen pass", () => {
    expect(VERTEX_SHADER.startsWith("#version 300 es")).toBe(true);
    expect(VERTEX_SHADER).toContain("gl_VertexID");
    expect(VERTEX_SHADER).toContain("gl_Position");
    expect(braceBalance(VERTEX_SHADER)).toBe(0);
  });
});
