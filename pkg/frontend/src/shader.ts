/** Fragment shader source generation for a loaded bundle.
 *
 * Grid geometry and every network parameter are baked into the source as
 * constants (biases included), so a bundle swap means a shader rebuild. The
 * marching loop is line-for-line the same algorithm as `march.ts`; the only
 * deliberate difference is that trilinear fetches use hardware texture
 * filtering instead of eight explicit reads.
 */

import type { Bundle } from "./bundle.js";

export const VERTEX_SHADER = `#version 300 es
void main() {
  // fullscreen triangle from gl_VertexID, no buffers needed
  vec2 corner = vec2((gl_VertexID << 1) & 2, gl_VertexID & 2);
  gl_Position = vec4(corner * 2.0 - 1.0, 0.0, 1.0);
}
`;

function f(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`cannot embed non-finite constant ${x}`);
  }
  const s = String(x);
  return /[.e]/.test(s) ? s : `${s}.0`;
}

function floatArray(name: string, values: ArrayLike<number>): string {
  const parts = new Array<string>(values.length);
  for (let i = 0; i < values.length; i++) {
    parts[i] = f(values[i]);
  }
  return `const float ${name}[${values.length}] = float[](${parts.join(", ")});`;
}

export function buildFragmentShader(bundle: Bundle): string {
  const { mlp } = bundle;
  if (mlp.layers.length !== 3) {
    throw new Error(`shader generator expects 3 network layers, got ${mlp.layers.length}`);
  }
  const [l0, l1, l2] = mlp.layers;
  const hidden = l0.rows;
  const p = bundle.physicalBlockSize;
  const atlasTexels = [
    bundle.atlasBlocks[0] * p,
    bundle.atlasBlocks[1] * p,
    bundle.atlasBlocks[2] * p,
  ];

  return `#version 300 es
precision highp float;
precision highp int;
precision highp sampler3D;
precision highp usampler3D;

uniform vec3 u_origin;
uniform mat3 u_basis;      // camera axes as columns; view dir is -z
uniform float u_focal;
uniform vec2 u_image_size;
uniform vec3 u_background;
uniform float u_step;
uniform float u_eps_t;
uniform int u_skip_empty;

uniform usampler3D u_indirection;
uniform sampler3D u_alpha;
uniform sampler3D u_rgb;
uniform sampler3D u_features;

const float N = ${f(bundle.gridResolution)};
const float B = ${f(bundle.blockSize)};
const int NB = ${bundle.blocksPerAxis};
const float P = ${f(p)};
const float VOXEL = ${f(bundle.voxelWidth)};
const vec3 LO = vec3(${f(bundle.boundsMin[0])}, ${f(bundle.boundsMin[1])}, ${f(bundle.boundsMin[2])});
const vec3 ATLAS_TEXELS = vec3(${f(atlasTexels[0])}, ${f(atlasTexels[1])}, ${f(atlasTexels[2])});
const int BANDS = ${mlp.bands};
const int IN_WIDTH = ${mlp.inputWidth};
const int HIDDEN = ${hidden};
const float PI = 3.14159265358979;

// deferred shading network, baked in at load time
${floatArray("W0", l0.weights)}
${floatArray("B0", l0.bias)}
${floatArray("W1", l1.weights)}
${floatArray("B1", l1.bias)}
${floatArray("W2", l2.weights)}
${floatArray("B2", l2.bias)}

out vec4 fragColor;

vec3 shadeResidual(vec3 diffuse, vec4 feature, vec3 dir) {
  float x[IN_WIDTH];
  x[0] = diffuse.r;
  x[1] = diffuse.g;
  x[2] = diffuse.b;
  x[3] = feature.x;
  x[4] = feature.y;
  x[5] = feature.z;
  x[6] = feature.w;
  x[7] = dir.x;
  x[8] = dir.y;
  x[9] = dir.z;
  int o = 10;
  for (int j = 0; j < BANDS; j++) {
    float freq = PI * exp2(float(j));
    for (int c = 0; c < 3; c++) {
      x[o + c] = sin(freq * dir[c]);
      x[o + 3 + c] = cos(freq * dir[c]);
    }
    o += 6;
  }
  float h0[HIDDEN];
  for (int r = 0; r < HIDDEN; r++) {
    float acc = B0[r];
    for (int c = 0; c < IN_WIDTH; c++) {
      acc += W0[r * IN_WIDTH + c] * x[c];
    }
    h0[r] = max(acc, 0.0);
  }
  float h1[HIDDEN];
  for (int r = 0; r < HIDDEN; r++) {
    float acc = B1[r];
    for (int c = 0; c < HIDDEN; c++) {
      acc += W1[r * HIDDEN + c] * h0[c];
    }
    h1[r] = max(acc, 0.0);
  }
  vec3 res;
  for (int r = 0; r < 3; r++) {
    float acc = B2[r];
    for (int c = 0; c < HIDDEN; c++) {
      acc += W2[r * HIDDEN + c] * h1[c];
    }
    res[r] = 1.0 / (1.0 + exp(-acc));
  }
  return res;
}

void main() {
  vec2 pixel = gl_FragCoord.xy;
  // flip y: framebuffer row 0 is the bottom, image row 0 the top
  vec3 dCam = vec3(
    (pixel.x - u_image_size.x * 0.5) / u_focal,
    (u_image_size.y * 0.5 - pixel.y) / u_focal,
    -1.0
  );
  vec3 dir = normalize(u_basis * dCam);
  vec3 origin = u_origin;

  float edge = N * VOXEL;
  vec3 invDir = 1.0 / dir;  // IEEE inf on zero components is fine below
  vec3 ta = (LO - origin) * invDir;
  vec3 tb = (LO + vec3(edge) - origin) * invDir;
  vec3 tmin = min(ta, tb);
  vec3 tmax = max(ta, tb);
  float tNear = max(max(tmin.x, tmin.y), tmin.z);
  float tFar = min(min(tmax.x, tmax.y), tmax.z);
  if (tFar < 0.0 || tNear > tFar) {
    fragColor = vec4(u_background, 1.0);
    return;
  }

  float t0 = max(tNear, 0.0);
  float sv = u_step / VOXEL;
  float transmittance = 1.0;
  vec3 accDiffuse = vec3(0.0);
  vec4 accFeature = vec4(0.0);

  float k = 0.0;
  for (int guard = 0; guard < 4096; guard++) {
    float t = t0 + (k + 0.5) * u_step;
    if (t >= tFar) {
      break;
    }
    vec3 g = clamp((origin + dir * t - LO) / VOXEL, vec3(0.0), vec3(N));
    vec3 u = g - 0.5;
    ivec3 blk = clamp(ivec3(floor(u / B)), ivec3(0), ivec3(NB - 1));

    uvec3 slot = texelFetch(u_indirection, blk, 0).xyz;
    if (slot.x == 255u && slot.y == 255u && slot.z == 255u) {
      if (u_skip_empty == 0) {
        k += 1.0;
        continue;
      }
      // step over the whole empty fetch region
      vec3 glo = clamp(vec3(blk) * B + 0.5, vec3(0.0), vec3(N));
      vec3 ghi = clamp(vec3(blk) * B + 0.5 + B, vec3(0.0), vec3(N));
      vec3 bounds = mix(glo, ghi, step(vec3(0.0), dir));
      vec3 tExitAxes = (LO + bounds * VOXEL - origin) * invDir;
      float tExit = min(min(
        dir.x == 0.0 ? 1e30 : tExitAxes.x,
        dir.y == 0.0 ? 1e30 : tExitAxes.y),
        dir.z == 0.0 ? 1e30 : tExitAxes.z);
      float kNext = ceil((tExit - t0) / u_step - 0.5);
      k = max(kNext, k + 1.0);
      continue;
    }

    vec3 atlasOrigin = vec3(slot) * P;
    vec3 ul = clamp(u - vec3(blk) * B, vec3(0.0), vec3(B));
    ivec3 nearest = ivec3(min(floor(ul + 0.5), vec3(B)));
    float nearAlpha = texelFetch(u_alpha, ivec3(atlasOrigin) + nearest, 0).r;
    if (nearAlpha <= 0.0) {
      k += 1.0;
      continue;
    }

    vec3 tex = (atlasOrigin + ul + 0.5) / ATLAS_TEXELS;
    float a = texture(u_alpha, tex).r;
    if (a > 0.0) {
      // stored opacity is per voxel width; rescale to the step length
      float aStep = 1.0 - pow(1.0 - a, sv);
      float weight = transmittance * aStep;
      accDiffuse += weight * texture(u_rgb, tex).rgb;
      accFeature += weight * texture(u_features, tex);
      transmittance *= 1.0 - aStep;
      if (transmittance < u_eps_t) {
        break;
      }
    }
    k += 1.0;
  }

  float alpha = 1.0 - transmittance;
  vec3 color = accDiffuse;
  if (alpha > 0.0) {
    color = clamp(accDiffuse + shadeResidual(accDiffuse, accFeature, dir), 0.0, 1.0);
  }
  fragColor = vec4(clamp(color + transmittance * u_background, 0.0, 1.0), 1.0);
}
`;
}
