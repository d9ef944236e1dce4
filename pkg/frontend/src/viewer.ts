/** Browser entry point: fetch a bundle, upload it to WebGL2 3D textures, and
 * re-render an orbit view on every interaction. The `?bundle=` query
 * parameter picks the bundle directory (default "bundle", as served next to
 * the viewer by the export server). All bundle access is read-only GETs.
 */

import { assembleBundle, VOLUME_FILES, type Bundle } from "./bundle.js";
import { orbitPose } from "./camera.js";
import { applyDrag, applyWheel } from "./controls.js";
import { BundleFormatError } from "./manifest.js";
import { buildFragmentShader, VERTEX_SHADER } from "./shader.js";
import { ViewerState } from "./state.js";
import type { Sheet } from "./tiling.js";

function element<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing page element #${id}`);
  }
  return el as T;
}

const canvas = element<HTMLCanvasElement>("view");
const bannerEl = element<HTMLDivElement>("banner");
const fpsEl = element<HTMLDivElement>("fps");
const scaleEl = element<HTMLInputElement>("scale");
const skipEl = element<HTMLInputElement>("skip");

function showBanner(message: string): void {
  bannerEl.textContent = message;
  bannerEl.style.display = "block";
}

async function fetchSheet(url: string, name: string): Promise<Sheet> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new BundleFormatError(`${name}: fetch failed (${response.status})`, name);
  }
  let bitmap: ImageBitmap;
  try {
    bitmap = await createImageBitmap(await response.blob());
  } catch {
    throw new BundleFormatError(`${name}: failed to decode image`, name);
  }
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const ctx = scratch.getContext("2d", { willReadFrequently: true });
  if (!ctx) {
    throw new Error("2d canvas unavailable");
  }
  ctx.drawImage(bitmap, 0, 0);
  const image = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { width: image.width, height: image.height, pixels: new Uint8Array(image.data.buffer) };
}

async function loadBundle(baseUrl: string): Promise<Bundle> {
  const manifestUrl = `${baseUrl}/manifest.json`;
  const response = await fetch(manifestUrl);
  if (!response.ok) {
    throw new BundleFormatError(`manifest.json: fetch failed (${response.status})`);
  }
  const manifestJson: unknown = await response.json();
  const sheets: Record<string, Sheet> = {};
  for (const name of VOLUME_FILES) {
    sheets[name] = await fetchSheet(`${baseUrl}/${name}`, name);
  }
  return assembleBundle(manifestJson, sheets);
}

interface GpuBundle {
  program: WebGLProgram;
  uniforms: Record<string, WebGLUniformLocation | null>;
}

function compile(gl: WebGL2RenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type);
  if (!shader) {
    throw new Error("shader allocation failed");
  }
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

function upload3d(
  gl: WebGL2RenderingContext,
  unit: number,
  internal: number,
  format: number,
  type: number,
  size: [number, number, number],
  data: ArrayBufferView,
  filter: number,
): WebGLTexture {
  const texture = gl.createTexture();
  if (!texture) {
    throw new Error("texture allocation failed");
  }
  gl.activeTexture(gl.TEXTURE0 + unit);
  gl.bindTexture(gl.TEXTURE_3D, texture);
  gl.pixelStorei(gl.UNPACK_ALIGNMENT, 1);
  gl.texImage3D(gl.TEXTURE_3D, 0, internal, size[0], size[1], size[2], 0, format, type, data);
  gl.texParameteri(gl.TEXTURE_3D, gl.TEXTURE_MIN_FILTER, filter);
  gl.texParameteri(gl.TEXTURE_3D, gl.TEXTURE_MAG_FILTER, filter);
  gl.texParameteri(gl.TEXTURE_3D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
  gl.texParameteri(gl.TEXTURE_3D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
  gl.texParameteri(gl.TEXTURE_3D, gl.TEXTURE_WRAP_R, gl.CLAMP_TO_EDGE);
  return texture;
}

function uploadBundle(gl: WebGL2RenderingContext, bundle: Bundle): GpuBundle {
  const nb = bundle.blocksPerAxis;
  const p = bundle.physicalBlockSize;
  const [ax, ay, az] = bundle.atlasBlocks;

  // indirection as unsigned integer texels, empty = (255, 255, 255)
  const ind = new Uint8Array(nb * nb * nb * 4);
  for (let i = 0, o = 0; i < bundle.indirection.length; i += 3, o += 4) {
    const empty = bundle.indirection[i] < 0;
    ind[o] = empty ? 255 : bundle.indirection[i];
    ind[o + 1] = empty ? 255 : bundle.indirection[i + 1];
    ind[o + 2] = empty ? 255 : bundle.indirection[i + 2];
    ind[o + 3] = 255;
  }
  upload3d(gl, 0, gl.RGBA8UI, gl.RGBA_INTEGER, gl.UNSIGNED_BYTE, [nb, nb, nb], ind, gl.NEAREST);

  const atlasSize: [number, number, number] = [ax * p, ay * p, az * p];
  upload3d(gl, 1, gl.R8, gl.RED, gl.UNSIGNED_BYTE, atlasSize, bundle.alpha, gl.LINEAR);
  upload3d(gl, 2, gl.RGB8, gl.RGB, gl.UNSIGNED_BYTE, atlasSize, bundle.diffuse, gl.LINEAR);
  upload3d(gl, 3, gl.RGBA8, gl.RGBA, gl.UNSIGNED_BYTE, atlasSize, bundle.feature, gl.LINEAR);

  const program = gl.createProgram();
  if (!program) {
    throw new Error("program allocation failed");
  }
  gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERTEX_SHADER));
  gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, buildFragmentShader(bundle)));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
  }
  gl.useProgram(program);
  for (const [name, unit] of [
    ["u_indirection", 0],
    ["u_alpha", 1],
    ["u_rgb", 2],
    ["u_features", 3],
  ] as const) {
    gl.uniform1i(gl.getUniformLocation(program, name), unit);
  }
  const uniforms: GpuBundle["uniforms"] = {};
  for (const name of [
    "u_origin",
    "u_basis",
    "u_focal",
    "u_image_size",
    "u_background",
    "u_step",
    "u_eps_t",
    "u_skip_empty",
  ]) {
    uniforms[name] = gl.getUniformLocation(program, name);
  }
  return { program, uniforms };
}

function drawFrame(gl: WebGL2RenderingContext, gpu: GpuBundle, bundle: Bundle, state: ViewerState): void {
  const pose = orbitPose(state.radius, state.azimuthDeg, state.elevationDeg, state.target);
  const scale = state.renderScale;
  const width = Math.max(1, Math.round(canvas.clientWidth * scale));
  const height = Math.max(1, Math.round(canvas.clientHeight * scale));
  if (canvas.width !== width || canvas.height !== height) {
    canvas.width = width;
    canvas.height = height;
  }
  gl.viewport(0, 0, width, height);
  gl.useProgram(gpu.program);
  gl.uniform3f(gpu.uniforms.u_origin, pose[3], pose[7], pose[11]);
  gl.uniformMatrix3fv(gpu.uniforms.u_basis, false, [
    pose[0], pose[4], pose[8],
    pose[1], pose[5], pose[9],
    pose[2], pose[6], pose[10],
  ]);
  gl.uniform1f(gpu.uniforms.u_focal, width);
  gl.uniform2f(gpu.uniforms.u_image_size, width, height);
  gl.uniform3f(gpu.uniforms.u_background, bundle.background[0], bundle.background[1], bundle.background[2]);
  gl.uniform1f(gpu.uniforms.u_step, bundle.voxelWidth);
  gl.uniform1f(gpu.uniforms.u_eps_t, 0.005);
  gl.uniform1i(gpu.uniforms.u_skip_empty, skipEl.checked ? 1 : 0);
  gl.drawArrays(gl.TRIANGLES, 0, 3);
}

function attachControls(state: ViewerState, redraw: () => void): void {
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging) {
      return;
    }
    applyDrag(state, e.clientX - lastX, e.clientY - lastY, canvas.clientWidth, canvas.clientHeight);
    lastX = e.clientX;
    lastY = e.clientY;
    redraw();
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    applyWheel(state, e.deltaY < 0 ? 1 : -1);
    redraw();
  });
  scaleEl.addEventListener("input", () => {
    state.renderScale = Number(scaleEl.value);
    redraw();
  });
  skipEl.addEventListener("change", redraw);
}

async function main(): Promise<void> {
  const state = new ViewerState();
  const bundleUrl = new URLSearchParams(window.location.search).get("bundle") ?? "bundle";

  const gl = canvas.getContext("webgl2");
  if (!gl) {
    showBanner("WebGL2 (with 3D texture support) is required to view bundles.");
    return;
  }

  let bundle: Bundle;
  let gpu: GpuBundle;
  try {
    bundle = await loadBundle(bundleUrl);
    state.bundleMeta = bundle.manifest;
    gpu = uploadBundle(gl, bundle);
  } catch (err) {
    const detail = err instanceof BundleFormatError ? `${err.file}: ${err.message}` : String(err);
    showBanner(`Failed to load bundle "${bundleUrl}" - ${detail}`);
    return;
  }

  // center the orbit on the scene volume
  const edge = bundle.gridResolution * bundle.voxelWidth;
  state.target = [
    bundle.boundsMin[0] + edge / 2,
    bundle.boundsMin[1] + edge / 2,
    bundle.boundsMin[2] + edge / 2,
  ];
  state.radius = edge * 1.5;

  let pending = false;
  let lastStamp = 0;
  const redraw = () => {
    if (pending) {
      return; // at most one frame in flight
    }
    pending = true;
    requestAnimationFrame((stamp) => {
      pending = false;
      drawFrame(gl, gpu, bundle, state);
      if (lastStamp > 0) {
        state.recordFrame(stamp - lastStamp);
        fpsEl.textContent = `${state.fps.toFixed(1)} fps`;
      }
      lastStamp = stamp;
    });
  };

  attachControls(state, redraw);
  window.addEventListener("resize", redraw);
  redraw();
}

void main();
