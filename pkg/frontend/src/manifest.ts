/** Bundle manifest parsing and validation. */

export interface MlpLayerSpec {
  rows: number;
  cols: number;
  weights: number[];
  bias: number[];
}

export interface MlpSpec {
  dir_encoding_bands: number;
  layers: MlpLayerSpec[];
  hidden_activation: string;
  output_activation: string;
}

export interface Manifest {
  format_version: number;
  grid_resolution: number;
  block_size: number;
  bounds: { min: number[]; max: number[] };
  atlas_blocks: number[];
  physical_block_size: number;
  slice_tiling: { columns: number; rows: number };
  background_color: number[];
  codec: string;
  mlp: MlpSpec;
  checksums: Record<string, string>;
  timestamp?: string;
}

export const FORMAT_VERSION = 1;

/** Raised for anything structurally wrong with a bundle; `file` names the culprit. */
export class BundleFormatError extends Error {
  constructor(
    message: string,
    readonly file: string = "manifest.json",
  ) {
    super(message);
    this.name = "BundleFormatError";
  }
}

function fail(message: string): never {
  throw new BundleFormatError(message);
}

function asInt(value: unknown, name: string): number {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    fail(`${name} must be an integer, got ${JSON.stringify(value)}`);
  }
  return value;
}

function asVec3(value: unknown, name: string): number[] {
  if (!Array.isArray(value) || value.length !== 3 || value.some((v) => typeof v !== "number")) {
    fail(`${name} must be three numbers`);
  }
  return value as number[];
}

export function parseManifest(json: unknown): Manifest {
  if (typeof json !== "object" || json === null) {
    fail("manifest is not a JSON object");
  }
  const m = json as Record<string, unknown>;
  const version = asInt(m.format_version, "format_version");
  if (version !== FORMAT_VERSION) {
    fail(`unsupported format_version ${version}, expected ${FORMAT_VERSION}`);
  }
  const n = asInt(m.grid_resolution, "grid_resolution");
  const b = asInt(m.block_size, "block_size");
  if (b < 2 || n < b || n % b !== 0) {
    fail(`grid resolution ${n} is not a multiple of block size ${b}`);
  }
  const p = asInt(m.physical_block_size, "physical_block_size");
  if (p !== b + 1) {
    fail(`physical_block_size ${p} does not match block_size ${b}`);
  }
  const bounds = m.bounds as { min?: unknown; max?: unknown } | undefined;
  if (!bounds) {
    fail("bounds missing");
  }
  const lo = asVec3(bounds.min, "bounds.min");
  const hi = asVec3(bounds.max, "bounds.max");
  if (lo.some((v, i) => v >= hi[i])) {
    fail("bounds.min must be strictly below bounds.max");
  }
  const atlasBlocks = asVec3(m.atlas_blocks, "atlas_blocks").map((v) => asInt(v, "atlas_blocks"));
  const tiling = m.slice_tiling as { columns?: unknown; rows?: unknown } | undefined;
  if (!tiling) {
    fail("slice_tiling missing");
  }
  const background = asVec3(m.background_color, "background_color");
  if (background.some((v) => v < 0 || v > 1)) {
    fail("background_color channels must lie in [0, 1]");
  }
  const mlp = m.mlp as MlpSpec | undefined;
  if (!mlp || !Array.isArray(mlp.layers) || mlp.layers.length === 0) {
    fail("mlp section missing or empty");
  }
  for (const layer of mlp.layers) {
    const rows = asInt(layer.rows, "mlp layer rows");
    const cols = asInt(layer.cols, "mlp layer cols");
    if (!Array.isArray(layer.weights) || layer.weights.length !== rows * cols) {
      fail(`mlp layer has ${layer.weights?.length ?? 0} weights, expected ${rows * cols}`);
    }
    if (!Array.isArray(layer.bias) || layer.bias.length !== rows) {
      fail(`mlp layer has ${layer.bias?.length ?? 0} biases, expected ${rows}`);
    }
  }
  const checksums = m.checksums;
  if (typeof checksums !== "object" || checksums === null) {
    fail("checksums missing");
  }
  return {
    format_version: version,
    grid_resolution: n,
    block_size: b,
    bounds: { min: lo, max: hi },
    atlas_blocks: atlasBlocks,
    physical_block_size: p,
    slice_tiling: {
      columns: asInt(tiling.columns, "slice_tiling.columns"),
      rows: asInt(tiling.rows, "slice_tiling.rows"),
    },
    background_color: background,
    codec: String(m.codec ?? ""),
    mlp,
    checksums: checksums as Record<string, string>,
    timestamp: typeof m.timestamp === "string" ? m.timestamp : undefined,
  };
}
