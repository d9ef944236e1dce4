"""Baking: evaluate a continuous scene onto a culled block-sparse grid.

Pipeline: a coarse one-sample-per-voxel density pass feeds opacity and
visibility culling of macroblocks; surviving blocks are re-evaluated with
anti-aliasing supersamples (including the one-voxel positive-face border)
and packed into an atlas.

Supersample offsets come from a counter-based hash generator, so results are
reproducible for a given seed and border voxels agree exactly with the same
voxel evaluated from the neighbouring block.
"""

from __future__ import annotations

import dataclasses
import math

import numba
import numpy as np

from .core import Box
from .grid import SnergGrid, pack_atlas
from .scenes import SceneFunction

_UNIT_BOX = Box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


@dataclasses.dataclass(frozen=True)
class BakeConfig:
    """Grid geometry, culling thresholds and sampling controls for a bake."""

    grid_resolution: int
    block_size: int
    alpha_threshold: float = 0.005
    visibility_threshold: float = 0.01
    supersamples: int = 16
    bounds: Box = _UNIT_BOX
    seed: int = 0

    def __post_init__(self):
        n, b = self.grid_resolution, self.block_size
        if not (isinstance(n, int) and isinstance(b, int)):
            raise ValueError("grid_resolution and block_size must be integers")
        if b < 2 or n < b or n % b:
            raise ValueError(f"grid resolution {n} must be a positive multiple of block size {b} >= 2")
        for name in ("alpha_threshold", "visibility_threshold"):
            t = getattr(self, name)
            if not (np.isfinite(t) and 0.0 <= t < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {t}")
        if self.supersamples < 1:
            raise ValueError("supersamples must be at least 1")
        if not isinstance(self.bounds, Box):
            raise ValueError("bounds must be a Box")
        self.bounds.edge()  # cubic check

    @property
    def blocks_per_axis(self) -> int:
        return self.grid_resolution // self.block_size

    @property
    def voxel_width(self) -> float:
        return self.bounds.edge() / self.grid_resolution


@dataclasses.dataclass
class BlockPayload:
    """Per-voxel channels for one macroblock.

    The culling stage carries alpha only; supersampling fills the emission
    channels (and grows the arrays to the padded physical size).
    """

    alpha: np.ndarray
    diffuse: np.ndarray | None = None
    feature: np.ndarray | None = None


class DenseBlockGrid:
    """Intermediate bake product: every macroblock's payload plus a mask.

    A payload exists exactly for the blocks whose mask bit is set; culling
    clears bits and drops the payloads.
    """

    def __init__(self, config: BakeConfig):
        nb = config.blocks_per_axis
        self.config = config
        self.mask = np.zeros((nb, nb, nb), dtype=bool)
        self.payloads: dict[tuple[int, int, int], BlockPayload] = {}

    def set_payload(self, coord: tuple[int, int, int], payload: BlockPayload) -> None:
        bx, by, bz = coord
        self.mask[bz, by, bx] = True
        self.payloads[coord] = payload

    def release(self, coord: tuple[int, int, int]) -> None:
        bx, by, bz = coord
        self.mask[bz, by, bx] = False
        self.payloads.pop(coord, None)

    def occupied(self) -> list[tuple[int, int, int]]:
        return sorted(self.payloads, key=lambda c: (c[2], c[1], c[0]))

    def dense_alpha(self) -> np.ndarray:
        """Assemble the full per-voxel alpha volume (zero where unpopulated)."""
        n, b = self.config.grid_resolution, self.config.block_size
        dense = np.zeros((n, n, n), dtype=np.float32)
        for (bx, by, bz), payload in self.payloads.items():
            core = payload.alpha[:b, :b, :b]  # padded payloads contribute their interior
            dense[bz * b : (bz + 1) * b, by * b : (by + 1) * b, bx * b : (bx + 1) * b] = core
        return dense


# Counter-based generator: stateless uint64 hashing (splitmix64 finalizer),
# so any sample can be computed independently of evaluation order.
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _hash_uniform(seed: int, counters: np.ndarray) -> np.ndarray:
    """Deterministic uniforms in [0, 1) for integer counters."""
    with np.errstate(over="ignore"):
        k = counters.astype(np.uint64)
        s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * np.uint64(0xD1B54A32D192ED03)
        h = _mix64(_mix64(k * _GOLDEN + s) + _GOLDEN)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def _gauss_offsets(seed: int, count: int) -> np.ndarray:
    """(count, 3) unit-variance Gaussian draws via Box-Muller."""
    counters = np.arange(count * 3 * 2, dtype=np.uint64).reshape(count, 3, 2)
    u = _hash_uniform(seed, counters)
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))  # 1 - u in (0, 1], log finite
    return radius * np.cos(2.0 * np.pi * u[..., 1])


def voxel_supersample(scene: SceneFunction, center, voxel_width: float, count: int, seed: int):
    """Anti-aliased voxel response: average of Gaussian-jittered scene probes.

    Draws ``count`` points from an isotropic Gaussian (std ``voxel_width /
    sqrt(12)``, matching the variance of a uniform voxel) about ``center``,
    averages densities and emissions, and converts the mean density to
    ``alpha = 1 - exp(-mean_density * voxel_width)``.

    Returns ``(alpha, diffuse (3,), feature (4,))``.
    """
    if voxel_width <= 0.0:
        raise ValueError(f"voxel_width must be positive, got {voxel_width}")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    offsets = _gauss_offsets(seed, count) * (voxel_width / math.sqrt(12.0))
    pts = np.asarray(center, dtype=np.float64) + offsets
    density, diffuse, feature = scene.evaluate(pts)
    alpha = float(-np.expm1(-np.mean(density) * voxel_width))
    return alpha, np.mean(diffuse, axis=0), np.mean(feature, axis=0)


def _supersample_block(scene: SceneFunction, config: BakeConfig, coord, offsets: np.ndarray):
    """Padded (B+1)^3 payload channels for one surviving macroblock."""
    b = config.block_size
    p = b + 1
    v = config.voxel_width
    lo = config.bounds.lo
    bx, by, bz = coord
    gx = bx * b + np.arange(p)
    gy = by * b + np.arange(p)
    gz = bz * b + np.arange(p)
    zs, ys, xs = np.meshgrid(lo[2] + (gz + 0.5) * v, lo[1] + (gy + 0.5) * v, lo[0] + (gx + 0.5) * v, indexing="ij")
    centers = np.stack([xs, ys, zs], axis=-1)  # (p, p, p, 3)
    pts = centers[..., None, :] + offsets
    density, diffuse, feature = scene.evaluate(pts)
    alpha = -np.expm1(-np.mean(density, axis=3) * v)
    return (
        np.clip(alpha, 0.0, 1.0).astype(np.float32),
        np.clip(np.mean(diffuse, axis=3), 0.0, 1.0).astype(np.float32),
        np.clip(np.mean(feature, axis=3), 0.0, 1.0).astype(np.float32),
    )


def _coarse_alpha(scene: SceneFunction, config: BakeConfig) -> np.ndarray:
    """One centre sample per voxel, converted to per-voxel-width alpha."""
    n = config.grid_resolution
    v = config.voxel_width
    lo = config.bounds.lo
    centers = (np.arange(n) + 0.5) * v
    xs, ys, zs = lo[0] + centers, lo[1] + centers, lo[2] + centers
    alpha = np.empty((n, n, n), dtype=np.float32)
    chunk = max(1, int(4_000_000 // (n * n)))
    for z0 in range(0, n, chunk):
        zblk, yblk, xblk = np.meshgrid(zs[z0 : z0 + chunk], ys, xs, indexing="ij")
        pts = np.stack([xblk, yblk, zblk], axis=-1)
        density, _, _ = scene.evaluate(pts)
        alpha[z0 : z0 + chunk] = -np.expm1(-density * v)
    return alpha


def _camera_positions(cameras) -> np.ndarray:
    positions = [np.asarray(getattr(cam, "position", cam), dtype=np.float64) for cam in cameras]
    out = np.array(positions, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError("cameras must provide 3-vector positions")
    return out


def compute_visibility(density_grid, voxel, cameras, bounds: Box) -> float:
    """Maximum transmittance from a voxel's centre toward any camera.

    Marches at one-voxel steps through ``density_grid`` (a dense per-voxel
    alpha volume indexed [z][y][x]), starting one step away from the centre so
    the voxel's own opacity is excluded, and multiplies up ``1 - alpha`` of
    each visited voxel until the path leaves the grid or reaches the camera.
    """
    grid = np.asarray(density_grid, dtype=np.float64)
    if grid.ndim != 3 or len(set(grid.shape)) != 1:
        raise ValueError(f"density_grid must be a cube, got shape {grid.shape}")
    n = grid.shape[0]
    ix, iy, iz = (int(c) for c in voxel)
    if not (0 <= ix < n and 0 <= iy < n and 0 <= iz < n):
        raise ValueError(f"voxel {voxel!r} outside the {n}^3 grid")
    v = bounds.edge() / n
    lo = bounds.lo
    center = lo + (np.array([ix, iy, iz], dtype=np.float64) + 0.5) * v
    best = 0.0
    for pos in _camera_positions(cameras):
        delta = pos - center
        dist = float(np.linalg.norm(delta))
        if dist == 0.0:
            return 1.0
        direction = delta / dist
        transmittance = 1.0
        t = v
        while t < dist:
            g = (center + direction * t - lo) / v
            if np.any(g < 0.0) or np.any(g >= n):
                break
            transmittance *= 1.0 - grid[int(g[2]), int(g[1]), int(g[0])]
            if transmittance < 1e-15:
                break
            t += v
        best = max(best, transmittance)
    return best


@numba.njit(cache=True)
def _block_visible(alpha, lox, loy, loz, v, n, vx0, vy0, vz0, bsize, cams, tau_vis):
    """True once any voxel of the block sees any camera with T >= tau_vis.

    Mirrors compute_visibility but stops a march as soon as its running
    transmittance falls below the threshold (it can only decrease), and stops
    the block as soon as one voxel-camera pair passes. Decision-equivalent to
    thresholding the exact per-voxel maximum.
    """
    for lz in range(bsize):
        wz = loz + (vz0 + lz + 0.5) * v
        for ly in range(bsize):
            wy = loy + (vy0 + ly + 0.5) * v
            for lx in range(bsize):
                wx = lox + (vx0 + lx + 0.5) * v
                for c in range(cams.shape[0]):
                    dx = cams[c, 0] - wx
                    dy = cams[c, 1] - wy
                    dz = cams[c, 2] - wz
                    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
                    if dist == 0.0:
                        return True
                    dx /= dist
                    dy /= dist
                    dz /= dist
                    transmittance = 1.0
                    t = v
                    while t < dist:
                        gx = (wx + dx * t - lox) / v
                        gy = (wy + dy * t - loy) / v
                        gz = (wz + dz * t - loz) / v
                        if gx < 0.0 or gx >= n or gy < 0.0 or gy >= n or gz < 0.0 or gz >= n:
                            break
                        transmittance *= 1.0 - alpha[int(gz), int(gy), int(gx)]
                        if transmittance < tau_vis:
                            break
                        t += v
                    if transmittance >= tau_vis:
                        return True
    return False


def cull_blocks(grid: DenseBlockGrid, cameras, config: BakeConfig) -> np.ndarray:
    """Drop macroblocks that are transparent or invisible from every camera.

    A block survives iff its maximum voxel alpha reaches the opacity
    threshold and, with a positive visibility threshold, some voxel's
    transmittance toward some camera reaches it. Occlusion is measured on the
    pre-culling volume. Returns the keep mask; culled payloads are released.
    """
    tau_a = config.alpha_threshold
    tau_vis = config.visibility_threshold
    b = config.block_size
    candidates = [c for c in grid.occupied() if float(np.max(grid.payloads[c].alpha)) >= tau_a]

    if tau_vis > 0.0 and candidates:
        dense = grid.dense_alpha()
        positions = _camera_positions(cameras)
        lo = config.bounds.lo
        v = config.voxel_width
        n = config.grid_resolution
        candidates = [
            (bx, by, bz)
            for bx, by, bz in candidates
            if _block_visible(dense, lo[0], lo[1], lo[2], v, n, bx * b, by * b, bz * b, b, positions, tau_vis)
        ]

    keep = np.zeros_like(grid.mask)
    for bx, by, bz in candidates:
        keep[bz, by, bx] = True
    for coord in grid.occupied():
        bx, by, bz = coord
        if not keep[bz, by, bx]:
            grid.release(coord)
    return keep


def bake(scene: SceneFunction, cameras, config: BakeConfig) -> SnergGrid:
    """Full bake: coarse pass, culling, supersampling, atlas packing."""
    b = config.block_size
    nb = config.blocks_per_axis

    coarse = _coarse_alpha(scene, config)
    dbg = DenseBlockGrid(config)
    for bz in range(nb):
        for by in range(nb):
            for bx in range(nb):
                view = coarse[bz * b : (bz + 1) * b, by * b : (by + 1) * b, bx * b : (bx + 1) * b]
                dbg.set_payload((bx, by, bz), BlockPayload(alpha=view))
    cull_blocks(dbg, cameras, config)

    offsets = _gauss_offsets(config.seed, config.supersamples) * (config.voxel_width / math.sqrt(12.0))
    payloads = {}
    for coord in dbg.occupied():
        payloads[coord] = _supersample_block(scene, config, coord, offsets)
    return pack_atlas(payloads, config.grid_resolution, b, config.bounds)
