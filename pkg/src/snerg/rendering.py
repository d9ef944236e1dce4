"""Ray marching over a baked grid with skipping and deferred shading.

Coordinate conventions: a world point maps to continuous grid coordinates
``g = (p - lo) / v`` in ``[0, N]``. Stored samples sit at voxel centres, so
on the sample lattice ``u = g - 0.5`` the lattice point ``u = i`` holds voxel
``i``'s value. Block membership for fetching follows the sample lattice
(``block = floor(u / B)``), which keeps all eight trilinear corners inside
one padded physical block; the half-voxel offset between fetch blocks and
logical blocks is the price of seam-free filtering.

The hot march loop is compiled with numba; every public result is also
reproducible by the pure-numpy :func:`trilinear_sample` reference, which the
tests use as the oracle. The ``SNERG_THREADS`` environment variable caps the
number of worker threads (default: hardware concurrency).
"""

from __future__ import annotations

import dataclasses
import os
import time

import numba
import numpy as np

from .core import (
    Camera,
    Ray,
    RayAccumulation,
    composite_batch,
    generate_rays,
    orbit_cameras,
    ray_box_intersect_batch,
)
from .grid import QuantizedGrid, SnergGrid
from .mlp import DeferredMlp, shade_deferred, shade_deferred_batch

_REPORT_KEYS = (
    "frames",
    "width",
    "height",
    "frame_ms_mean",
    "frame_ms_min",
    "frame_ms_max",
    "march_ms_mean",
    "shade_ms_mean",
)


@dataclasses.dataclass(frozen=True)
class RenderConfig:
    """March controls plus the image/orbit geometry used by the benchmark.

    ``step_size`` of None means one voxel width of the grid being rendered.
    ``focal`` of None means a focal length equal to the image width
    (roughly a 53-degree field of view).
    """

    step_size: float | None = None
    termination_transmittance: float = 0.005
    background: tuple[float, float, float] = (1.0, 1.0, 1.0)
    unpremultiply: bool = False
    skip_empty: bool = True
    width: int = 800
    height: int = 800
    orbit_radius: float = 3.0
    orbit_elevation_deg: float = 20.0
    focal: float | None = None

    def __post_init__(self):
        if self.step_size is not None and not (np.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        eps = self.termination_transmittance
        if not (np.isfinite(eps) and 0.0 <= eps < 1.0):
            raise ValueError(f"termination_transmittance must lie in [0, 1), got {eps}")
        bg = np.asarray(self.background, dtype=np.float64)
        if bg.shape != (3,) or np.any(bg < 0.0) or np.any(bg > 1.0):
            raise ValueError("background must be three channels in [0, 1]")
        object.__setattr__(self, "background", tuple(float(c) for c in bg))
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.orbit_radius <= 0.0:
            raise ValueError("orbit_radius must be positive")
        if not -90.0 < self.orbit_elevation_deg < 90.0:
            raise ValueError("orbit_elevation_deg must lie in (-90, 90)")
        if self.focal is not None and self.focal <= 0.0:
            raise ValueError("focal must be positive")

    def resolved_step(self, grid) -> float:
        return self.step_size if self.step_size is not None else grid.voxel_width


def _configure_threads() -> None:
    env = os.environ.get("SNERG_THREADS")
    if env:
        requested = int(env)
        if requested < 1:
            raise ValueError(f"SNERG_THREADS must be a positive integer, got {env!r}")
        numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))


def _atlas_float(grid, dtype=np.float32):
    """Atlas channel volumes as floats in [0, 1] (dequantizing 8-bit codes)."""
    if isinstance(grid, QuantizedGrid):
        return (
            (grid.atlas_alpha.astype(dtype) / dtype(255.0)).astype(dtype),
            (grid.atlas_diffuse.astype(dtype) / dtype(255.0)).astype(dtype),
            (grid.atlas_feature.astype(dtype) / dtype(255.0)).astype(dtype),
        )
    return (
        grid.atlas_alpha.astype(dtype, copy=False),
        grid.atlas_diffuse.astype(dtype, copy=False),
        grid.atlas_feature.astype(dtype, copy=False),
    )


@dataclasses.dataclass(frozen=True)
class _GridArrays:
    """Plain-array view of a grid, ready for the compiled kernel."""

    lo: np.ndarray
    voxel_width: float
    n: int
    b: int
    nb: int
    indirection: np.ndarray
    alpha: np.ndarray
    diffuse: np.ndarray
    feature: np.ndarray


def _grid_arrays(grid) -> _GridArrays:
    alpha, diffuse, feature = _atlas_float(grid)
    return _GridArrays(
        lo=np.asarray(grid.bounds.lo, dtype=np.float64),
        voxel_width=grid.voxel_width,
        n=grid.grid_resolution,
        b=grid.block_size,
        nb=grid.blocks_per_axis,
        indirection=np.ascontiguousarray(grid.indirection),
        alpha=np.ascontiguousarray(alpha),
        diffuse=np.ascontiguousarray(diffuse),
        feature=np.ascontiguousarray(feature),
    )


def trilinear_sample(grid, position):
    """Fetch (alpha, diffuse, feature) at continuous grid coordinates.

    Pure-numpy reference for the compiled march kernel. Returns None when the
    position's fetch block is empty. A nearest-neighbour alpha pre-check runs
    first: when that texel's alpha is zero the colour and feature channels
    are never read and exact zeros come back.
    """
    pos = np.asarray(position, dtype=np.float64)
    if pos.shape != (3,):
        raise ValueError(f"position must be a 3-vector, got shape {pos.shape}")
    n, b = grid.grid_resolution, grid.block_size
    if np.any(pos < 0.0) or np.any(pos > n):
        raise ValueError(f"position {pos} outside the [0, {n}]^3 grid")

    u = pos - 0.5
    block = np.clip(np.floor(u / b).astype(int), 0, grid.blocks_per_axis - 1)
    entry = grid.indirection[block[2], block[1], block[0]]
    if entry[0] < 0:
        return None

    alpha_vol, diffuse_vol, feature_vol = _atlas_float(grid, dtype=np.float64)
    p = b + 1
    origin = np.asarray(entry, dtype=int) * p  # atlas texel origin, (x, y, z)
    ul = np.clip(u - block * b, 0.0, float(b))
    nearest = np.minimum(np.floor(ul + 0.5).astype(int), b)
    near_alpha = float(alpha_vol[origin[2] + nearest[2], origin[1] + nearest[1], origin[0] + nearest[0]])
    if near_alpha <= 0.0:
        return 0.0, np.zeros(3), np.zeros(4)

    i0 = np.minimum(ul.astype(int), b - 1)
    f = ul - i0
    wx = np.array([1.0 - f[0], f[0]])
    wy = np.array([1.0 - f[1], f[1]])
    wz = np.array([1.0 - f[2], f[2]])
    weights = wz[:, None, None] * wy[None, :, None] * wx[None, None, :]
    zs = slice(origin[2] + i0[2], origin[2] + i0[2] + 2)
    ys = slice(origin[1] + i0[1], origin[1] + i0[1] + 2)
    xs = slice(origin[0] + i0[0], origin[0] + i0[0] + 2)
    alpha = float(np.sum(weights * alpha_vol[zs, ys, xs].astype(np.float64)))
    diffuse = np.sum(weights[..., None] * diffuse_vol[zs, ys, xs].astype(np.float64), axis=(0, 1, 2))
    feature = np.sum(weights[..., None] * feature_vol[zs, ys, xs].astype(np.float64), axis=(0, 1, 2))
    return alpha, diffuse, feature


@numba.njit(cache=True)
def _march_kernel(origins, dirs, lox, loy, loz, v, n, b, nb, indirection, alpha_vol, diffuse_vol, feature_vol, step, eps_t, skip):
    # Serial over rays: pixels are independent, so this could be a parallel
    # loop on multicore hardware, but the serial compilation path is kept for
    # bitwise-stable output everywhere.
    m = origins.shape[0]
    out_diffuse = np.zeros((m, 3))
    out_feature = np.zeros((m, 4))
    out_alpha = np.zeros(m)
    edge = n * v
    p = b + 1
    sv = step / v
    inv_v = 1.0 / v
    inv_b = 1.0 / b
    inv_step = 1.0 / step
    for r in range(m):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        # reciprocals keep the hot loop division-free; zero directions are
        # guarded at every use
        invdx = 1.0 / dx if dx != 0.0 else 0.0
        invdy = 1.0 / dy if dy != 0.0 else 0.0
        invdz = 1.0 / dz if dz != 0.0 else 0.0

        # slab intersection with the grid box
        t_near = -np.inf
        t_far = np.inf
        miss = False
        for axis in range(3):
            o = ox if axis == 0 else (oy if axis == 1 else oz)
            d = dx if axis == 0 else (dy if axis == 1 else dz)
            lo_a = lox if axis == 0 else (loy if axis == 1 else loz)
            hi_a = lo_a + edge
            if d == 0.0:
                if o < lo_a or o > hi_a:
                    miss = True
                    break
            else:
                ta = (lo_a - o) / d
                tb = (hi_a - o) / d
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t_near:
                    t_near = ta
                if tb < t_far:
                    t_far = tb
        if miss or t_far < 0.0 or t_near > t_far:
            continue

        t0 = t_near if t_near > 0.0 else 0.0
        transmittance = 1.0
        acc_d0 = 0.0
        acc_d1 = 0.0
        acc_d2 = 0.0
        acc_f0 = 0.0
        acc_f1 = 0.0
        acc_f2 = 0.0
        acc_f3 = 0.0
        k = 0
        while True:
            t = t0 + (k + 0.5) * step
            if t >= t_far:
                break
            gx = (ox + dx * t - lox) * inv_v
            gy = (oy + dy * t - loy) * inv_v
            gz = (oz + dz * t - loz) * inv_v
            if gx < 0.0:
                gx = 0.0
            elif gx > n:
                gx = float(n)
            if gy < 0.0:
                gy = 0.0
            elif gy > n:
                gy = float(n)
            if gz < 0.0:
                gz = 0.0
            elif gz > n:
                gz = float(n)
            ux = gx - 0.5
            uy = gy - 0.5
            uz = gz - 0.5
            bx = int(np.floor(ux * inv_b))
            by = int(np.floor(uy * inv_b))
            bz = int(np.floor(uz * inv_b))
            if bx < 0:
                bx = 0
            elif bx >= nb:
                bx = nb - 1
            if by < 0:
                by = 0
            elif by >= nb:
                by = nb - 1
            if bz < 0:
                bz = 0
            elif bz >= nb:
                bz = nb - 1

            ax = indirection[bz, by, bx, 0]
            if ax < 0:
                if not skip:
                    k += 1
                    continue
                # jump to the first sample past this fetch region's exit
                t_exit = np.inf
                for axis in range(3):
                    bcoord = bx if axis == 0 else (by if axis == 1 else bz)
                    lo_a = lox if axis == 0 else (loy if axis == 1 else loz)
                    o = ox if axis == 0 else (oy if axis == 1 else oz)
                    d = dx if axis == 0 else (dy if axis == 1 else dz)
                    invd = invdx if axis == 0 else (invdy if axis == 1 else invdz)
                    glo = bcoord * b + 0.5
                    ghi = glo + b
                    if glo < 0.0:
                        glo = 0.0
                    if ghi > n:
                        ghi = float(n)
                    if d > 0.0:
                        ta = (lo_a + ghi * v - o) * invd
                    elif d < 0.0:
                        ta = (lo_a + glo * v - o) * invd
                    else:
                        continue
                    if ta < t_exit:
                        t_exit = ta
                k_next = int(np.ceil((t_exit - t0) * inv_step - 0.5))
                k = k_next if k_next > k else k + 1
                continue

            ay = indirection[bz, by, bx, 1]
            az = indirection[bz, by, bx, 2]
            aox = ax * p
            aoy = ay * p
            aoz = az * p

            ulx = ux - bx * b
            uly = uy - by * b
            ulz = uz - bz * b
            if ulx < 0.0:
                ulx = 0.0
            elif ulx > b:
                ulx = float(b)
            if uly < 0.0:
                uly = 0.0
            elif uly > b:
                uly = float(b)
            if ulz < 0.0:
                ulz = 0.0
            elif ulz > b:
                ulz = float(b)

            nx = int(ulx + 0.5)
            ny = int(uly + 0.5)
            nz = int(ulz + 0.5)
            if nx > b:
                nx = b
            if ny > b:
                ny = b
            if nz > b:
                nz = b
            if alpha_vol[aoz + nz, aoy + ny, aox + nx] <= 0.0:
                k += 1
                continue

            ix = int(ulx)
            iy = int(uly)
            iz = int(ulz)
            if ix > b - 1:
                ix = b - 1
            if iy > b - 1:
                iy = b - 1
            if iz > b - 1:
                iz = b - 1
            fx = ulx - ix
            fy = uly - iy
            fz = ulz - iz
            x0 = aox + ix
            y0 = aoy + iy
            z0 = aoz + iz
            w000 = (1.0 - fz) * (1.0 - fy) * (1.0 - fx)
            w001 = (1.0 - fz) * (1.0 - fy) * fx
            w010 = (1.0 - fz) * fy * (1.0 - fx)
            w011 = (1.0 - fz) * fy * fx
            w100 = fz * (1.0 - fy) * (1.0 - fx)
            w101 = fz * (1.0 - fy) * fx
            w110 = fz * fy * (1.0 - fx)
            w111 = fz * fy * fx

            a = (
                w000 * alpha_vol[z0, y0, x0]
                + w001 * alpha_vol[z0, y0, x0 + 1]
                + w010 * alpha_vol[z0, y0 + 1, x0]
                + w011 * alpha_vol[z0, y0 + 1, x0 + 1]
                + w100 * alpha_vol[z0 + 1, y0, x0]
                + w101 * alpha_vol[z0 + 1, y0, x0 + 1]
                + w110 * alpha_vol[z0 + 1, y0 + 1, x0]
                + w111 * alpha_vol[z0 + 1, y0 + 1, x0 + 1]
            )
            if a > 0.0:
                a_step = 1.0 - (1.0 - a) ** sv
                weight = transmittance * a_step
                for c in range(3):
                    acc = (
                        w000 * diffuse_vol[z0, y0, x0, c]
                        + w001 * diffuse_vol[z0, y0, x0 + 1, c]
                        + w010 * diffuse_vol[z0, y0 + 1, x0, c]
                        + w011 * diffuse_vol[z0, y0 + 1, x0 + 1, c]
                        + w100 * diffuse_vol[z0 + 1, y0, x0, c]
                        + w101 * diffuse_vol[z0 + 1, y0, x0 + 1, c]
                        + w110 * diffuse_vol[z0 + 1, y0 + 1, x0, c]
                        + w111 * diffuse_vol[z0 + 1, y0 + 1, x0 + 1, c]
                    )
                    if c == 0:
                        acc_d0 += weight * acc
                    elif c == 1:
                        acc_d1 += weight * acc
                    else:
                        acc_d2 += weight * acc
                for c in range(4):
                    acc = (
                        w000 * feature_vol[z0, y0, x0, c]
                        + w001 * feature_vol[z0, y0, x0 + 1, c]
                        + w010 * feature_vol[z0, y0 + 1, x0, c]
                        + w011 * feature_vol[z0, y0 + 1, x0 + 1, c]
                        + w100 * feature_vol[z0 + 1, y0, x0, c]
                        + w101 * feature_vol[z0 + 1, y0, x0 + 1, c]
                        + w110 * feature_vol[z0 + 1, y0 + 1, x0, c]
                        + w111 * feature_vol[z0 + 1, y0 + 1, x0 + 1, c]
                    )
                    if c == 0:
                        acc_f0 += weight * acc
                    elif c == 1:
                        acc_f1 += weight * acc
                    elif c == 2:
                        acc_f2 += weight * acc
                    else:
                        acc_f3 += weight * acc
                transmittance *= 1.0 - a_step
                if transmittance < eps_t:
                    break
            k += 1

        out_diffuse[r, 0] = acc_d0
        out_diffuse[r, 1] = acc_d1
        out_diffuse[r, 2] = acc_d2
        out_feature[r, 0] = acc_f0
        out_feature[r, 1] = acc_f1
        out_feature[r, 2] = acc_f2
        out_feature[r, 3] = acc_f3
        out_alpha[r] = 1.0 - transmittance
    return out_diffuse, out_feature, out_alpha


def _march_arrays(ga: _GridArrays, origins, dirs, config: RenderConfig, step: float):
    _configure_threads()
    return _march_kernel(
        np.ascontiguousarray(origins, dtype=np.float64),
        np.ascontiguousarray(dirs, dtype=np.float64),
        ga.lo[0],
        ga.lo[1],
        ga.lo[2],
        ga.voxel_width,
        ga.n,
        ga.b,
        ga.nb,
        ga.indirection,
        ga.alpha,
        ga.diffuse,
        ga.feature,
        step,
        config.termination_transmittance,
        config.skip_empty,
    )


def unpremultiply_saturate(acc: RayAccumulation) -> RayAccumulation:
    """Rescale accumulations by min(1, 1.5a)/a to close semi-transparent holes."""
    a = acc.alpha
    if a <= 0.0:
        return acc
    saturated = min(1.0, 1.5 * a)
    scale = saturated / a
    return RayAccumulation(diffuse=acc.diffuse * scale, feature=acc.feature * scale, alpha=saturated)


def _unpremultiply_arrays(diffuse, feature, alpha):
    saturated = np.minimum(1.0, 1.5 * alpha)
    scale = np.where(alpha > 0.0, saturated / np.where(alpha > 0.0, alpha, 1.0), 1.0)
    return diffuse * scale[..., None], feature * scale[..., None], np.where(alpha > 0.0, saturated, alpha)


def march_ray(grid, mlp: DeferredMlp, ray: Ray, config: RenderConfig):
    """March one ray and shade it: returns (color (3,), alpha).

    Rays that miss the grid produce the background colour with alpha 0.
    """
    ga = _grid_arrays(grid)
    step = config.resolved_step(grid)
    diffuse, feature, alpha = _march_arrays(ga, ray.origin[None, :], ray.direction[None, :], config, step)
    acc = RayAccumulation(diffuse=diffuse[0], feature=feature[0], alpha=float(alpha[0]))
    if config.unpremultiply:
        acc = unpremultiply_saturate(acc)
    color = shade_deferred(acc, ray.direction, mlp)
    out = np.clip(color + (1.0 - acc.alpha) * np.asarray(config.background), 0.0, 1.0)
    return out, acc.alpha


def march_frame(grid, camera: Camera, config: RenderConfig):
    """Accumulation stage for a full frame (shared with fine-tuning).

    Returns (diffuse (H,W,3), feature (H,W,4), alpha (H,W), directions
    (H,W,3)) before any un-premultiplication or shading.
    """
    return _march_frame_arrays(_grid_arrays(grid), camera, config.resolved_step(grid), config)


def _march_frame_arrays(ga: _GridArrays, camera: Camera, step: float, config: RenderConfig):
    origins, dirs = generate_rays(camera)
    shape = dirs.shape[:2]
    diffuse, feature, alpha = _march_arrays(ga, origins.reshape(-1, 3), dirs.reshape(-1, 3), config, step)
    return diffuse.reshape(shape + (3,)), feature.reshape(shape + (4,)), alpha.reshape(shape), dirs


def _shade_frame(diffuse, feature, alpha, dirs, mlp: DeferredMlp, config: RenderConfig):
    if config.unpremultiply:
        diffuse, feature, alpha = _unpremultiply_arrays(diffuse, feature, alpha)
    shaded = shade_deferred_batch(diffuse, feature, dirs, alpha, mlp)
    background = np.asarray(config.background)
    return np.clip(shaded + (1.0 - alpha)[..., None] * background, 0.0, 1.0)


def render_frame(grid, mlp: DeferredMlp, camera: Camera, config: RenderConfig) -> np.ndarray:
    """One march per pixel plus once-per-pixel deferred shading; [0,1] image."""
    image, _, _ = _render_frame_timed(_grid_arrays(grid), mlp, camera, config.resolved_step(grid), config)
    return image


def _render_frame_timed(ga: _GridArrays, mlp: DeferredMlp, camera: Camera, step: float, config: RenderConfig):
    t0 = time.perf_counter()
    diffuse, feature, alpha, dirs = _march_frame_arrays(ga, camera, step, config)
    t1 = time.perf_counter()
    image = _shade_frame(diffuse, feature, alpha, dirs, mlp, config)
    t2 = time.perf_counter()
    return image, t1 - t0, t2 - t1


def render_scene_direct(scene, mlp: DeferredMlp, camera: Camera, config: RenderConfig) -> np.ndarray:
    """Reference image: dense quadrature of the continuous scene function.

    Uses the same sample placement (midpoints of ``step_size`` segments
    clipped to the scene bounds), compositing rule, shading network and
    background handling as the grid renderer, so differences against
    :func:`render_frame` isolate what baking changed. ``config.step_size``
    must be set explicitly because a continuous scene has no voxel width.
    """
    if config.step_size is None:
        raise ValueError("render_scene_direct requires an explicit step_size")
    step = config.step_size
    origins, dirs = generate_rays(camera)
    h, w = dirs.shape[:2]
    flat_o = origins.reshape(-1, 3)
    flat_d = dirs.reshape(-1, 3)
    t_near, t_far, hit = ray_box_intersect_batch(flat_o, flat_d, scene.bounds)
    t0 = np.maximum(t_near, 0.0)
    span = np.where(hit, np.maximum(t_far - t0, 0.0), 0.0)

    diffuse = np.zeros((h * w, 3))
    feature = np.zeros((h * w, 4))
    alpha = np.zeros(h * w)
    max_samples = int(np.ceil(span.max() / step)) if span.size else 0
    chunk = max(1, int(2_000_000 // max(1, max_samples)))
    for start in range(0, h * w, chunk):
        stop = min(start + chunk, h * w)
        rows = slice(start, stop)
        k = np.arange(max_samples)
        ts = t0[rows, None] + (k[None, :] + 0.5) * step
        valid = ts < (t0 + span)[rows, None]
        pts = flat_o[rows, None, :] + flat_d[rows, None, :] * ts[..., None]
        density, diff, feat = scene.evaluate(pts)
        density = np.where(valid, density, 0.0)
        d_acc, f_acc, a_acc = composite_batch(density, diff, feat, step)
        diffuse[rows] = d_acc
        feature[rows] = f_acc
        alpha[rows] = a_acc

    diffuse = diffuse.reshape(h, w, 3)
    feature = feature.reshape(h, w, 4)
    alpha = alpha.reshape(h, w)
    return _shade_frame(diffuse, feature, alpha, dirs, mlp, config)


def benchmark_orbit(grid, mlp: DeferredMlp, frames: int, config: RenderConfig, out_path=None) -> dict:
    """Time an equal-angle orbit render; optionally write the report file.

    The report is a flat key=value text file with per-frame wall-clock
    statistics and the march/shade stage split.
    """
    if frames < 1:
        raise ValueError(f"frames must be at least 1, got {frames}")
    center = (np.asarray(grid.bounds.lo) + np.asarray(grid.bounds.hi)) / 2.0
    focal = config.focal if config.focal is not None else float(config.width)
    cameras = orbit_cameras(
        frames,
        config.orbit_radius,
        config.orbit_elevation_deg,
        focal,
        config.width,
        config.height,
        target=center,
    )
    ga = _grid_arrays(grid)
    step = config.resolved_step(grid)
    frame_ms = np.empty(frames)
    march_ms = np.empty(frames)
    shade_ms = np.empty(frames)
    for i, camera in enumerate(cameras):
        _, t_march, t_shade = _render_frame_timed(ga, mlp, camera, step, config)
        march_ms[i] = t_march * 1e3
        shade_ms[i] = t_shade * 1e3
        frame_ms[i] = (t_march + t_shade) * 1e3
    report = {
        "frames": frames,
        "width": config.width,
        "height": config.height,
        "frame_ms_mean": float(frame_ms.mean()),
        "frame_ms_min": float(frame_ms.min()),
        "frame_ms_max": float(frame_ms.max()),
        "march_ms_mean": float(march_ms.mean()),
        "shade_ms_mean": float(shade_ms.mean()),
    }
    if out_path is not None:
        write_report(report, out_path)
    return report


def write_report(report: dict, path) -> None:
    """Write a timing report as one key=value line per entry."""
    lines = []
    for key in _REPORT_KEYS:
        value = report[key]
        lines.append(f"{key}={value}" if isinstance(value, int) else f"{key}={value:.6f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report(path) -> dict:
    """Parse a key=value report file back into a dict."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            out[key] = int(value) if key in ("frames", "width", "height") else float(value)
    return out
