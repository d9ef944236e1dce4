"""Geometric and radiometric primitives shared by the baker and the renderer.

Conventions used package-wide:

* World space is right-handed. Cameras look down their local -z axis, +x
  points right, +y points up, and image rows increase downward.
* Optical depth is density integrated over distance; a segment of depth x
  absorbs with opacity 1 - exp(-x).
* All internal accumulation is double precision.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence

import numpy as np


def _as_vec(value, name: str, size: int) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64)
    if v.shape != (size,):
        raise ValueError(f"{name} must be a {size}-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


@dataclasses.dataclass(frozen=True)
class Box:
    """Axis-aligned box with strictly positive extent on every axis."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_vec(self.lo, "lo", 3))
        object.__setattr__(self, "hi", _as_vec(self.hi, "hi", 3))
        if not np.all(self.hi > self.lo):
            raise ValueError(f"box needs positive extent, got lo={self.lo} hi={self.hi}")

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def edge(self) -> float:
        """Edge length; raises if the box is not a cube."""
        ext = self.extent
        if not np.allclose(ext, ext[0], rtol=1e-12, atol=0.0):
            raise ValueError(f"box is not cubic, extent {ext}")
        return float(ext[0])

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)


@dataclasses.dataclass(frozen=True)
class Ray:
    """Half-line with unit direction; the direction is normalised on construction."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        origin = _as_vec(self.origin, "origin", 3)
        direction = _as_vec(self.direction, "direction", 3)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            raise ValueError("ray direction must be nonzero")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction / norm)

    def at(self, t: float) -> np.ndarray:
        return self.origin + float(t) * self.direction


@dataclasses.dataclass(frozen=True)
class Camera:
    """Pinhole camera with a rigid camera-to-world pose.

    ``pose`` is a 4x4 matrix whose rotation block must be orthonormal with
    determinant +1. Pixel (row, col) has its centre at offset
    ``(col + 0.5 - width/2, row + 0.5 - height/2)`` pixels from the optical
    axis; ``focal`` is in pixels.
    """

    pose: np.ndarray
    focal: float
    width: int
    height: int

    def __post_init__(self):
        pose = np.asarray(self.pose, dtype=np.float64)
        if pose.shape != (4, 4) or not np.all(np.isfinite(pose)):
            raise ValueError(f"pose must be a finite 4x4 matrix, got shape {pose.shape}")
        rot = pose[:3, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
            raise ValueError("pose rotation block is not orthonormal")
        if np.linalg.det(rot) < 0.0:
            raise ValueError("pose rotation block must not mirror (det must be +1)")
        if not (np.isfinite(self.focal) and self.focal > 0):
            raise ValueError(f"focal must be positive, got {self.focal}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        object.__setattr__(self, "pose", pose)
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def position(self) -> np.ndarray:
        return self.pose[:3, 3].copy()

    @property
    def rotation(self) -> np.ndarray:
        return self.pose[:3, :3].copy()


def look_at_pose(eye, target, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Camera-to-world pose at ``eye`` looking toward ``target``.

    The camera -z axis points at the target; ``up`` resolves the roll and must
    not be parallel to the view direction.
    """
    eye = _as_vec(eye, "eye", 3)
    target = _as_vec(target, "target", 3)
    up = _as_vec(up, "up", 3)
    backward = eye - target  # camera +z
    norm = np.linalg.norm(backward)
    if norm == 0.0:
        raise ValueError("eye and target coincide")
    z_axis = backward / norm
    x_axis = np.cross(up, z_axis)
    norm = np.linalg.norm(x_axis)
    if norm < 1e-9:
        raise ValueError("up direction is parallel to the view direction")
    x_axis = x_axis / norm
    y_axis = np.cross(z_axis, x_axis)
    pose = np.eye(4)
    pose[:3, 0] = x_axis
    pose[:3, 1] = y_axis
    pose[:3, 2] = z_axis
    pose[:3, 3] = eye
    return pose


def orbit_cameras(
    count: int,
    radius: float,
    elevation_deg: float,
    focal: float,
    width: int,
    height: int,
    target=(0.0, 0.0, 0.0),
) -> list[Camera]:
    """Equal-angle ring of cameras at fixed elevation, all looking at ``target``."""
    if count <= 0:
        raise ValueError(f"need at least one camera, got {count}")
    if radius <= 0:
        raise ValueError(f"orbit radius must be positive, got {radius}")
    if not -90.0 < elevation_deg < 90.0:
        raise ValueError(f"elevation must be in (-90, 90) degrees, got {elevation_deg}")
    target = _as_vec(target, "target", 3)
    phi = np.deg2rad(elevation_deg)
    cameras = []
    for i in range(count):
        theta = 2.0 * np.pi * i / count
        offset = radius * np.array(
            [np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), np.sin(phi)]
        )
        pose = look_at_pose(target + offset, target)
        cameras.append(Camera(pose=pose, focal=focal, width=width, height=height))
    return cameras


def generate_rays(camera: Camera, pixel: tuple[int, int] | None = None):
    """Rays through pixel centres of ``camera``.

    With ``pixel=(row, col)`` returns the single :class:`Ray` through that
    pixel centre; without it returns ``(origins, directions)`` arrays of shape
    (height, width, 3) with unit directions.
    """
    rot = camera.pose[:3, :3]
    origin = camera.pose[:3, 3]
    if pixel is not None:
        row, col = pixel
        if not (0 <= row < camera.height and 0 <= col < camera.width):
            raise ValueError(
                f"pixel {pixel} outside {camera.width}x{camera.height} image"
            )
        d_cam = np.array(
            [
                (col + 0.5 - camera.width / 2.0) / camera.focal,
                -(row + 0.5 - camera.height / 2.0) / camera.focal,
                -1.0,
            ]
        )
        return Ray(origin=origin, direction=rot @ d_cam)

    cols = (np.arange(camera.width) + 0.5 - camera.width / 2.0) / camera.focal
    rows = -(np.arange(camera.height) + 0.5 - camera.height / 2.0) / camera.focal
    d_cam = np.empty((camera.height, camera.width, 3))
    d_cam[..., 0] = cols[None, :]
    d_cam[..., 1] = rows[:, None]
    d_cam[..., 2] = -1.0
    directions = d_cam @ rot.T
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    origins = np.broadcast_to(origin, directions.shape).copy()
    return origins, directions


def decay(optical_depth):
    """Opacity ``1 - exp(-x)`` of a non-negative optical depth.

    Accepts scalars or arrays; uses expm1 so tiny depths keep second-order
    accuracy. Negative or non-finite input is rejected.
    """
    x = np.asarray(optical_depth, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("optical depth must be finite")
    if np.any(x < 0):
        raise ValueError("optical depth must be non-negative")
    out = -np.expm1(-x)
    if out.ndim == 0:
        return float(out)
    return out


@dataclasses.dataclass(frozen=True)
class SampleValue:
    """Scene response at one point: density plus diffuse/feature emissions."""

    density: float
    diffuse: np.ndarray  # (3,) in [0, 1]
    feature: np.ndarray  # (4,) in [0, 1]

    def __post_init__(self):
        if not (np.isfinite(self.density) and self.density >= 0):
            raise ValueError(f"density must be finite and non-negative, got {self.density}")
        diffuse = _as_vec(self.diffuse, "diffuse", 3)
        feature = _as_vec(self.feature, "feature", 4)
        for name, v in (("diffuse", diffuse), ("feature", feature)):
            if np.any(v < 0) or np.any(v > 1):
                raise ValueError(f"{name} channels must lie in [0, 1], got {v}")
        object.__setattr__(self, "density", float(self.density))
        object.__setattr__(self, "diffuse", diffuse)
        object.__setattr__(self, "feature", feature)


@dataclasses.dataclass(frozen=True)
class RayAccumulation:
    """Premultiplied quadrature totals for one ray."""

    diffuse: np.ndarray  # (3,)
    feature: np.ndarray  # (4,)
    alpha: float


def composite(samples: Sequence[SampleValue], deltas: Sequence[float]) -> RayAccumulation:
    """Front-to-back quadrature of point samples over segment lengths.

    Sample k absorbs with opacity ``1 - exp(-density_k * delta_k)`` and its
    emissions are weighted by the transmittance of everything in front, so the
    weights sum exactly to the accumulated alpha. An empty list accumulates
    nothing (alpha 0).
    """
    if len(samples) != len(deltas):
        raise ValueError(f"{len(samples)} samples but {len(deltas)} deltas")
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.size and (not np.all(np.isfinite(deltas)) or np.any(deltas <= 0)):
        raise ValueError("segment lengths must be finite and positive")
    transmittance = 1.0
    diffuse = np.zeros(3)
    feature = np.zeros(4)
    for sample, delta in zip(samples, deltas):
        a = -np.expm1(-sample.density * delta)
        weight = transmittance * a
        diffuse += weight * sample.diffuse
        feature += weight * sample.feature
        transmittance *= 1.0 - a
    return RayAccumulation(diffuse=diffuse, feature=feature, alpha=1.0 - transmittance)


def composite_batch(density, diffuse, feature, deltas):
    """Vectorised :func:`composite` over leading batch dimensions.

    Args:
        density: (..., K) non-negative densities along each ray.
        diffuse: (..., K, 3) diffuse emissions.
        feature: (..., K, 4) feature emissions.
        deltas: scalar or (..., K) positive segment lengths.

    Returns:
        (diffuse (..., 3), feature (..., 4), alpha (...)) arrays.
    """
    density = np.asarray(density, dtype=np.float64)
    diffuse = np.asarray(diffuse, dtype=np.float64)
    feature = np.asarray(feature, dtype=np.float64)
    tau = density * np.asarray(deltas, dtype=np.float64)
    if tau.size == 0:
        batch = tau.shape[:-1]
        return np.zeros(batch + (3,)), np.zeros(batch + (4,)), np.zeros(batch)
    seg_alpha = -np.expm1(-tau)  # (..., K)
    behind = np.exp(-np.cumsum(tau, axis=-1))  # transmittance just after sample k
    ahead = np.concatenate(
        [np.ones_like(behind[..., :1]), behind[..., :-1]], axis=-1
    )  # transmittance just before sample k
    weights = ahead * seg_alpha
    out_diffuse = np.sum(weights[..., None] * diffuse, axis=-2)
    out_feature = np.sum(weights[..., None] * feature, axis=-2)
    alpha = -np.expm1(-np.sum(tau, axis=-1))
    return out_diffuse, out_feature, alpha


def positional_encode(x, bands: int) -> np.ndarray:
    """Sinusoidal features: identity plus sin/cos pairs at frequencies 2^j * pi.

    The last axis is laid out as ``[x, sin(2^0 pi x), cos(2^0 pi x), ...,
    sin(2^(bands-1) pi x), cos(2^(bands-1) pi x)]`` where each entry spans the
    input components, so a D-vector encodes to D * (1 + 2 * bands) values.
    ``bands=0`` is the identity.
    """
    if bands < 0 or int(bands) != bands:
        raise ValueError(f"bands must be a non-negative integer, got {bands}")
    arr = np.asarray(x, dtype=np.float64)
    parts = [arr]
    for j in range(int(bands)):
        angles = (2.0**j) * np.pi * arr
        parts.append(np.sin(angles))
        parts.append(np.cos(angles))
    return np.concatenate(parts, axis=-1)


def ray_box_intersect(ray: Ray, box: Box) -> tuple[float, float] | None:
    """Entry/exit distances of ``ray`` against ``box``, or None for a miss.

    ``t_near`` may be negative when the origin is inside the box; a box that
    lies entirely behind the origin is a miss. A ray exactly tangent to a face
    reports a degenerate hit with ``t_near == t_far``.
    """
    t_near, t_far, hit = ray_box_intersect_batch(
        ray.origin[None, :], ray.direction[None, :], box
    )
    if not hit[0]:
        return None
    return float(t_near[0]), float(t_far[0])


def ray_box_intersect_batch(origins, directions, box: Box):
    """Slab test over (..., 3) ray batches.

    Returns ``(t_near, t_far, hit)``; entries of ``t_near``/``t_far`` are only
    meaningful where ``hit`` is True.
    """
    origins = np.asarray(origins, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t0 = (box.lo - origins) * inv
        t1 = (box.hi - origins) * inv
    # A zero direction component on a slab boundary yields 0 * inf = nan;
    # such a ray travels inside that slab, so the axis is unconstrained.
    lo = np.fmin(t0, t1)
    hi = np.fmax(t0, t1)
    t_near = np.max(np.nan_to_num(lo, nan=-np.inf), axis=-1)
    t_far = np.min(np.nan_to_num(hi, nan=np.inf), axis=-1)
    hit = (t_near <= t_far) & (t_far >= 0.0)
    return t_near, t_far, hit
