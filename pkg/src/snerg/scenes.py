"""Analytic volumetric scenes with documented closed forms.

Each scene is a continuous field mapping a world point to (density, diffuse
colour, feature vector) plus an attached deferred-shading network; together
they fully define appearance. The closed forms below double as ground truth
in tests:

* ``lambert-spheres``: three disjoint spheres. Sphere i with centre c_i,
  radius r_i, falloff width w_i and peak density p_i contributes density
  ``p_i * smoothstep((r_i - |x - c_i|) / w_i)`` (clamped argument), i.e. full
  density up to r_i - w_i, zero beyond r_i, and exactly half the peak midway
  through the falloff shell. Diffuse/feature are the density-weighted blends
  of per-sphere albedo and feature constants (a fixed specular tint and
  sharpness per sphere).
* ``slab``: constant density sigma0 for z0 <= z <= z1, zero elsewhere;
  diffuse and feature are constants everywhere. A perpendicular ray therefore
  accumulates alpha ``1 - exp(-sigma0 * (z1 - z0))``.
* ``enclosed-core``: an opaque hollow spherical shell occupying
  r_in <= |x| <= r_out (smoothstep edges) hiding a distinct bright core
  sphere at the centre. No ray from outside can see the core, which makes the
  hidden interior an exercise for visibility culling.

Scenes are selected by name with optional key=value parameter overrides.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from snerg.core import Box, SampleValue
from snerg.mlp import DeferredMlp


@dataclasses.dataclass(frozen=True)
class SparsityParams:
    """Cauchy sparsity penalty parameters: weight * sum(log(1 + density^2 / scale))."""

    weight: float = 1e-4
    scale: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise ValueError(f"weight must be non-negative, got {self.weight}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")


def sparsity_loss(densities, params: SparsityParams = SparsityParams()) -> float:
    """Cauchy sparsity penalty of a density collection.

    Zero only for identically-zero density, additive over concatenation and
    monotone in each entry, which is what makes it a usable regulariser for
    pushing free space toward exact zeros.
    """
    d = np.asarray(densities, dtype=np.float64)
    if d.size and (not np.all(np.isfinite(d)) or np.any(d < 0)):
        raise ValueError("densities must be finite and non-negative")
    return float(params.weight * np.sum(np.log1p(d * d / params.scale)))


def smoothstep(t):
    """Cubic 3t^2 - 2t^3 ramp, clamped to [0, 1]."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


class SceneFunction:
    """Continuous scene: density, diffuse and feature fields plus a shading net.

    Subclasses implement ``_evaluate_raw`` on flat (M, 3) points; ``evaluate``
    handles arbitrary batch shapes and forces density to zero outside
    ``bounds``. Diffuse/feature stay defined everywhere so that averaging
    probes (e.g. voxel supersampling) see consistent emission values.
    """

    name = "scene"

    def __init__(self, bounds: Box, mlp: DeferredMlp, params: dict):
        self.bounds = bounds
        self.mlp = mlp
        self.params = dict(params)

    def evaluate(self, points):
        """Fields at (..., 3) points: (density (...,), diffuse (..., 3), feature (..., 4))."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.shape[-1] != 3:
            raise ValueError(f"points must have a trailing dimension of 3, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        batch = pts.shape[:-1]
        flat = pts.reshape(-1, 3)
        density, diffuse, feature = self._evaluate_raw(flat)
        density = np.where(self.bounds.contains(flat), density, 0.0)
        return (
            density.reshape(batch),
            diffuse.reshape(batch + (3,)),
            feature.reshape(batch + (4,)),
        )

    def _evaluate_raw(self, pts: np.ndarray):
        raise NotImplementedError


def eval_scene(scene: SceneFunction, point) -> SampleValue:
    """Scene response at a single world point."""
    density, diffuse, feature = scene.evaluate(np.asarray(point, dtype=np.float64))
    return SampleValue(density=float(density), diffuse=diffuse, feature=feature)


def _blend(weights, values, fallback):
    """Weighted average of per-component constants; fallback where weightless.

    weights: (M, S); values: (S, C); returns (M, C).
    """
    total = np.sum(weights, axis=-1, keepdims=True)  # (M, 1)
    blended = weights @ values
    safe = np.maximum(total, 1e-300)
    out = blended / safe
    empty = (total == 0.0)[:, 0]
    out[empty] = fallback
    return out


_SPHERES = (
    # centre, radius, falloff width, peak density, albedo, feature
    ((-0.35, -0.20, -0.15), 0.38, 0.10, 25.0, (0.85, 0.25, 0.20), (0.90, 0.60, 0.30, 0.80)),
    ((0.40, 0.10, -0.05), 0.30, 0.10, 25.0, (0.20, 0.55, 0.85), (0.30, 0.80, 0.90, 0.50)),
    ((0.00, 0.25, 0.35), 0.25, 0.08, 30.0, (0.30, 0.80, 0.35), (0.70, 0.40, 0.95, 0.60)),
)


class LambertSpheres(SceneFunction):
    """Three diffuse spheres with smooth density falloff shells."""

    name = "lambert-spheres"
    allowed_params = frozenset({"density", "radius_scale", "falloff_scale", "bands"})

    def __init__(self, mlp: DeferredMlp, params: dict):
        super().__init__(Box(lo=(-1, -1, -1), hi=(1, 1, 1)), mlp, params)
        density = params.get("density")
        radius_scale = float(params.get("radius_scale", 1.0))
        falloff_scale = float(params.get("falloff_scale", 1.0))
        if radius_scale <= 0 or falloff_scale <= 0:
            raise ValueError("radius_scale and falloff_scale must be positive")
        if density is not None and float(density) < 0:
            raise ValueError(f"density must be non-negative, got {density}")
        self.centers = np.array([s[0] for s in _SPHERES])
        self.radii = np.array([s[1] for s in _SPHERES]) * radius_scale
        self.falloffs = np.array([s[2] for s in _SPHERES]) * falloff_scale
        self.peaks = (
            np.full(len(_SPHERES), float(density))
            if density is not None
            else np.array([s[3] for s in _SPHERES])
        )
        self.albedos = np.array([s[4] for s in _SPHERES])
        self.features = np.array([s[5] for s in _SPHERES])

    def _evaluate_raw(self, pts):
        dist = np.linalg.norm(pts[:, None, :] - self.centers[None, :, :], axis=-1)  # (M, S)
        shape = smoothstep((self.radii - dist) / self.falloffs)
        contrib = self.peaks * shape  # (M, S)
        density = np.sum(contrib, axis=-1)
        diffuse = _blend(contrib, self.albedos, 0.0)
        feature = _blend(contrib, self.features, 0.0)
        return density, diffuse, feature


class Slab(SceneFunction):
    """Constant density between two z planes; constant emissions everywhere."""

    name = "slab"
    allowed_params = frozenset({"sigma", "z0", "z1", "bands"})

    def __init__(self, mlp: DeferredMlp, params: dict):
        super().__init__(Box(lo=(-1, -1, -1), hi=(1, 1, 1)), mlp, params)
        self.sigma = float(params.get("sigma", 8.0))
        self.z0 = float(params.get("z0", -0.25))
        self.z1 = float(params.get("z1", 0.25))
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not self.z0 < self.z1:
            raise ValueError(f"slab needs z0 < z1, got [{self.z0}, {self.z1}]")
        self.diffuse = np.array([0.70, 0.70, 0.70])
        self.feature = np.array([0.50, 0.50, 0.50, 0.50])

    @property
    def thickness(self) -> float:
        return self.z1 - self.z0

    def _evaluate_raw(self, pts):
        inside = (pts[:, 2] >= self.z0) & (pts[:, 2] <= self.z1)
        density = np.where(inside, self.sigma, 0.0)
        diffuse = np.broadcast_to(self.diffuse, (len(pts), 3)).copy()
        feature = np.broadcast_to(self.feature, (len(pts), 4)).copy()
        return density, diffuse, feature


class EnclosedCore(SceneFunction):
    """Opaque hollow shell hiding a bright core sphere at the origin."""

    name = "enclosed-core"
    allowed_params = frozenset(
        {"r_in", "r_out", "shell_density", "core_radius", "core_density", "bands"}
    )

    def __init__(self, mlp: DeferredMlp, params: dict):
        super().__init__(Box(lo=(-1, -1, -1), hi=(1, 1, 1)), mlp, params)
        self.r_in = float(params.get("r_in", 0.45))
        self.r_out = float(params.get("r_out", 0.60))
        self.shell_density = float(params.get("shell_density", 500.0))
        self.core_radius = float(params.get("core_radius", 0.20))
        self.core_density = float(params.get("core_density", 80.0))
        self.edge = 0.03
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"need 0 < r_in < r_out, got {self.r_in}, {self.r_out}")
        if self.core_radius >= self.r_in:
            raise ValueError("core must fit strictly inside the shell")
        if self.shell_density < 0 or self.core_density < 0:
            raise ValueError("densities must be non-negative")
        self.shell_albedo = np.array([0.45, 0.45, 0.50])
        self.shell_feature = np.array([0.40, 0.40, 0.40, 0.40])
        self.core_albedo = np.array([0.95, 0.15, 0.10])
        self.core_feature = np.array([0.90, 0.20, 0.10, 0.70])

    def _evaluate_raw(self, pts):
        dist = np.linalg.norm(pts, axis=-1)
        shell_shape = smoothstep((dist - self.r_in) / self.edge) * smoothstep(
            (self.r_out - dist) / self.edge
        )
        core_shape = smoothstep((self.core_radius - dist) / self.edge)
        shell = self.shell_density * shell_shape
        core = self.core_density * core_shape
        density = shell + core
        weights = np.stack([shell, core], axis=-1)
        diffuse = _blend(weights, np.stack([self.shell_albedo, self.core_albedo]), 0.0)
        feature = _blend(weights, np.stack([self.shell_feature, self.core_feature]), 0.0)
        return density, diffuse, feature


_REGISTRY = {
    LambertSpheres.name: LambertSpheres,
    Slab.name: Slab,
    EnclosedCore.name: EnclosedCore,
}


def scene_names() -> list[str]:
    return sorted(_REGISTRY)


def make_scene(name: str, seed: int = 0, **params) -> SceneFunction:
    """Build a named scene; unknown names or parameters are rejected."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown scene '{name}'; available: {', '.join(scene_names())}")
    cls = _REGISTRY[name]
    unknown = set(params) - cls.allowed_params
    if unknown:
        raise ValueError(
            f"unknown parameters for scene '{name}': {sorted(unknown)}; "
            f"allowed: {sorted(cls.allowed_params)}"
        )
    mlp = DeferredMlp.init(dir_encoding_bands=int(params.pop("bands", 4)), seed=seed)
    return cls(mlp=mlp, params=params)


def parse_scene_params(pairs) -> dict:
    """Parse CLI-style ``key=value`` overrides (values become floats)."""
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got '{pair}'")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise ValueError(f"scene parameter '{key}' needs a numeric value, got '{value}'") from exc
    return out
