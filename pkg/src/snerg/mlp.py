"""Tiny view-dependence network evaluated once per pixel after ray marching.

The network sees what a ray accumulated (diffuse colour and feature vector)
plus the encoded view direction, and emits an RGB residual that is added to
the accumulated diffuse colour. Keeping it this small is what makes deferred
shading cheap: three dense layers per pixel instead of per sample.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from snerg.core import RayAccumulation, positional_encode

HIDDEN_WIDTH = 16
_DIFFUSE_DIMS = 3
_FEATURE_DIMS = 4


def mlp_input_width(bands: int) -> int:
    """Input width: diffuse (3) + feature (4) + encoded direction (3 + 6 * bands)."""
    return _DIFFUSE_DIMS + _FEATURE_DIMS + 3 * (1 + 2 * bands)


@dataclasses.dataclass(frozen=True)
class DeferredMlp:
    """Weights of the deferred shading network.

    Two ReLU hidden layers of 16 channels and a sigmoid RGB output.
    ``weights[i]`` has shape (fan_out, fan_in) and layer i maps
    ``x -> weights[i] @ x + biases[i]``.
    """

    weights: tuple[np.ndarray, np.ndarray, np.ndarray]
    biases: tuple[np.ndarray, np.ndarray, np.ndarray]
    dir_encoding_bands: int = 4

    def __post_init__(self):
        if self.dir_encoding_bands < 0:
            raise ValueError(f"encoding bands must be >= 0, got {self.dir_encoding_bands}")
        width = mlp_input_width(self.dir_encoding_bands)
        expect = [(HIDDEN_WIDTH, width), (HIDDEN_WIDTH, HIDDEN_WIDTH), (3, HIDDEN_WIDTH)]
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(weights) != 3 or len(biases) != 3:
            raise ValueError("deferred MLP has exactly three layers")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != expect[i]:
                raise ValueError(f"layer {i} weights must be {expect[i]}, got {w.shape}")
            if b.shape != (expect[i][0],):
                raise ValueError(f"layer {i} bias must be ({expect[i][0]},), got {b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} parameters must be finite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "dir_encoding_bands", int(self.dir_encoding_bands))

    @property
    def input_width(self) -> int:
        return mlp_input_width(self.dir_encoding_bands)

    @classmethod
    def init(cls, dir_encoding_bands: int = 4, seed: int = 0) -> "DeferredMlp":
        """Seeded uniform init in [-a, a] with a = sqrt(6 / (fan_in + fan_out))."""
        rng = np.random.default_rng(seed)
        widths = [mlp_input_width(dir_encoding_bands), HIDDEN_WIDTH, HIDDEN_WIDTH, 3]
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(
            weights=tuple(weights), biases=tuple(biases), dir_encoding_bands=dir_encoding_bands
        )

    def params(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, W2, b2] (copies)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w.copy())
            out.append(b.copy())
        return out

    def with_params(self, params: list[np.ndarray]) -> "DeferredMlp":
        if len(params) != 6:
            raise ValueError(f"expected 6 parameter arrays, got {len(params)}")
        return DeferredMlp(
            weights=(params[0], params[2], params[4]),
            biases=(params[1], params[3], params[5]),
            dir_encoding_bands=self.dir_encoding_bands,
        )


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def relu(z):
    return np.maximum(z, 0.0)


def mlp_forward(mlp: DeferredMlp, inputs) -> np.ndarray:
    """Network output for (..., input_width) inputs; sigmoid keeps it in (0, 1)."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape[-1] != mlp.input_width:
        raise ValueError(f"expected input width {mlp.input_width}, got {x.shape[-1]}")
    h = relu(x @ mlp.weights[0].T + mlp.biases[0])
    h = relu(h @ mlp.weights[1].T + mlp.biases[1])
    return sigmoid(h @ mlp.weights[2].T + mlp.biases[2])


def shade_inputs(diffuse, feature, direction, bands: int) -> np.ndarray:
    """Concatenate accumulated diffuse, feature and the encoded view direction."""
    diffuse = np.asarray(diffuse, dtype=np.float64)
    feature = np.asarray(feature, dtype=np.float64)
    encoded = positional_encode(np.asarray(direction, dtype=np.float64), bands)
    return np.concatenate([diffuse, feature, encoded], axis=-1)


def shade_deferred(acc: RayAccumulation, direction, mlp: DeferredMlp) -> np.ndarray:
    """Final pixel colour: accumulated diffuse plus the view-dependent residual.

    Rays that accumulated nothing (alpha == 0) skip the network entirely and
    return the accumulated diffuse unchanged; everything else is clamped to
    [0, 1] after the residual is added.
    """
    if acc.alpha == 0.0:
        return np.asarray(acc.diffuse, dtype=np.float64).copy()
    inputs = shade_inputs(acc.diffuse, acc.feature, direction, mlp.dir_encoding_bands)
    residual = mlp_forward(mlp, inputs)
    return np.clip(acc.diffuse + residual, 0.0, 1.0)


def shade_deferred_batch(diffuse, feature, directions, alpha, mlp: DeferredMlp) -> np.ndarray:
    """Vectorised :func:`shade_deferred` over (..., C) accumulation arrays.

    The network only runs on entries with alpha > 0; the rest pass their
    accumulated diffuse through untouched.
    """
    diffuse = np.asarray(diffuse, dtype=np.float64)
    out = diffuse.copy()
    live = np.asarray(alpha) > 0.0
    if np.any(live):
        inputs = shade_inputs(
            diffuse[live],
            np.asarray(feature, dtype=np.float64)[live],
            np.asarray(directions, dtype=np.float64)[live],
            mlp.dir_encoding_bands,
        )
        out[live] = np.clip(diffuse[live] + mlp_forward(mlp, inputs), 0.0, 1.0)
    return out
