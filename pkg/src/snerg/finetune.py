"""Post-quantization recovery: optimize the shading network against
reference images while the grid stays frozen.

Per-pixel accumulations are marched once up front (the same code path the
renderer uses), so an epoch is pure network work: forward, hand-derived
reverse-mode gradients, Adam. The training loss compares the pre-clamp
shading output against background-subtracted reference pixels; the clamp
only applies at render time, where its saturation would zero gradients.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .mlp import DeferredMlp, shade_inputs, sigmoid
from .rendering import RenderConfig, march_frame


@dataclasses.dataclass(frozen=True)
class TrainExample:
    """One pixel's fixed inputs and target for shading-network training."""

    diffuse: np.ndarray
    feature: np.ndarray
    direction: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        diffuse = _unit_interval("diffuse", self.diffuse, 3)
        feature = _unit_interval("feature", self.feature, 4)
        target = _unit_interval("target", self.target, 3)
        direction = np.asarray(self.direction, dtype=np.float64)
        if direction.shape != (3,):
            raise ValueError(f"direction must be a 3-vector, got shape {direction.shape}")
        norm = float(np.linalg.norm(direction))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"direction must be unit length, got norm {norm}")
        object.__setattr__(self, "diffuse", diffuse)
        object.__setattr__(self, "feature", feature)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "target", target)


def _unit_interval(name: str, value, size: int) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (size,):
        raise ValueError(f"{name} must be a {size}-vector, got shape {arr.shape}")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} channels must lie in [0, 1]")
    return arr


@dataclasses.dataclass(frozen=True)
class AdamState:
    """Bias-corrected Adam accumulators for a flat parameter list."""

    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    step: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.step < 0:
            raise ValueError(f"step must be non-negative, got {self.step}")
        if not self.lr > 0.0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        for ma, va in zip(self.m, self.v):
            if ma.shape != va.shape:
                raise ValueError("moment accumulator shapes disagree")

    @classmethod
    def init(cls, params, lr: float) -> "AdamState":
        return cls(
            m=tuple(np.zeros_like(p) for p in params),
            v=tuple(np.zeros_like(p) for p in params),
            step=0,
            lr=float(lr),
        )


def adam_step(params, grads, state: AdamState):
    """One Adam update; returns (new params, new state), inputs untouched."""
    if len(params) != len(state.m) or len(grads) != len(state.m):
        raise ValueError(
            f"expected {len(state.m)} parameter/gradient arrays, got {len(params)}/{len(grads)}"
        )
    for p, g, m in zip(params, grads, state.m):
        if p.shape != m.shape or g.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}, state {m.shape}")
    t = state.step + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, dataclasses.replace(state, m=tuple(new_m), v=tuple(new_v), step=t)


def _forward(params, inputs):
    """Network forward pass keeping pre-activations for the backward pass."""
    w0, b0, w1, b1, w2, b2 = params
    pre1 = inputs @ w0.T + b0
    h1 = np.maximum(pre1, 0.0)
    pre2 = h1 @ w1.T + b1
    h2 = np.maximum(pre2, 0.0)
    out = sigmoid(h2 @ w2.T + b2)
    return out, (pre1, h1, pre2, h2)


def _loss_and_grad_arrays(params, inputs, diffuse, targets):
    """Mean squared-error loss and parameter gradients for a batch.

    The per-example error is the squared L2 norm of (diffuse + residual -
    target) over the three channels, before any clamping.
    """
    w0, b0, w1, b1, w2, b2 = params
    count = inputs.shape[0]
    residual, (pre1, h1, pre2, h2) = _forward(params, inputs)
    error = diffuse + residual - targets
    loss = float(np.sum(error * error)) / count

    d_out = (2.0 / count) * error
    d_z = d_out * residual * (1.0 - residual)
    g_w2 = d_z.T @ h2
    g_b2 = d_z.sum(axis=0)
    d_h2 = d_z @ w2
    d_p2 = np.where(pre2 > 0.0, d_h2, 0.0)
    g_w1 = d_p2.T @ h1
    g_b1 = d_p2.sum(axis=0)
    d_h1 = d_p2 @ w1
    d_p1 = np.where(pre1 > 0.0, d_h1, 0.0)
    g_w0 = d_p1.T @ inputs
    g_b0 = d_p1.sum(axis=0)
    return loss, [g_w0, g_b0, g_w1, g_b1, g_w2, g_b2]


def _batch_arrays(batch):
    diffuse = np.stack([ex.diffuse for ex in batch])
    feature = np.stack([ex.feature for ex in batch])
    direction = np.stack([ex.direction for ex in batch])
    target = np.stack([ex.target for ex in batch])
    return diffuse, feature, direction, target


def shade_loss_and_grad(mlp: DeferredMlp, batch):
    """Training loss and gradients w.r.t. every network parameter.

    Returns (loss, [dW0, db0, dW1, db1, dW2, db2]) in :meth:`DeferredMlp.params`
    order.
    """
    if len(batch) == 0:
        raise ValueError("batch must be nonempty")
    diffuse, feature, direction, target = _batch_arrays(batch)
    inputs = shade_inputs(diffuse, feature, direction, mlp.dir_encoding_bands)
    return _loss_and_grad_arrays(mlp.params(), inputs, diffuse, target)


def _full_loss(params, inputs, diffuse, targets, chunk=65536):
    total = 0.0
    count = inputs.shape[0]
    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        residual, _ = _forward(params, inputs[start:stop])
        error = diffuse[start:stop] + residual - targets[start:stop]
        total += float(np.sum(error * error))
    return total / count


def precompute_examples(grid, views, config: RenderConfig):
    """March every view once and build the training arrays.

    Pixels whose rays accumulated nothing are dropped: their shading skips
    the network, so they carry no gradient. Targets are the reference pixels
    with the background term removed (the compositing step the renderer adds
    after shading), clipped back to [0, 1]. That inversion is exact only
    where the composited pixel did not saturate, so reference views rendered
    over a black background give the cleanest targets.
    """
    background = np.asarray(config.background)
    all_diffuse, all_feature, all_dirs, all_targets = [], [], [], []
    for camera, image in views:
        image = np.asarray(image, dtype=np.float64)
        if image.shape != (camera.height, camera.width, 3):
            raise ValueError(
                f"reference image is {image.shape}, camera expects "
                f"({camera.height}, {camera.width}, 3)"
            )
        diffuse, feature, alpha, dirs = march_frame(grid, camera, config)
        mask = alpha > 0.0
        target = np.clip(image - (1.0 - alpha)[..., None] * background, 0.0, 1.0)
        all_diffuse.append(diffuse[mask])
        all_feature.append(feature[mask])
        all_dirs.append(dirs[mask])
        all_targets.append(target[mask])
    return (
        np.concatenate(all_diffuse),
        np.concatenate(all_feature),
        np.concatenate(all_dirs),
        np.concatenate(all_targets),
    )


def finetune(
    grid,
    mlp: DeferredMlp,
    views,
    epochs: int = 100,
    lr: float = 3e-4,
    seed: int = 0,
    batch_size: int = 4096,
    config: RenderConfig | None = None,
):
    """Optimize the shading network against reference views; grid frozen.

    Returns (best mlp, loss trace). The trace holds the full-dataset loss
    before training and after every epoch; the returned network is the
    best-loss checkpoint over those evaluations, so its loss never exceeds
    the initial one.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be non-negative, got {epochs}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    if len(views) == 0:
        raise ValueError("views must be nonempty")
    config = config if config is not None else RenderConfig()
    diffuse, feature, dirs, targets = precompute_examples(grid, views, config)
    count = diffuse.shape[0]
    if count == 0:
        raise ValueError("no reference pixel hit the grid; nothing to optimize")
    inputs = shade_inputs(diffuse, feature, dirs, mlp.dir_encoding_bands)

    params = mlp.params()
    state = AdamState.init(params, lr)
    trace = [_full_loss(params, inputs, diffuse, targets)]
    best_loss = trace[0]
    best_params = [p.copy() for p in params]
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        order = rng.permutation(count)
        for start in range(0, count, batch_size):
            idx = order[start : start + batch_size]
            _, grads = _loss_and_grad_arrays(params, inputs[idx], diffuse[idx], targets[idx])
            params, state = adam_step(params, grads, state)
        epoch_loss = _full_loss(params, inputs, diffuse, targets)
        trace.append(epoch_loss)
        if epoch_loss < best_loss:
            best_loss = epoch_loss
            best_params = [p.copy() for p in params]
    return mlp.with_params(best_params), trace
