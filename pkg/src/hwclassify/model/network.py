"""Residual CNN: config, parameter init, forward pass, full backward pass.

Layout: stem conv + norm + relu, then the configured stages of residual
blocks (3x3 conv, instance norm, relu, 3x3 conv, instance norm; 1x1
projection shortcut when channels or stride change), global average
pooling, and a linear embedding. With num_classes set, one more linear
layer produces logits; with num_classes None the embedding is the
output, with no terminal nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError, ShapeError
from . import layers

DTYPES = {"float64": np.float64, "float32": np.float32}


@dataclass(frozen=True)
class ModelConfig:
    stages: tuple[tuple[int, int, int], ...] = ((16, 2, 2), (32, 2, 2), (64, 2, 2), (128, 2, 2))
    embedding_dim: int = 512
    num_classes: int | None = None
    input_shape: tuple[int, int, int] = (1, 64, 216)
    dtype: str = "float64"

    def __post_init__(self):
        if self.embedding_dim <= 0:
            raise ConfigurationError(f"embedding_dim must be > 0, got {self.embedding_dim}")
        if self.num_classes is not None and self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2 or None, got {self.num_classes}")
        if not self.stages:
            raise ConfigurationError("at least one stage required")
        for st in self.stages:
            ch, blocks, stride = st
            if ch < 1 or blocks < 1 or stride not in (1, 2):
                raise ConfigurationError(f"bad stage spec {st}")
        if len(self.input_shape) != 3 or self.input_shape[0] != 1:
            raise ConfigurationError(f"input_shape must be (1, H, W), got {self.input_shape}")
        if self.dtype not in DTYPES:
            raise ConfigurationError(f"dtype must be one of {sorted(DTYPES)}, got {self.dtype!r}")
        h, w = self.input_shape[1:]
        n_stride2 = sum(1 for _, _, s in self.stages if s == 2)
        if min(h, w) < 2**n_stride2:
            raise ConfigurationError(f"input {h}x{w} too small for {n_stride2} stride-2 stages")

    def to_dict(self) -> dict:
        return {
            "stages": [list(s) for s in self.stages],
            "embedding_dim": self.embedding_dim,
            "num_classes": self.num_classes,
            "input_shape": list(self.input_shape),
            "dtype": self.dtype,
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        return ModelConfig(
            stages=tuple(tuple(s) for s in d["stages"]),
            embedding_dim=int(d["embedding_dim"]),
            num_classes=None if d["num_classes"] is None else int(d["num_classes"]),
            input_shape=tuple(d["input_shape"]),
            dtype=d.get("dtype", "float64"),
        )


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Analytic name -> shape table; the single source of truth."""
    shapes: dict[str, tuple[int, ...]] = {}
    c0 = cfg.stages[0][0]
    shapes["stem.conv.w"] = (c0, 1, 3, 3)
    shapes["stem.norm.gamma"] = (c0,)
    shapes["stem.norm.beta"] = (c0,)
    in_ch = c0
    for si, (ch, blocks, stride) in enumerate(cfg.stages):
        for bi in range(blocks):
            s = stride if bi == 0 else 1
            prefix = f"stage{si}.block{bi}"
            shapes[f"{prefix}.conv1.w"] = (ch, in_ch, 3, 3)
            shapes[f"{prefix}.norm1.gamma"] = (ch,)
            shapes[f"{prefix}.norm1.beta"] = (ch,)
            shapes[f"{prefix}.conv2.w"] = (ch, ch, 3, 3)
            shapes[f"{prefix}.norm2.gamma"] = (ch,)
            shapes[f"{prefix}.norm2.beta"] = (ch,)
            if s != 1 or in_ch != ch:
                shapes[f"{prefix}.proj.w"] = (ch, in_ch, 1, 1)
            in_ch = ch
    shapes["head.embed.w"] = (cfg.embedding_dim, in_ch)
    shapes["head.embed.b"] = (cfg.embedding_dim,)
    if cfg.num_classes is not None:
        shapes["head.logits.w"] = (cfg.num_classes, cfg.embedding_dim)
        shapes["head.logits.b"] = (cfg.num_classes,)
    return shapes


def init_params(cfg: ModelConfig, seed: int) -> dict[str, np.ndarray]:
    """He fan-in normal for weights, ones/zeros for norm scales, zero biases."""
    rng = np.random.default_rng(seed)
    dtype = DTYPES[cfg.dtype]
    params = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith(".gamma"):
            params[name] = np.ones(shape, dtype=dtype)
        elif name.endswith((".beta", ".b")):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            fan_in = int(np.prod(shape[1:]))
            std = np.sqrt(2.0 / fan_in)
            params[name] = (rng.normal(0.0, std, size=shape)).astype(dtype)
    return params


def _block_forward(params, prefix: str, x, stride: int):
    tape = {}
    out, tape["conv1"] = layers.conv2d_forward(x, params[f"{prefix}.conv1.w"], stride=stride, pad=1)
    out, tape["norm1"] = layers.instance_norm_forward(
        out, params[f"{prefix}.norm1.gamma"], params[f"{prefix}.norm1.beta"]
    )
    out, tape["relu1"] = layers.relu_forward(out)
    out, tape["conv2"] = layers.conv2d_forward(out, params[f"{prefix}.conv2.w"], stride=1, pad=1)
    out, tape["norm2"] = layers.instance_norm_forward(
        out, params[f"{prefix}.norm2.gamma"], params[f"{prefix}.norm2.beta"]
    )
    if f"{prefix}.proj.w" in params:
        shortcut, tape["proj"] = layers.conv2d_forward(x, params[f"{prefix}.proj.w"], stride=stride, pad=0)
    else:
        shortcut = x
    out, tape["relu_out"] = layers.relu_forward(out + shortcut)
    return out, tape


def _block_backward(params, prefix: str, grad, tape, grads):
    grad = layers.relu_backward(grad, tape["relu_out"])
    grad_shortcut = grad
    grad, grads[f"{prefix}.norm2.gamma"], grads[f"{prefix}.norm2.beta"] = layers.instance_norm_backward(
        grad, tape["norm2"]
    )
    grad, grads[f"{prefix}.conv2.w"] = layers.conv2d_backward(grad, tape["conv2"])
    grad = layers.relu_backward(grad, tape["relu1"])
    grad, grads[f"{prefix}.norm1.gamma"], grads[f"{prefix}.norm1.beta"] = layers.instance_norm_backward(
        grad, tape["norm1"]
    )
    grad_x, grads[f"{prefix}.conv1.w"] = layers.conv2d_backward(grad, tape["conv1"])
    if f"{prefix}.proj.w" in params:
        g, grads[f"{prefix}.proj.w"] = layers.conv2d_backward(grad_shortcut, tape["proj"])
        grad_x = grad_x + g
    else:
        grad_x = grad_x + grad_shortcut
    return grad_x


def forward(params: dict, cfg: ModelConfig, batch: np.ndarray, want_cache: bool = False, debug: bool = False):
    """Batch (B,1,H,W) -> logits (B,num_classes) or embeddings (B,embedding_dim)."""
    x = np.asarray(batch, dtype=DTYPES[cfg.dtype])
    if x.ndim != 4 or tuple(x.shape[1:]) != tuple(cfg.input_shape):
        raise ShapeError(
            f"batch shape {tuple(x.shape)} does not match (B, {', '.join(map(str, cfg.input_shape))})"
        )
    tape = []
    out, cache = layers.conv2d_forward(x, params["stem.conv.w"], stride=1, pad=1)
    tape.append(("stem.conv", cache))
    out, cache = layers.instance_norm_forward(out, params["stem.norm.gamma"], params["stem.norm.beta"])
    tape.append(("stem.norm", cache))
    out, cache = layers.relu_forward(out)
    tape.append(("stem.relu", cache))
    for si, (ch, blocks, stride) in enumerate(cfg.stages):
        for bi in range(blocks):
            prefix = f"stage{si}.block{bi}"
            out, block_tape = _block_forward(params, prefix, out, stride if bi == 0 else 1)
            tape.append((prefix, block_tape))
    out, cache = layers.global_avg_pool_forward(out)
    tape.append(("gap", cache))
    out, cache = layers.linear_forward(out, params["head.embed.w"], params["head.embed.b"])
    tape.append(("head.embed", cache))
    if cfg.num_classes is not None:
        out, cache = layers.linear_forward(out, params["head.logits.w"], params["head.logits.b"])
        tape.append(("head.logits", cache))
    if debug and not np.isfinite(out).all():
        raise FloatingPointError("non-finite values in network output")
    if want_cache:
        return out, tape
    return out


def backward(params: dict, cfg: ModelConfig, tape: list, grad_out: np.ndarray) -> dict[str, np.ndarray]:
    """Gradient of a scalar loss wrt every parameter, given d(loss)/d(output)."""
    grads: dict[str, np.ndarray] = {}
    grad = np.asarray(grad_out, dtype=DTYPES[cfg.dtype])
    for name, cache in reversed(tape):
        if name == "head.logits":
            grad, grads["head.logits.w"], grads["head.logits.b"] = layers.linear_backward(grad, cache)
        elif name == "head.embed":
            grad, grads["head.embed.w"], grads["head.embed.b"] = layers.linear_backward(grad, cache)
        elif name == "gap":
            grad = layers.global_avg_pool_backward(grad, cache)
        elif name == "stem.relu":
            grad = layers.relu_backward(grad, cache)
        elif name == "stem.norm":
            grad, grads["stem.norm.gamma"], grads["stem.norm.beta"] = layers.instance_norm_backward(grad, cache)
        elif name == "stem.conv":
            grad, grads["stem.conv.w"] = layers.conv2d_backward(grad, cache)
        else:
            grad = _block_backward(params, name, grad, cache, grads)
    return grads


def embed(params: dict, cfg: ModelConfig, batch: np.ndarray) -> np.ndarray:
    """Embedding-layer activations, regardless of which head is configured."""
    if cfg.num_classes is None:
        return forward(params, cfg, batch)
    trimmed = {k: v for k, v in params.items() if not k.startswith("head.logits")}
    return forward(trimmed, replace(cfg, num_classes=None), batch)
