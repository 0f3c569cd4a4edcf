"""Differentiable layer primitives: forward returns (out, cache), backward
consumes (grad_out, cache) and returns input/parameter gradients.

All math is plain numpy in the dtype of the inputs. Convolution uses
im2col + matmul; its backward rebuilds the column matrix from the cached
input instead of caching it, trading a little compute for memory.
"""

from __future__ import annotations

import numpy as np

IN_EPS = 1e-5


def _col_indices(in_c: int, h: int, w: int, kh: int, kw: int, stride: int, pad: int):
    out_h = (h + 2 * pad - kh) // stride + 1
    out_w = (w + 2 * pad - kw) // stride + 1
    # row index of every element in the (C*kh*kw, out_h*out_w) column matrix
    i0 = np.repeat(np.arange(kh), kw)
    i0 = np.tile(i0, in_c)
    i1 = stride * np.repeat(np.arange(out_h), out_w)
    j0 = np.tile(np.arange(kw), kh * in_c)
    j1 = stride * np.tile(np.arange(out_w), out_h)
    i = i0.reshape(-1, 1) + i1.reshape(1, -1)
    j = j0.reshape(-1, 1) + j1.reshape(1, -1)
    c = np.repeat(np.arange(in_c), kh * kw).reshape(-1, 1)
    return c, i, j, out_h, out_w


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int):
    b, in_c, h, w = x.shape
    c, i, j, out_h, out_w = _col_indices(in_c, h, w, kh, kw, stride, pad)
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    return x[:, c, i, j], out_h, out_w


def conv2d_forward(x: np.ndarray, w: np.ndarray, stride: int = 1, pad: int = 1):
    """x (B,Cin,H,W), w (Cout,Cin,kh,kw) -> out (B,Cout,Ho,Wo)."""
    out_c, in_c, kh, kw = w.shape
    cols, out_h, out_w = _im2col(x, kh, kw, stride, pad)
    out = np.matmul(w.reshape(out_c, -1), cols).reshape(x.shape[0], out_c, out_h, out_w)
    return out, (x, w, stride, pad)


def conv2d_backward(grad_out: np.ndarray, cache):
    x, w, stride, pad = cache
    b, in_c, h, w_in = x.shape
    out_c, _, kh, kw = w.shape
    cols, out_h, out_w = _im2col(x, kh, kw, stride, pad)
    grad2 = grad_out.reshape(b, out_c, out_h * out_w)
    grad_w = np.einsum("bcl,bkl->ck", grad2, cols).reshape(w.shape)
    grad_cols = np.matmul(w.reshape(out_c, -1).T, grad2)  # (B, K, L)
    c, i, j, _, _ = _col_indices(in_c, h, w_in, kh, kw, stride, pad)
    padded = np.zeros((b, in_c, h + 2 * pad, w_in + 2 * pad), dtype=x.dtype)
    np.add.at(padded, (slice(None), c, i, j), grad_cols)
    grad_x = padded[:, :, pad : pad + h, pad : pad + w_in] if pad else padded
    return grad_x, grad_w


def instance_norm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray):
    """Per-sample, per-channel normalization over the spatial axes.

    No batch statistics, so every sample is processed independently and
    inference needs no running averages.
    """
    mu = x.mean(axis=(2, 3), keepdims=True)
    var = x.var(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + IN_EPS)
    xhat = (x - mu) * inv_std
    out = gamma[None, :, None, None] * xhat + beta[None, :, None, None]
    return out, (xhat, inv_std, gamma)


def instance_norm_backward(grad_out: np.ndarray, cache):
    xhat, inv_std, gamma = cache
    grad_beta = grad_out.sum(axis=(0, 2, 3))
    grad_gamma = (grad_out * xhat).sum(axis=(0, 2, 3))
    g = grad_out * gamma[None, :, None, None]
    mean_g = g.mean(axis=(2, 3), keepdims=True)
    mean_gx = (g * xhat).mean(axis=(2, 3), keepdims=True)
    grad_x = inv_std * (g - mean_g - xhat * mean_gx)
    return grad_x, grad_gamma, grad_beta


def relu_forward(x: np.ndarray):
    out = np.maximum(x, 0)
    return out, (x > 0)


def relu_backward(grad_out: np.ndarray, mask):
    return grad_out * mask


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """x (B,Din), w (Dout,Din), b (Dout,) -> (B,Dout)."""
    return x @ w.T + b, (x, w)


def linear_backward(grad_out: np.ndarray, cache):
    x, w = cache
    grad_x = grad_out @ w
    grad_w = grad_out.T @ x
    grad_b = grad_out.sum(axis=0)
    return grad_x, grad_w, grad_b


def global_avg_pool_forward(x: np.ndarray):
    return x.mean(axis=(2, 3)), x.shape


def global_avg_pool_backward(grad_out: np.ndarray, shape):
    b, c, h, w = shape
    return np.broadcast_to(grad_out[:, :, None, None], shape) / (h * w)
