"""Loss functions with analytic gradients."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels) -> tuple[float, np.ndarray]:
    """Mean negative log likelihood; gradient is (softmax - onehot) / B.

    Raises IndexError for labels outside [0, C).
    """
    labels = np.asarray(labels, dtype=np.int64)
    b, c = logits.shape
    if labels.shape != (b,):
        raise ValueError(f"labels shape {labels.shape} does not match batch size {b}")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise IndexError(f"labels must lie in [0, {c}), got range [{labels.min()}, {labels.max()}]")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_z - shifted[np.arange(b), labels]))
    grad = softmax(logits)
    grad[np.arange(b), labels] -= 1.0
    grad /= b
    return loss, grad.astype(logits.dtype)


def triplet_loss(anchor: np.ndarray, positive: np.ndarray, negative: np.ndarray, margin: float):
    """Squared-distance hinge: mean of max(0, d(a,p)^2 - d(a,n)^2 + margin).

    Returns (loss, grad_anchor, grad_positive, grad_negative). Clamped
    triplets (hinge exactly 0 or negative) contribute zero gradient.
    """
    if not (anchor.shape == positive.shape == negative.shape):
        raise ValueError(
            f"triplet shapes differ: {anchor.shape}, {positive.shape}, {negative.shape}"
        )
    if margin <= 0:
        raise ValueError(f"margin must be > 0, got {margin}")
    t = anchor.shape[0]
    d_pos = ((anchor - positive) ** 2).sum(axis=1)
    d_neg = ((anchor - negative) ** 2).sum(axis=1)
    viol = d_pos - d_neg + margin
    active = (viol > 0).astype(anchor.dtype)[:, None]
    loss = float(np.maximum(viol, 0.0).mean())
    grad_a = 2.0 * (negative - positive) * active / t
    grad_p = 2.0 * (positive - anchor) * active / t
    grad_n = 2.0 * (anchor - negative) * active / t
    return loss, grad_a, grad_p, grad_n
