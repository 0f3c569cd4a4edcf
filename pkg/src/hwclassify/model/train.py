"""Training loop: seeded shuffling, Adam updates, divergence handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .checkpoint import Checkpoint
from .losses import softmax_cross_entropy, triplet_loss
from .mining import mine_triplets
from .network import DTYPES, ModelConfig, forward, backward, init_params
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class HyperParams:
    lr: float = 1e-4
    batch_size: int = 128
    epochs: int = 20
    loss: str = "softmax"
    margin: float = 0.2
    mining: str = "random"  # random | batch_hard | warmup_hard
    seed: int = 0

    def __post_init__(self):
        if self.loss not in ("softmax", "triplet"):
            raise ConfigurationError(f"loss must be softmax or triplet, got {self.loss!r}")
        if self.mining not in ("random", "batch_hard", "warmup_hard"):
            raise ConfigurationError(
                f"mining must be random, batch_hard, or warmup_hard, got {self.mining!r}"
            )
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise ConfigurationError("lr > 0, batch_size >= 1, epochs >= 0 required")
        if self.margin <= 0:
            raise ConfigurationError(f"margin must be > 0, got {self.margin}")


def infer(params: dict, cfg: ModelConfig, x: np.ndarray, batch: int = 256) -> np.ndarray:
    """Forward in chunks; concatenated outputs."""
    outs = [forward(params, cfg, x[i : i + batch]) for i in range(0, len(x), batch)]
    return np.concatenate(outs, axis=0)


def _val_metric(params, cfg, hyper, x_val, y_val) -> tuple[str, float]:
    if hyper.loss == "softmax":
        logits = infer(params, cfg, x_val)
        acc = float(np.mean(np.argmax(logits, axis=1) == np.asarray(y_val)))
        return "accuracy", acc
    emb = infer(params, cfg, x_val)
    trips = mine_triplets(y_val, "random", seed=hyper.seed)
    if not trips:
        return "triplet_violation_rate", 0.0
    a = emb[[t.anchor for t in trips]]
    p = emb[[t.positive for t in trips]]
    n = emb[[t.negative for t in trips]]
    viol = ((a - p) ** 2).sum(1) - ((a - n) ** 2).sum(1) + hyper.margin
    return "triplet_violation_rate", float(np.mean(viol > 0))


def train(
    model_cfg: ModelConfig,
    hyper: HyperParams,
    x_train: np.ndarray,
    y_train,
    x_val: np.ndarray | None = None,
    y_val=None,
) -> tuple[Checkpoint, list[dict]]:
    """Returns the trained checkpoint plus one record per epoch.

    Deterministic for a fixed seed: init, shuffle order, and mining all
    derive from it. A non-finite batch loss aborts training and returns
    the last end-of-epoch snapshot (the initialization if epoch 1).
    """
    if len(x_train) == 0:
        raise ConfigurationError("empty training set")
    y_train = np.asarray(y_train, dtype=np.int64)
    if hyper.loss == "softmax":
        if model_cfg.num_classes is None:
            raise ConfigurationError("softmax training needs num_classes in the model config")
        if y_train.max() >= model_cfg.num_classes:
            raise ConfigurationError(
                f"label {y_train.max()} out of range for {model_cfg.num_classes} classes"
            )
    else:
        if model_cfg.num_classes is not None:
            raise ConfigurationError("triplet training uses the embedding head (num_classes None)")
        if np.unique(y_train).size < 2:
            raise ConfigurationError("triplet training needs at least 2 classes")

    dtype = DTYPES[model_cfg.dtype]
    x_train = np.asarray(x_train, dtype=dtype)
    rng = np.random.default_rng(hyper.seed)
    params = init_params(model_cfg, seed=hyper.seed)
    state = AdamState()
    last_good = {k: v.copy() for k, v in params.items()}
    records: list[dict] = []
    n = len(x_train)

    def snapshot(epochs_run: int, aborted: bool) -> Checkpoint:
        meta = {"epochs_run": epochs_run, "seed": hyper.seed, "loss": hyper.loss, "aborted": aborted}
        return Checkpoint(config=model_cfg, params=last_good, opt_state=state, metadata=meta)

    # warmup_hard: easy random triplets first so the embedding spreads out,
    # then batch-hard mining to compress each class around its neighbors.
    warmup = max(1, int(np.ceil(hyper.epochs * 0.4)))

    for epoch in range(hyper.epochs):
        if hyper.mining == "warmup_hard":
            strategy = "random" if epoch < warmup else "batch_hard"
        else:
            strategy = hyper.mining
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, hyper.batch_size):
            idx = perm[start : start + hyper.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            if hyper.loss == "softmax":
                logits, tape = forward(params, model_cfg, xb, want_cache=True)
                loss, dlogits = softmax_cross_entropy(logits, yb)
                grad_out = dlogits
            else:
                emb, tape = forward(params, model_cfg, xb, want_cache=True)
                mine_seed = int(rng.integers(0, 2**63))
                trips = mine_triplets(yb, strategy, embeddings=emb, seed=mine_seed)
                if not trips:
                    continue
                ai = np.array([t.anchor for t in trips])
                pi = np.array([t.positive for t in trips])
                ni = np.array([t.negative for t in trips])
                loss, ga, gp, gn = triplet_loss(emb[ai], emb[pi], emb[ni], hyper.margin)
                grad_out = np.zeros_like(emb)
                np.add.at(grad_out, ai, ga)
                np.add.at(grad_out, pi, gp)
                np.add.at(grad_out, ni, gn)
            if not np.isfinite(loss):
                records.append({"epoch": epoch + 1, "train_loss": float("nan"), "aborted": True})
                return snapshot(epoch, aborted=True), records
            grads = backward(params, model_cfg, tape, grad_out)
            params, state = adam_step(params, grads, state, lr=hyper.lr)
            losses.append(loss)

        record = {"epoch": epoch + 1, "train_loss": float(np.mean(losses)) if losses else 0.0}
        if x_val is not None and len(x_val):
            name, value = _val_metric(params, model_cfg, hyper, np.asarray(x_val, dtype=dtype), y_val)
            record["val_metric"] = value
            record["metric_name"] = name
        records.append(record)
        last_good = {k: v.copy() for k, v in params.items()}

    return snapshot(hyper.epochs, aborted=False), records
