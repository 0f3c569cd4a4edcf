"""Triplet mining over an index-labeled batch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Triplet:
    """Index triplet into a batch; anchor and positive share a label."""

    anchor: int
    positive: int
    negative: int


def mine_triplets(labels, strategy: str, embeddings: np.ndarray | None = None, seed: int = 0):
    """One triplet per eligible anchor (an anchor needs a same-label
    partner and at least one other label in the batch).

    random: positive and negative drawn uniformly, seeded.
    batch_hard: positive = farthest same-label sample, negative =
    nearest other-label sample (Euclidean; ties -> lowest index).
    Returns [] when no valid triplet exists.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if strategy not in ("random", "batch_hard"):
        raise ValueError(f"unknown mining strategy {strategy!r}")
    if strategy == "batch_hard":
        if embeddings is None:
            raise ValueError("batch_hard mining needs embeddings")
        if len(embeddings) != n:
            raise ValueError(f"{len(embeddings)} embeddings for {n} labels")
        diff = embeddings[:, None, :] - embeddings[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))

    rng = np.random.default_rng(seed)
    triplets = []
    for a in range(n):
        pos_idx = np.flatnonzero((labels == labels[a]) & (np.arange(n) != a))
        neg_idx = np.flatnonzero(labels != labels[a])
        if pos_idx.size == 0 or neg_idx.size == 0:
            continue
        if strategy == "random":
            p = int(pos_idx[rng.integers(pos_idx.size)])
            g = int(neg_idx[rng.integers(neg_idx.size)])
        else:
            # argmax/argmin return the first (lowest-index) winner on ties
            p = int(pos_idx[np.argmax(dist[a, pos_idx])])
            g = int(neg_idx[np.argmin(dist[a, neg_idx])])
        triplets.append(Triplet(anchor=a, positive=p, negative=g))
    return triplets
