"""Bridges between manifests on disk and model-ready arrays.

The manifest stores image paths relative to its own directory; loaders here
resolve them, push every image through the shared preprocessing config, and
hand back stacked tensors plus label indices in a fixed class order. The
support-set builders sample a controlled number of labeled embeddings per
class for the distance-based classifiers.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import SupportSet, embed_queries
from .dataset import PreprocessConfig, corpus_norm_stats, load_manifest, preprocess, read_png
from .errors import ConfigurationError
from .model import Checkpoint


def load_arrays(manifest_path, pre: PreprocessConfig, classes: Sequence[str] | None = None):
    """Manifest -> (x (N,1,H,W), y (N,) int64, classes).

    Label indices follow the manifest's class order unless an explicit
    ``classes`` order is given (pass the training order so split files
    stay index-compatible).
    """
    man = load_manifest(manifest_path)
    if len(man) == 0:
        raise ConfigurationError(f"{manifest_path}: empty manifest")
    root = Path(manifest_path).parent
    order = tuple(classes) if classes is not None else man.classes()
    index = {c: i for i, c in enumerate(order)}
    xs, ys = [], []
    for s in man.samples:
        if s.label not in index:
            raise ConfigurationError(f"label {s.label!r} not in class order {order}")
        xs.append(preprocess(read_png(root / s.image_path), pre))
        ys.append(index[s.label])
    return np.stack(xs), np.array(ys, dtype=np.int64), order


def manifest_norm_stats(manifest_path, pre: PreprocessConfig):
    """Corpus mean/std of [0,1]-scaled preprocessed pixels."""
    man = load_manifest(manifest_path)
    root = Path(manifest_path).parent
    images = (read_png(root / s.image_path) for s in man.samples)
    return corpus_norm_stats(images, pre)


def embed_manifest(ckpt: Checkpoint, manifest_path, pre: PreprocessConfig):
    """Embed every manifest sample. Returns (embeddings (N,D), labels)."""
    man = load_manifest(manifest_path)
    if len(man) == 0:
        raise ConfigurationError(f"{manifest_path}: empty manifest")
    root = Path(manifest_path).parent
    x = np.stack([preprocess(read_png(root / s.image_path), pre) for s in man.samples])
    emb = embed_queries(ckpt, x)
    return emb, tuple(s.label for s in man.samples)


def build_support(
    ckpt: Checkpoint,
    manifest_path,
    pre: PreprocessConfig,
    per_class,
    seed: int = 0,
    classes: Sequence[str] | None = None,
) -> SupportSet:
    """Sample per-class support images from a manifest and embed them.

    ``per_class`` is an int applied to every class or a {label: n} mapping;
    classes defaults to everything in the manifest. Sampling is seeded and
    without replacement.
    """
    man = load_manifest(manifest_path)
    root = Path(manifest_path).parent
    wanted = tuple(classes) if classes is not None else man.classes()
    if isinstance(per_class, int):
        per_class = {c: per_class for c in wanted}
    rng = np.random.default_rng(seed)
    chosen = []
    for label in wanted:
        pool = [i for i, s in enumerate(man.samples) if s.label == label]
        n = per_class.get(label, 0)
        if n < 1:
            raise ConfigurationError(f"support size for {label!r} must be >= 1")
        if len(pool) < n:
            raise ConfigurationError(
                f"manifest has {len(pool)} samples of {label!r}, need {n} for the support set"
            )
        take = rng.choice(len(pool), size=n, replace=False)
        chosen.extend(pool[i] for i in sorted(take))
    x = np.stack([preprocess(read_png(root / man.samples[i].image_path), pre) for i in chosen])
    emb = embed_queries(ckpt, x)
    labels = tuple(man.samples[i].label for i in chosen)
    return SupportSet(embeddings=emb, labels=labels, source=str(manifest_path))
