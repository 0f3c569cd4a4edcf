"""Corpus assembly, manifests, stratified splits, and preprocessing.

A corpus is a directory of grayscale PNGs plus a JSONL manifest whose
lines carry exactly the Sample fields. Preprocessing turns any image
into a fixed-shape standardized tensor: Otsu binarization (optional),
aspect-preserving bilinear resize, right-pad or center-crop, [0,1]
mapping, then dataset-level mean/std.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from .errors import ConfigurationError, GenerationError, StratificationError
from .printgen import BitmapFont, render_printed
from .strokegen import GlyphBank, RenderSpec, TextGenConfig, compose_string, generate_text, render

# Canonical class order, used everywhere a stable ordering is needed.
CLASS_ORDER = ("word", "number", "date", "alphanumeric", "zip_code")
THREE_CLASSES = ("word", "number", "date")

SOURCES = ("stroke_synth", "printed", "external")
SPLITS = ("train", "val", "test")

# Manifest line keys, in file order.
_SAMPLE_FIELDS = ("image_path", "label", "writer_id", "source", "text")


@dataclass(frozen=True)
class Sample:
    image_path: str
    label: str
    writer_id: str
    source: str
    text: str

    def __post_init__(self):
        if self.label not in CLASS_ORDER:
            raise ValueError(f"unknown label {self.label!r}; expected one of {CLASS_ORDER}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}; expected one of {SOURCES}")
        if self.source == "printed" and self.writer_id != "printed":
            raise ValueError("printed samples must carry writer_id 'printed'")
        if not self.image_path:
            raise ValueError("image_path must be non-empty")


@dataclass(frozen=True)
class Manifest:
    samples: tuple[Sample, ...]
    split: str | None = None

    def __post_init__(self):
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS} or None, got {self.split!r}")

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.samples:
            counts[s.label] = counts.get(s.label, 0) + 1
        return counts

    def classes(self) -> tuple[str, ...]:
        present = {s.label for s in self.samples}
        return tuple(c for c in CLASS_ORDER if c in present)

    def __len__(self) -> int:
        return len(self.samples)


def save_manifest(manifest: Manifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in manifest.samples:
            record = {k: getattr(s, k) for k in _SAMPLE_FIELDS}
            fh.write(json.dumps(record) + "\n")


def load_manifest(path, split: str | None = None) -> Manifest:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                samples.append(Sample(**{k: obj[k] for k in _SAMPLE_FIELDS}))
    return Manifest(samples=tuple(samples), split=split)


def save_png(path, image: np.ndarray) -> None:
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValueError(f"expected a (H, W) uint8 image, got {image.shape} {image.dtype}")
    Image.fromarray(image, mode="L").save(path, format="PNG")


def read_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


# ------------------------------------------------------------------ building


@dataclass(frozen=True)
class CorpusGenerators:
    """Handles and knobs used to synthesize one corpus.

    printed_fraction of each class (rounded) is rendered from the bitmap
    font; the rest is stroke-synthesized. Per-sample style draws:
    stroke_width ~ U[stroke_width_range], ink ~ U[ink_range], writer
    uniform over the bank. inter_glyph_gap in render_spec is a fraction
    of the writer's mean advance width.
    """

    bank: GlyphBank
    text_cfg: TextGenConfig
    render_spec: RenderSpec = RenderSpec()
    font: BitmapFont | None = None
    printed_fraction: float = 0.0
    stroke_width_range: tuple[float, float] = (1.0, 3.0)
    ink_range: tuple[float, float] = (0.0, 0.5)

    def __post_init__(self):
        if not 0.0 <= self.printed_fraction <= 1.0:
            raise ConfigurationError(f"printed_fraction must be in [0, 1], got {self.printed_fraction}")
        if self.printed_fraction > 0 and self.font is None:
            raise ConfigurationError("printed_fraction > 0 requires a font")
        lo, hi = self.stroke_width_range
        if not 1.0 <= lo <= hi:
            raise ConfigurationError(f"bad stroke_width_range {self.stroke_width_range}")
        lo, hi = self.ink_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigurationError(f"bad ink_range {self.ink_range}")


def build_corpus(class_spec: dict[str, int], generators: CorpusGenerators, seed: int, out_dir) -> Manifest:
    """Synthesize PNGs plus a manifest.jsonl under out_dir, deterministically.

    Sample k gets an independent stream seeded from (seed, k), so the
    corpus is reproducible and insensitive to generation order.
    """
    for label, count in class_spec.items():
        if label not in CLASS_ORDER:
            raise ConfigurationError(f"unknown class {label!r} in class_spec")
        if count < 1:
            raise ConfigurationError(f"count for {label!r} must be >= 1, got {count}")

    images_dir = os.path.join(out_dir, "images")
    os.makedirs(images_dir, exist_ok=True)

    writers = generators.bank.writers
    samples = []
    k = 0
    for label in CLASS_ORDER:
        if label not in class_spec:
            continue
        count = class_spec[label]
        n_printed = int(round(generators.printed_fraction * count))
        for i in range(count):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))
            s_text, s_compose, s_render = (int(v) for v in rng.integers(0, 2**63, size=3))
            rel_path = f"images/{label}_{i:05d}.png"
            try:
                text = generate_text(label, generators.text_cfg, s_text)
                if i < n_printed:
                    image = render_printed(
                        text, generators.font, generators.render_spec.target_height, seed=s_render
                    )
                    sample = Sample(rel_path, label, "printed", "printed", text)
                else:
                    writer = writers[int(rng.integers(len(writers)))]
                    gap = generators.render_spec.inter_glyph_gap * generators.bank.mean_advance(writer)
                    composed = compose_string(generators.bank, writer, text, rng_seed=s_compose, gap=gap)
                    spec = replace(
                        generators.render_spec,
                        stroke_width=float(rng.uniform(*generators.stroke_width_range)),
                        ink_intensity=float(rng.uniform(*generators.ink_range)),
                        seed=s_render,
                    )
                    image = render(composed, spec)
                    sample = Sample(rel_path, label, writer, "stroke_synth", text)
            except Exception as exc:
                raise GenerationError(k, label, str(exc)) from exc
            save_png(os.path.join(out_dir, rel_path), image)
            samples.append(sample)
            k += 1

    manifest = Manifest(samples=tuple(samples))
    save_manifest(manifest, os.path.join(out_dir, "manifest.jsonl"))
    return manifest


# ------------------------------------------------------------------ splitting


def split_manifest(
    manifest: Manifest, fractions: tuple[float, float, float], seed: int
) -> tuple[Manifest, Manifest, Manifest]:
    """Stratified train/val/test split; disjoint, union = input.

    Per class, counts follow largest-remainder rounding of the
    fractions; when a class is large enough (>= 3 samples) every split
    is guaranteed at least one of its samples.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ConfigurationError(f"fractions must be three positive values, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"fractions must sum to 1, got sum {sum(fractions)!r}")

    rng = np.random.default_rng(seed)
    chosen: dict[str, list[int]] = {name: [] for name in SPLITS}
    for label in manifest.classes():
        indices = [i for i, s in enumerate(manifest.samples) if s.label == label]
        n = len(indices)
        if n < len(SPLITS):
            raise StratificationError(
                f"class {label!r} has {n} samples; need at least {len(SPLITS)} to populate every split"
            )
        perm = rng.permutation(n)
        counts = _largest_remainder(n, fractions)
        # keep every split non-empty for this class
        while min(counts) == 0:
            counts[int(np.argmin(counts))] += 1
            counts[int(np.argmax(counts))] -= 1
        start = 0
        for name, c in zip(SPLITS, counts):
            part = [indices[j] for j in perm[start : start + c]]
            chosen[name].extend(part)
            start += c

    out = []
    for name in SPLITS:
        picked = sorted(chosen[name])
        out.append(Manifest(samples=tuple(manifest.samples[i] for i in picked), split=name))
    return tuple(out)


def _largest_remainder(n: int, fractions) -> list[int]:
    exact = [f * n for f in fractions]
    base = [int(np.floor(e)) for e in exact]
    leftover = n - sum(base)
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


# ------------------------------------------------------------------ preprocessing


def binarize(image: np.ndarray) -> np.ndarray:
    """Otsu global threshold to {0, 255}.

    Dark is strictly below the threshold, so a pixel equal to the
    threshold stays white (ties break toward background). A constant
    image has no between-class variance anywhere and comes out all
    white. Idempotent on {0, 255} inputs.
    """
    img = np.asarray(image)
    if img.size == 0:
        raise ValueError("empty image")
    if img.dtype != np.uint8:
        img = np.clip(np.rint(img.astype(np.float64)), 0, 255).astype(np.uint8)
    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    # w0(t), sum0(t): mass and first moment of pixels < t, for t = 0..255
    cum = np.concatenate([[0.0], np.cumsum(hist)])[:256]
    cum_mu = np.concatenate([[0.0], np.cumsum(hist * np.arange(256))])[:256]
    w0 = cum / total
    w1 = 1.0 - w0
    mu_all = (hist * np.arange(256)).sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = np.where(cum > 0, cum_mu / cum, 0.0)
        mu1 = np.where(total - cum > 0, (mu_all - cum_mu) / (total - cum), 0.0)
    variance = w0 * w1 * (mu0 - mu1) ** 2
    t = int(np.argmax(variance))  # argmax takes the smallest index on ties
    out = np.where(img < t, 0, 255).astype(np.uint8)
    return out


@dataclass(frozen=True)
class PreprocessConfig:
    out_height: int = 64
    out_width: int = 216
    pad_value: int = 255
    binarize: bool = False
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.out_height < 1 or self.out_width < 1:
            raise ConfigurationError("output dims must be positive")
        if not 0 <= self.pad_value <= 255:
            raise ConfigurationError(f"pad_value must be in [0, 255], got {self.pad_value}")
        if self.std <= 0:
            raise ConfigurationError(f"std must be positive, got {self.std}")


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center alignment, float64 output."""
    img = np.asarray(image, dtype=np.float64)
    in_h, in_w = img.shape
    ys = np.clip((np.arange(out_h) + 0.5) * in_h / out_h - 0.5, 0.0, in_h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * in_w / out_w - 0.5, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def preprocess(image: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """Image -> standardized (1, out_height, out_width) float64 tensor.

    Aspect-preserving resize to out_height, right-pad with pad_value (or
    center-crop when wider than out_width), scale to [0, 1], then apply
    the dataset-level (x - mean) / std.
    """
    img = np.asarray(image)
    if img.size == 0:
        raise ValueError("empty image")
    if cfg.binarize:
        img = binarize(img)
    in_h, in_w = img.shape
    new_w = max(1, int(round(in_w * cfg.out_height / in_h)))
    resized = resize_bilinear(img, cfg.out_height, new_w)
    if new_w < cfg.out_width:
        canvas = np.full((cfg.out_height, cfg.out_width), float(cfg.pad_value))
        canvas[:, :new_w] = resized
    elif new_w > cfg.out_width:
        left = (new_w - cfg.out_width) // 2
        canvas = resized[:, left : left + cfg.out_width]
    else:
        canvas = resized
    scaled = canvas / 255.0
    return ((scaled - cfg.mean) / cfg.std)[None, :, :]


def corpus_norm_stats(images, cfg: PreprocessConfig) -> tuple[float, float]:
    """Mean/std of [0,1]-scaled preprocessed pixels over a set of images.

    Run with cfg.mean/std at their identity defaults; store the result
    back into the config used for training and inference.
    """
    base = replace(cfg, mean=0.0, std=1.0)
    acc = []
    for img in images:
        acc.append(preprocess(img, base).ravel())
    data = np.concatenate(acc)
    std = float(data.std())
    return float(data.mean()), max(std, 1e-12)
