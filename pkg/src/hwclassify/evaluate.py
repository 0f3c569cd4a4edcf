"""Metrics, confusion matrices, PCA projections, and report emission.

Headline numbers follow the weighted-averaging convention by default: per
class precision/recall are weighted by true-class support, and the headline
F1 is the harmonic mean of the averaged precision and recall. With weighted
averaging, recall is identically the accuracy. Macro averaging is available
for imbalanced corpora.

Reports are plain files: metrics.json (sorted keys), confusion.csv, pca.csv,
and dependency-free SVG renderings. Identical inputs produce byte-identical
files, so rerun determinism can be checked by hashing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError

AVERAGING = ("weighted", "macro")

# fixed scatter palette, keyed by class position (cycles if ever exceeded)
PALETTE = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts[i][j] = samples of actual class i predicted as class j."""

    classes: tuple
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.classes), len(self.classes)):
            raise ConfigurationError(
                f"counts shape {counts.shape} does not match {len(self.classes)} classes"
            )
        if (counts < 0).any():
            raise ConfigurationError("confusion counts must be >= 0")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str
    per_class: Mapping[str, Mapping[str, float]]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "per_class": {k: dict(v) for k, v in self.per_class.items()},
        }


def confusion(true_labels: Sequence[str], predicted_labels: Sequence[str], classes: Sequence[str]) -> ConfusionMatrix:
    """Count actual-vs-predicted pairs over the given class order."""
    truth = list(true_labels)
    preds = list(predicted_labels)
    if len(truth) != len(preds):
        raise ConfigurationError(f"{len(truth)} true labels vs {len(preds)} predictions")
    classes = tuple(classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, preds):
        if t not in index:
            raise ConfigurationError(f"unknown true label {t!r}")
        if p not in index:
            raise ConfigurationError(f"unknown predicted label {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def metrics(cm: ConfusionMatrix, averaging: str = "weighted") -> MetricsReport:
    """Accuracy, precision, recall, F1 from a confusion matrix.

    Per class: precision = diag/col-sum (0 on an empty column), recall =
    diag/row-sum (0 on an empty row), f1 = 2PR/(P+R) (0 when both are 0).
    Headline precision/recall average per-class values, weighted by
    true-class support or uniformly (macro); headline f1 is the harmonic
    mean of the averaged precision and recall.
    """
    if averaging not in AVERAGING:
        raise ConfigurationError(f"averaging must be one of {AVERAGING}, got {averaging!r}")
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ConfigurationError("empty confusion matrix")
    diag = np.diag(counts)
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(col > 0, diag / np.maximum(col, 1e-300), 0.0)
        rec = np.where(row > 0, diag / np.maximum(row, 1e-300), 0.0)
    f1c = np.where(prec + rec > 0, 2.0 * prec * rec / np.maximum(prec + rec, 1e-300), 0.0)
    # weighted: divide by total once at the end so perfect predictions give
    # exactly 1.0 (integer-valued float sums are exact below 2**53)
    if averaging == "weighted":
        p_avg = float((prec * row).sum() / total)
        r_avg = float((rec * row).sum() / total)
    else:
        p_avg = float(prec.mean())
        r_avg = float(rec.mean())
    f1 = 2.0 * p_avg * r_avg / (p_avg + r_avg) if (p_avg + r_avg) > 0 else 0.0
    per_class = {
        c: {
            "precision": float(prec[i]),
            "recall": float(rec[i]),
            "f1": float(f1c[i]),
            "support": int(row[i]),
        }
        for i, c in enumerate(cm.classes)
    }
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        precision=p_avg,
        recall=r_avg,
        f1=float(f1),
        averaging=averaging,
        per_class=per_class,
    )


def pca_project(embeddings: np.ndarray, out_dim: int = 2):
    """Mean-centered projection onto the top principal axes.

    Component signs are fixed by making each axis's largest-magnitude
    loading positive, so the projection is deterministic. All-equal points
    (rank 0) project to zeros with zero explained-variance ratios.

    Returns (projection (N, out_dim), explained-variance ratios (out_dim,)).
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ConfigurationError(f"need a (N>=2, D) embedding matrix, got shape {x.shape}")
    if out_dim < 1:
        raise ConfigurationError(f"out_dim must be >= 1, got {out_dim}")
    centered = x - x.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    total = float((svals**2).sum())
    proj = np.zeros((x.shape[0], out_dim))
    ratios = np.zeros(out_dim)
    if total == 0.0:
        return proj, ratios
    take = min(out_dim, len(svals))
    comps = vt[:take].copy()
    for i in range(take):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    proj[:, :take] = centered @ comps.T
    ratios[:take] = svals[:take] ** 2 / total
    return proj, ratios


def silhouette_by_class(embeddings: np.ndarray, labels: Sequence[str]) -> dict:
    """Mean silhouette score per class.

    s(i) = (b - a) / max(a, b) with a = mean distance to same-class samples
    and b = the smallest mean distance to any other class; singleton samples
    score 0 by convention.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=object)
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise ConfigurationError("silhouette needs at least 2 classes")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("nkd,nkd->nk", diff, diff))
    scores = np.zeros(len(x))
    for i in range(len(x)):
        own = np.flatnonzero(labels == labels[i])
        if len(own) < 2:
            continue
        a = dist[i, own[own != i]].mean()
        b = min(dist[i, np.flatnonzero(labels == c)].mean() for c in classes if c != labels[i])
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return {c: float(scores[labels == c].mean()) for c in classes}


# --------------------------------------------------------------------------
# report files


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _svg_header(width: int, height: int) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
    )


def confusion_svg(cm: ConfusionMatrix) -> str:
    """Grayscale heatmap, rows = actual, cols = predicted, counts printed."""
    n = len(cm.classes)
    cell = 56
    left, top = 110, 50
    width = left + n * cell + 20
    height = top + n * cell + 30
    peak = max(int(cm.counts.max()), 1)
    parts = [_svg_header(width, height)]
    parts.append(f'<text x="{left}" y="20">rows: actual, cols: predicted</text>\n')
    for j, name in enumerate(cm.classes):
        parts.append(
            f'<text x="{left + j * cell + cell // 2}" y="{top - 8}" text-anchor="middle">{name[:6]}</text>\n'
        )
    for i in range(n):
        parts.append(
            f'<text x="{left - 8}" y="{top + i * cell + cell // 2 + 4}" text-anchor="end">{cm.classes[i][:12]}</text>\n'
        )
        for j in range(n):
            c = int(cm.counts[i, j])
            shade = 255 - int(round(200.0 * c / peak))
            fill = f"rgb({shade},{shade},255)"
            x0, y0 = left + j * cell, top + i * cell
            parts.append(
                f'<rect x="{x0}" y="{y0}" width="{cell}" height="{cell}" fill="{fill}" stroke="#888"/>\n'
            )
            parts.append(
                f'<text x="{x0 + cell // 2}" y="{y0 + cell // 2 + 4}" text-anchor="middle">{c}</text>\n'
            )
    parts.append("</svg>\n")
    return "".join(parts)


def scatter_svg(points: np.ndarray, labels: Sequence[str], ratios=None) -> str:
    """2-D scatter of projected embeddings, one color per class."""
    pts = np.asarray(points, dtype=np.float64)
    labels = list(labels)
    classes = sorted(set(labels))
    size, margin = 420, 45
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    parts = [_svg_header(size + 150, size)]
    title = "embedding projection"
    if ratios is not None:
        title += f" (var {_fmt(float(ratios[0]) * 100)}% / {_fmt(float(ratios[1]) * 100)}%)"
    parts.append(f'<text x="{margin}" y="20">{title}</text>\n')
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{size - 2 * margin}" height="{size - 2 * margin}" '
        f'fill="none" stroke="#444"/>\n'
    )
    color = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}
    for (x, y), label in zip(pts, labels):
        px = margin + (x - lo[0]) / span[0] * (size - 2 * margin)
        py = size - margin - (y - lo[1]) / span[1] * (size - 2 * margin)
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color[label]}" fill-opacity="0.7"/>\n')
    for i, c in enumerate(classes):
        ly = margin + 18 * i
        parts.append(f'<circle cx="{size + 15}" cy="{ly}" r="4" fill="{color[c]}"/>\n')
        parts.append(f'<text x="{size + 25}" y="{ly + 4}">{c}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def emit_report(
    report: MetricsReport,
    cm: ConfusionMatrix,
    pca_points: np.ndarray,
    pca_labels: Sequence[str],
    out_dir,
    ratios=None,
) -> dict:
    """Write metrics.json, confusion.csv, pca.csv, and SVG plots.

    Pure function of its inputs: identical inputs give byte-identical files.
    Inputs are validated before anything is written.
    """
    pts = np.asarray(pca_points, dtype=np.float64)
    labels = list(pca_labels)
    if pts.size == 0 or pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigurationError(f"pca points must be a non-empty (N, 2) array, got shape {pts.shape}")
    if len(labels) != pts.shape[0]:
        raise ConfigurationError(f"{len(labels)} labels for {pts.shape[0]} pca points")
    out = Path(out_dir)
    plots = out / "plots"
    plots.mkdir(parents=True, exist_ok=True)

    paths = {}
    paths["metrics"] = out / "metrics.json"
    paths["metrics"].write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    lines = ["actual/predicted," + ",".join(cm.classes)]
    for i, name in enumerate(cm.classes):
        lines.append(name + "," + ",".join(str(int(v)) for v in cm.counts[i]))
    paths["confusion"] = out / "confusion.csv"
    paths["confusion"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    rows = ["x,y,label"]
    for (x, y), label in zip(pts, labels):
        rows.append(f"{x!r},{y!r},{label}")
    paths["pca"] = out / "pca.csv"
    paths["pca"].write_text("\n".join(rows) + "\n", encoding="utf-8")

    paths["heatmap"] = plots / "confusion_heatmap.svg"
    paths["heatmap"].write_text(confusion_svg(cm), encoding="utf-8")
    paths["scatter"] = plots / "pca_scatter.svg"
    paths["scatter"].write_text(scatter_svg(pts, labels, ratios=ratios), encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
