"""Decision strategies over model outputs.

Four ways to turn a trained network into class decisions:

* ``softmax_classify``: argmax over the classifier head's probabilities.
* ``naive_classify``: cluster unseen embeddings with k-means, label each
  centroid by kNN against a labeled support set, samples inherit the cluster
  label.
* ``hard_threshold_classify``: binary belongs / not-belongs by comparing the
  embedding distance to one support sample against a fixed threshold.
* ``llr_classify``: one-vs-all log-likelihood ratios of the query's
  aggregated distance under per-class target / non-target distance
  distributions fitted beforehand on a support or validation set.

``unseen_class_protocol`` wires the naive and llr paths together for the
open-set workflow: embed queries with a frozen checkpoint trained on a class
subset, then classify against a support set that also covers a class the
network never saw.

All tie-breaks are deterministic: distance ties resolve by support index,
vote ties by smaller mean distance then class order, llr ties by class order.
Class order is the canonical corpus order for known labels, with any other
labels sorted alphabetically after it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .dataset import CLASS_ORDER
from .errors import ConfigurationError, DistanceFitError, ShapeError
from .model import Checkpoint, infer, softmax

KMEANS_MAX_ITER = 300
VAR_FLOOR = 1e-12
HIST_BINS = 32
NEAREST_K = 5

AGGREGATIONS = ("nearest5", "min", "mean")


def class_sort_key(label: str):
    """Canonical order for known classes, alphabetical after that."""
    if label in CLASS_ORDER:
        return (CLASS_ORDER.index(label), label)
    return (len(CLASS_ORDER), label)


# --------------------------------------------------------------------------
# support sets


@dataclass(frozen=True)
class SupportSet:
    """Labeled embeddings used as the reference for distance-based decisions."""

    embeddings: np.ndarray  # (N, D)
    labels: tuple
    source: str | None = None

    def __post_init__(self):
        emb = np.asarray(self.embeddings, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] == 0:
            raise ShapeError(f"support embeddings must be (N, D) with N >= 1, got {emb.shape}")
        labels = tuple(str(l) for l in self.labels)
        if len(labels) != emb.shape[0]:
            raise ConfigurationError(f"{len(labels)} labels for {emb.shape[0]} embeddings")
        emb = emb.copy()
        emb.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "labels", labels)

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.labels), key=class_sort_key))

    def indices_of(self, label: str) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.labels, dtype=object) == label)

    def __len__(self) -> int:
        return self.embeddings.shape[0]


def subset_support(support: SupportSet, classes) -> SupportSet:
    """Restrict a support set to the given classes, preserving sample order."""
    wanted = set(classes)
    missing = wanted - set(support.classes)
    if missing:
        raise ConfigurationError(f"support set has no samples of {sorted(missing)}")
    keep = [i for i, l in enumerate(support.labels) if l in wanted]
    return SupportSet(
        embeddings=support.embeddings[keep],
        labels=tuple(support.labels[i] for i in keep),
        source=support.source,
    )


def save_support(path, support: SupportSet) -> None:
    """One JSON object per line: {"label": ..., "embedding": [...]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for label, emb in zip(support.labels, support.embeddings):
            fh.write(json.dumps({"label": label, "embedding": emb.tolist()}) + "\n")


def load_support(path) -> SupportSet:
    labels, rows = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                labels.append(rec["label"])
                rows.append(np.asarray(rec["embedding"], dtype=np.float64))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad support record: {exc}") from exc
    if not rows:
        raise ConfigurationError(f"{path}: empty support set")
    widths = {r.shape for r in rows}
    if len(widths) != 1 or rows[0].ndim != 1:
        raise ShapeError(f"{path}: inconsistent embedding lengths {sorted(widths)}")
    return SupportSet(embeddings=np.stack(rows), labels=tuple(labels), source=str(path))


# --------------------------------------------------------------------------
# softmax path


def softmax_classify(ckpt: Checkpoint, batch: np.ndarray, classes: Sequence[str]):
    """Argmax over head probabilities. Returns (labels, probability matrix).

    Ties broken by lowest class index (np.argmax picks the first maximum).
    """
    if ckpt.config.num_classes is None:
        raise ConfigurationError("checkpoint has no classifier head; train with loss='softmax'")
    if ckpt.config.num_classes != len(classes):
        raise ConfigurationError(
            f"checkpoint head has {ckpt.config.num_classes} classes, manifest has {len(classes)}"
        )
    logits = infer(ckpt.params, ckpt.config, batch)
    probs = softmax(logits)
    preds = [classes[i] for i in np.argmax(probs, axis=1)]
    return preds, probs


# --------------------------------------------------------------------------
# k-means and kNN


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # (N, K) squared euclidean distances
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kpp_seed(points: np.ndarray, k: int, rng) -> np.ndarray:
    """k-means++ seeding: spread initial centroids by D^2 sampling."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(0, n)]
    d2 = _sq_dists(points, centers[:1])[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = rng.integers(0, n)  # all remaining points coincide
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[j] = points[idx]
        d2 = np.minimum(d2, _sq_dists(points, centers[j : j + 1])[:, 0])
    return centers


def kmeans(embeddings: np.ndarray, k: int, seed: int = 0, trace: list | None = None):
    """Lloyd's algorithm with k-means++ seeding.

    Runs to an assignment fixpoint or 300 iterations. Empty clusters are
    re-seeded to the point currently farthest from its centroid, so the
    objective (sum of squared distances to assigned centroids) never
    increases between assignment steps. Pass a list as ``trace`` to collect
    the objective value at each assignment step.

    Returns (centroids (k, D), assignments (N,) int64).
    """
    points = np.asarray(embeddings, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"embeddings must be (N, D), got {points.shape}")
    n = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} available points")
    rng = np.random.default_rng(seed)
    centers = _kpp_seed(points, k, rng)
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_dists(points, centers)
        new_assign = np.argmin(d2, axis=1)
        if trace is not None:
            trace.append(float(d2[np.arange(n), new_assign].sum()))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = points[assign == j]
            if len(members):
                centers[j] = members.mean(axis=0)
        # re-seed empties to the globally farthest point; suppress a point
        # once taken so two empty clusters never grab the same one
        empties = [j for j in range(k) if not np.any(assign == j)]
        if empties:
            cur = _sq_dists(points, centers)[np.arange(n), assign].copy()
            for j in empties:
                far = int(np.argmax(cur))
                centers[j] = points[far]
                cur[far] = -1.0
    return centers, assign


def knn_label(query: np.ndarray, support: SupportSet, k: int = NEAREST_K) -> str:
    """Majority vote among the k nearest support embeddings.

    Distance ties keep support-index order (stable sort); vote ties go to
    the class with the smaller mean distance among its voters, then to
    class order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > len(support):
        raise ValueError(f"k={k} exceeds the {len(support)} support samples")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != support.embeddings.shape[1]:
        raise ShapeError(
            f"query dim {q.shape[0]} != support dim {support.embeddings.shape[1]}"
        )
    dist = np.sqrt(((support.embeddings - q) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")[:k]
    votes: dict = {}
    for idx in order:
        votes.setdefault(support.labels[idx], []).append(dist[idx])
    best = min(
        votes.items(),
        key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), class_sort_key(kv[0])),
    )
    return best[0]


def naive_classify(
    unseen_embeddings: np.ndarray,
    support: SupportSet,
    num_classes: int,
    knn_k: int = NEAREST_K,
    seed: int = 0,
    restarts: int = 8,
):
    """Cluster-then-label: k-means over the unseen embeddings, each centroid
    labeled by kNN against the support set, every sample inherits its
    cluster's label. Returns a label list, one per sample.

    k-means runs ``restarts`` times with sub-seeds derived from ``seed`` and
    the lowest-objective run wins, so a single unlucky seeding cannot wedge
    the clustering in a bad local optimum. Deterministic for a fixed seed.
    """
    emb = np.asarray(unseen_embeddings, dtype=np.float64)
    if emb.ndim != 2:
        raise ShapeError(f"embeddings must be (N, D), got {emb.shape}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    sub_seeds = np.random.default_rng(seed).integers(0, 2**63, size=restarts)
    best = None
    for sub in sub_seeds:
        trace: list = []
        centers, assign = kmeans(emb, num_classes, seed=int(sub), trace=trace)
        if best is None or trace[-1] < best[0]:
            best = (trace[-1], centers, assign)
    _, centers, assign = best
    cluster_labels = [knn_label(c, support, k=knn_k) for c in centers]
    return [cluster_labels[a] for a in assign]


def hard_threshold_classify(query: np.ndarray, support_embedding: np.ndarray, threshold: float) -> bool:
    """Distance <= threshold means the query belongs to the support sample's
    class; strictly greater means it does not. Equality counts as belonging.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    s = np.asarray(support_embedding, dtype=np.float64).reshape(-1)
    if q.shape != s.shape:
        raise ShapeError(f"query dim {q.shape[0]} != support dim {s.shape[0]}")
    return bool(np.sqrt(((q - s) ** 2).sum()) <= threshold)


# --------------------------------------------------------------------------
# distance distributions and llr scoring


@dataclass(frozen=True)
class DistanceModel:
    """Per-class target / non-target distance distributions.

    ``family`` is "gaussian" (ML mean + variance, variance floored at 1e-12)
    or "histogram" (32 equal-width bins over the observed range, add-one
    smoothed, so densities never hit zero). ``stats`` maps each class to
    {"target": params, "nontarget": params}.
    """

    family: str
    classes: tuple
    stats: Mapping[str, Mapping[str, tuple]]

    def log_density(self, label: str, kind: str, d: float) -> float:
        params = self.stats[label][kind]
        if self.family == "gaussian":
            mean, var = params
            return float(-0.5 * np.log(2.0 * np.pi * var) - (d - mean) ** 2 / (2.0 * var))
        lo, width, dens, floor = params
        hi = lo + width * len(dens)
        if lo <= d <= hi:
            # right edge belongs to the last bin, matching np.histogram
            idx = min(int((d - lo) // width), len(dens) - 1)
            return float(np.log(dens[idx]))
        # outside the observed range: the smoothed empty-bin floor, never -inf
        return float(np.log(floor))


@dataclass(frozen=True)
class LlrScore:
    """Per-class log-likelihood ratios and the argmax decision."""

    per_class: Mapping[str, float]
    predicted: str


def _pairwise(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Pairwise distances: within a (upper triangle) or between a and b."""
    if b is None:
        n = a.shape[0]
        iu = np.triu_indices(n, k=1)
        diff = a[iu[0]] - a[iu[1]]
        return np.sqrt((diff**2).sum(axis=1))
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("nkd,nkd->nk", diff, diff)).reshape(-1)


def fit_distances(dists: np.ndarray, family: str) -> tuple:
    """Fit one distance sample to the given family; returns the param tuple
    stored in DistanceModel.stats (gaussian: (mean, var); histogram:
    (lo, width, densities, floor)).
    """
    dists = np.asarray(dists, dtype=np.float64).reshape(-1)
    if family == "gaussian":
        mean = float(dists.mean())
        var = max(float(dists.var()), VAR_FLOOR)
        return (mean, var)
    lo = float(dists.min())
    hi = float(dists.max())
    width = max((hi - lo) / HIST_BINS, 1e-9)
    counts, _ = np.histogram(dists, bins=HIST_BINS, range=(lo, lo + width * HIST_BINS))
    dens = (counts + 1.0) / ((len(dists) + HIST_BINS) * width)
    floor = 1.0 / ((len(dists) + HIST_BINS) * width)
    return (lo, width, dens, floor)


def fit_distance_model(support: SupportSet, family: str = "gaussian") -> DistanceModel:
    """Fit per-class target (same-class) and non-target (one-vs-all) distance
    distributions from a support or validation set.

    Requires at least 2 same-class pairs and 2 cross-class pairs per class.
    """
    if family not in ("gaussian", "histogram"):
        raise ConfigurationError(f"unknown distribution family {family!r}")
    stats = {}
    for label in support.classes:
        own = support.embeddings[support.indices_of(label)]
        rest = support.embeddings[
            np.flatnonzero(np.asarray(support.labels, dtype=object) != label)
        ]
        target = _pairwise(own)
        nontarget = _pairwise(own, rest) if len(rest) else np.empty(0)
        if len(target) < 2:
            raise DistanceFitError(
                label, f"{len(own)} support samples give {len(target)} same-class pairs, need >= 2"
            )
        if len(nontarget) < 2:
            raise DistanceFitError(label, f"only {len(nontarget)} cross-class pairs, need >= 2")
        stats[label] = {
            "target": fit_distances(target, family),
            "nontarget": fit_distances(nontarget, family),
        }
    return DistanceModel(family=family, classes=support.classes, stats=stats)


def aggregate_distance(query: np.ndarray, support: SupportSet, label: str, aggregation: str) -> float:
    """Collapse query-to-class distances to one number.

    "nearest5" (default elsewhere) = mean of the 5 smallest distances, or all
    if the class has fewer; "min" and "mean" as named.
    """
    if aggregation not in AGGREGATIONS:
        raise ConfigurationError(f"unknown aggregation {aggregation!r}, expected one of {AGGREGATIONS}")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    emb = support.embeddings[support.indices_of(label)]
    dist = np.sqrt(((emb - q) ** 2).sum(axis=1))
    if aggregation == "min":
        return float(dist.min())
    if aggregation == "mean":
        return float(dist.mean())
    k = min(NEAREST_K, len(dist))
    return float(np.sort(dist)[:k].mean())


def llr_classify(
    query: np.ndarray,
    support: SupportSet,
    dm: DistanceModel,
    aggregation: str = "nearest5",
) -> LlrScore:
    """One-vs-all soft decision.

    For each class, aggregate the query's distance to that class's support
    embeddings, then score llr = log p(d | target) - log p(d | non-target).
    The predicted class is the llr argmax; ties go to class order.
    """
    scores = {}
    for label in dm.classes:
        d = aggregate_distance(query, support, label, aggregation)
        scores[label] = dm.log_density(label, "target", d) - dm.log_density(label, "nontarget", d)
    # dm.classes is in class order, so the first argmax is the tie-break winner
    best = max(scores.values())
    predicted = next(c for c in dm.classes if scores[c] == best)
    return LlrScore(per_class=scores, predicted=predicted)


# --------------------------------------------------------------------------
# unseen-class workflow


def embed_queries(ckpt: Checkpoint, batch: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Embeddings from any checkpoint: the classifier head, if present, is
    dropped so both softmax- and triplet-trained models expose the same
    embedding space.
    """
    cfg = replace(ckpt.config, num_classes=None)
    params = {k: v for k, v in ckpt.params.items() if not k.startswith("head.logits.")}
    return infer(params, cfg, batch, batch=batch_size)


@dataclass(frozen=True)
class UnseenResult:
    classes: tuple
    naive_predictions: tuple
    llr_predictions: tuple
    llr_scores: tuple
    naive_accuracy: float | None = None
    llr_accuracy: float | None = None
    metadata: dict = field(default_factory=dict)


def unseen_class_protocol(
    ckpt: Checkpoint,
    support: SupportSet,
    queries: np.ndarray,
    new_class: str,
    true_labels: Sequence[str] | None = None,
    knn_k: int = NEAREST_K,
    family: str = "gaussian",
    aggregation: str = "nearest5",
    seed: int = 0,
) -> UnseenResult:
    """Classify queries from a class mix the network never trained on.

    The checkpoint (trained on a class subset) embeds the queries; the
    support set must also cover ``new_class`` with at least 2 samples. Both
    the naive (k-means + kNN, k = number of support classes) and llr paths
    run over the same embeddings.
    """
    if new_class not in support.classes:
        raise ConfigurationError(f"support set has no samples of new class {new_class!r}")
    if len(support.indices_of(new_class)) < 2:
        raise ConfigurationError(f"need >= 2 support samples of {new_class!r}")
    emb = embed_queries(ckpt, queries)
    k = len(support.classes)
    naive_preds = naive_classify(emb, support, num_classes=k, knn_k=knn_k, seed=seed)
    dm = fit_distance_model(support, family=family)
    scores = [llr_classify(e, support, dm, aggregation=aggregation) for e in emb]
    llr_preds = [s.predicted for s in scores]
    naive_acc = llr_acc = None
    if true_labels is not None:
        truth = list(true_labels)
        if len(truth) != len(emb):
            raise ConfigurationError(f"{len(truth)} labels for {len(emb)} queries")
        naive_acc = float(np.mean([p == t for p, t in zip(naive_preds, truth)]))
        llr_acc = float(np.mean([p == t for p, t in zip(llr_preds, truth)]))
    return UnseenResult(
        classes=support.classes,
        naive_predictions=tuple(naive_preds),
        llr_predictions=tuple(llr_preds),
        llr_scores=tuple(scores),
        naive_accuracy=naive_acc,
        llr_accuracy=llr_acc,
        metadata={"new_class": new_class, "k": k, "family": family, "aggregation": aggregation},
    )
