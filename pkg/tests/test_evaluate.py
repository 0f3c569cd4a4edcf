"""Metrics, confusion counting, PCA projection, and report emission."""

import hashlib
import json

import numpy as np
import pytest

from hwclassify.errors import ConfigurationError
from hwclassify.evaluate import (
    ConfusionMatrix,
    confusion,
    emit_report,
    metrics,
    pca_project,
    silhouette_by_class,
)


# ------------------------------------------------------------------ confusion


def test_confusion_perfect_is_diagonal():
    y = ["word", "date", "word", "number", "date"]
    cm = confusion(y, y, classes=("word", "number", "date"))
    np.testing.assert_array_equal(cm.counts, np.diag([2, 1, 2]))
    assert cm.total == 5


def test_confusion_hand_count():
    cm = confusion(["A", "A", "B"], ["A", "B", "B"], classes=("A", "B"))
    np.testing.assert_array_equal(cm.counts, [[1, 1], [0, 1]])


def test_confusion_row_sums_are_true_counts():
    rng = np.random.default_rng(0)
    classes = ("word", "number", "date", "alphanumeric")
    truth = [classes[i] for i in rng.integers(0, 4, size=1000)]
    preds = [classes[i] for i in rng.integers(0, 4, size=1000)]
    cm = confusion(truth, preds, classes=classes)
    for i, c in enumerate(classes):
        assert cm.counts[i].sum() == truth.count(c)
    assert cm.total == 1000


def test_confusion_unknown_label_named():
    with pytest.raises(ConfigurationError, match="zip_code"):
        confusion(["word", "zip_code"], ["word", "word"], classes=("word",))
    with pytest.raises(ConfigurationError, match="date"):
        confusion(["word"], ["date"], classes=("word",))


def test_confusion_length_mismatch():
    with pytest.raises(ConfigurationError):
        confusion(["word"], ["word", "word"], classes=("word",))


def test_confusion_matrix_validation():
    with pytest.raises(ConfigurationError):
        ConfusionMatrix(classes=("a", "b"), counts=np.zeros((3, 3), dtype=int))
    with pytest.raises(ConfigurationError):
        ConfusionMatrix(classes=("a",), counts=np.array([[-1]]))


# ------------------------------------------------------------------ metrics


def test_metrics_perfect():
    cm = confusion(["A", "B", "A"], ["A", "B", "A"], classes=("A", "B"))
    rep = metrics(cm)
    assert rep.accuracy == rep.precision == rep.recall == rep.f1 == 1.0
    for stats in rep.per_class.values():
        assert stats["precision"] == stats["recall"] == stats["f1"] == 1.0


def test_metrics_hand_computed():
    cm = ConfusionMatrix(classes=("A", "B"), counts=np.array([[1, 1], [0, 1]]))
    rep = metrics(cm, averaging="weighted")
    assert rep.accuracy == pytest.approx(2 / 3)
    assert rep.per_class["A"]["recall"] == pytest.approx(0.5)
    assert rep.per_class["B"]["recall"] == pytest.approx(1.0)
    assert rep.per_class["A"]["precision"] == pytest.approx(1.0)
    assert rep.per_class["B"]["precision"] == pytest.approx(0.5)
    assert rep.recall == pytest.approx(rep.accuracy)
    assert rep.per_class["A"]["support"] == 2


def test_metrics_zero_prediction_class():
    # B never predicted: empty column, precision 0, no division error
    cm = ConfusionMatrix(classes=("A", "B"), counts=np.array([[2, 0], [1, 0]]))
    rep = metrics(cm)
    assert rep.per_class["B"]["precision"] == 0.0 or rep.per_class["B"]["recall"] == 0.0
    assert rep.per_class["B"]["f1"] == 0.0
    assert np.isfinite(rep.f1)


def test_metrics_macro_vs_weighted():
    cm = ConfusionMatrix(classes=("A", "B"), counts=np.array([[8, 0], [1, 1]]))
    w = metrics(cm, averaging="weighted")
    m = metrics(cm, averaging="macro")
    # recalls are (1.0, 0.5); weights (0.8, 0.2) vs (0.5, 0.5)
    assert w.recall == pytest.approx(0.9)
    assert m.recall == pytest.approx(0.75)


def test_metrics_identity_on_self_predictions():
    rng = np.random.default_rng(3)
    classes = ("word", "number", "date")
    for _ in range(20):
        y = [classes[i] for i in rng.integers(0, 3, size=int(rng.integers(3, 40)))]
        rep = metrics(confusion(y, y, classes=classes))
        assert rep.accuracy == rep.precision == rep.recall == rep.f1 == 1.0


def test_weighted_recall_equals_accuracy():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        counts = rng.integers(0, 30, size=(n, n))
        if counts.sum() == 0:
            counts[0, 0] = 1
        cm = ConfusionMatrix(classes=tuple(f"c{i}" for i in range(n)), counts=counts)
        rep = metrics(cm, averaging="weighted")
        assert abs(rep.recall - rep.accuracy) < 1e-12


def test_metrics_bad_averaging():
    cm = ConfusionMatrix(classes=("A",), counts=np.array([[1]]))
    with pytest.raises(ConfigurationError):
        metrics(cm, averaging="median")


# ------------------------------------------------------------------ pca


def test_pca_rank1_line():
    rng = np.random.default_rng(7)
    t = rng.normal(size=100)
    direction = rng.normal(size=32)
    x = np.outer(t, direction)
    proj, ratios = pca_project(x)
    assert ratios[0] == pytest.approx(1.0, abs=1e-12)
    assert ratios[1] == pytest.approx(0.0, abs=1e-9)


def test_pca_isotropic_gaussian_ratios():
    x = np.random.default_rng(11).normal(size=(10000, 3))
    _, ratios = pca_project(x)
    np.testing.assert_allclose(ratios, [1 / 3, 1 / 3], atol=0.02)


def test_pca_preserves_2d_subspace_distances():
    rng = np.random.default_rng(13)
    plane = rng.normal(size=(60, 2))
    basis, _ = np.linalg.qr(rng.normal(size=(16, 2)))
    x = plane @ basis.T
    proj, ratios = pca_project(x)
    d_orig = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
    d_proj = np.sqrt(((proj[:, None] - proj[None]) ** 2).sum(-1))
    np.testing.assert_allclose(d_proj, d_orig, atol=1e-9)
    assert ratios.sum() == pytest.approx(1.0, abs=1e-9)


def test_pca_rank0_all_zero():
    x = np.ones((5, 4)) * 2.5
    proj, ratios = pca_project(x)
    np.testing.assert_array_equal(proj, 0.0)
    np.testing.assert_array_equal(ratios, 0.0)


def test_pca_sign_rule():
    # data along the first coordinate axis: fixed sign means the projection
    # equals the centered coordinate itself, not its negation
    t = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
    x = np.zeros((5, 6))
    x[:, 0] = t
    proj, _ = pca_project(x)
    np.testing.assert_allclose(proj[:, 0], t, atol=1e-12)


def test_pca_properties_random():
    rng = np.random.default_rng(17)
    for _ in range(10):
        x = rng.normal(size=(int(rng.integers(2, 40)), int(rng.integers(2, 10))))
        _, ratios = pca_project(x)
        assert (ratios >= 0).all()
        assert ratios[0] >= ratios[1]
        assert ratios.sum() <= 1 + 1e-9


def test_pca_needs_two_points():
    with pytest.raises(ConfigurationError):
        pca_project(np.zeros((1, 4)))


# ------------------------------------------------------------------ silhouette


def test_silhouette_separated_blobs():
    rng = np.random.default_rng(19)
    a = rng.normal(size=(20, 3)) * 0.05
    b = rng.normal(size=(20, 3)) * 0.05 + 10.0
    scores = silhouette_by_class(np.concatenate([a, b]), ["a"] * 20 + ["b"] * 20)
    assert scores["a"] > 0.95 and scores["b"] > 0.95


def test_silhouette_singleton_class_scores_zero():
    x = np.array([[0.0], [0.1], [5.0]])
    scores = silhouette_by_class(x, ["a", "a", "b"])
    assert scores["b"] == 0.0


def test_silhouette_needs_two_classes():
    with pytest.raises(ConfigurationError):
        silhouette_by_class(np.zeros((3, 2)), ["a", "a", "a"])


# ------------------------------------------------------------------ reports


def demo_inputs():
    y = ["word", "word", "number", "date", "date", "date"]
    p = ["word", "number", "number", "date", "date", "word"]
    cm = confusion(y, p, classes=("word", "number", "date"))
    rep = metrics(cm)
    pts = np.random.default_rng(23).normal(size=(6, 2))
    return rep, cm, pts, y


def hash_tree(root):
    out = {}
    for f in sorted(root.rglob("*")):
        if f.is_file():
            out[str(f.relative_to(root))] = hashlib.sha256(f.read_bytes()).hexdigest()
    return out


def test_emit_report_files(tmp_path):
    rep, cm, pts, y = demo_inputs()
    paths = emit_report(rep, cm, pts, y, tmp_path, ratios=np.array([0.7, 0.2]))
    data = json.loads((tmp_path / "metrics.json").read_text())
    assert set(data) == {"accuracy", "precision", "recall", "f1", "averaging", "per_class"}
    csv_lines = (tmp_path / "confusion.csv").read_text().strip().split("\n")
    assert csv_lines[0].endswith("word,number,date")
    assert len(csv_lines) == 4
    pca_lines = (tmp_path / "pca.csv").read_text().strip().split("\n")
    assert pca_lines[0] == "x,y,label"
    assert len(pca_lines) == 7
    for key in ("heatmap", "scatter"):
        body = (tmp_path / "plots" / (paths[key].split("/")[-1])).read_text()
        assert body.startswith("<svg") and body.rstrip().endswith("</svg>")


def test_emit_report_byte_identical(tmp_path):
    rep, cm, pts, y = demo_inputs()
    emit_report(rep, cm, pts, y, tmp_path / "run1", ratios=np.array([0.7, 0.2]))
    emit_report(rep, cm, pts, y, tmp_path / "run2", ratios=np.array([0.7, 0.2]))
    assert hash_tree(tmp_path / "run1") == hash_tree(tmp_path / "run2")


def test_emit_report_empty_pca_writes_nothing(tmp_path):
    rep, cm, _, _ = demo_inputs()
    out = tmp_path / "run"
    with pytest.raises(ConfigurationError):
        emit_report(rep, cm, np.zeros((0, 2)), [], out)
    assert not out.exists()
