"""End-to-end subcommand contracts: artifacts, determinism, exit codes.

Everything here runs at toy scale (dozens of samples, 2-epoch trainings);
the statistical behavior of full-size runs lives in test_acceptance.py.
"""

import hashlib
import json
from pathlib import Path

import pytest

from hwclassify.cli import main


def run(argv) -> int:
    """Invoke the CLI in-process; argparse usage errors become exit codes."""
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def jsonl(path: Path) -> list:
    return [json.loads(line) for line in path.read_text().splitlines()]


SYNTH_CFG = {
    "synth": {
        "per_class": 12,
        "printed_fraction": 0.25,
        "split": {"train": 0.5, "val": 0.25, "test": 0.25},
    }
}

TRAIN_CFG = {
    "preprocess": {"height": 16, "width": 48, "normalize": True},
    "model": {"stages": [[4, 1, 2], [8, 1, 2]], "embedding_dim": 16, "dtype": "float32"},
    "train": {"lr": 1e-3, "batch_size": 18, "epochs": 2, "loss": "softmax", "seed": 5},
}


def write_cfg(path: Path, cfg: dict) -> Path:
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def corpus3(tmp_path_factory):
    """12 samples x 3 classes, split 18/9/9, quarter printed."""
    root = tmp_path_factory.mktemp("corpus3")
    cfg = write_cfg(root / "synth.json", SYNTH_CFG)
    code = run(["synth", "--config", cfg, "--classes", "word,number,date",
                "--seed", 7, "--out", root / "data"])
    assert code == 0
    return root / "data"


@pytest.fixture(scope="module")
def softmax_run(tmp_path_factory, corpus3):
    root = tmp_path_factory.mktemp("softmax_run")
    cfg = write_cfg(root / "train.json", TRAIN_CFG)
    code = run(["train", "--config", cfg, "--manifest", corpus3 / "train.jsonl",
                "--val-manifest", corpus3 / "val.jsonl", "--out", root / "run"])
    assert code == 0
    return root / "run"


@pytest.fixture(scope="module")
def triplet_run(tmp_path_factory, corpus3):
    root = tmp_path_factory.mktemp("triplet_run")
    cfg = dict(TRAIN_CFG)
    cfg["train"] = {**TRAIN_CFG["train"], "loss": "triplet", "margin": 0.5,
                    "mining": "warmup_hard", "epochs": 3}
    code = run(["train", "--config", write_cfg(root / "train.json", cfg),
                "--manifest", corpus3 / "train.jsonl", "--out", root / "run"])
    assert code == 0
    return root / "run"


@pytest.fixture(scope="module")
def support_jsonl(tmp_path_factory, softmax_run, corpus3):
    root = tmp_path_factory.mktemp("embed_out")
    out = root / "support.jsonl"
    code = run(["embed", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "val.jsonl", "--out", out])
    assert code == 0
    return out


# ------------------------------------------------------------------ synth


def test_synth_counts_and_layout(corpus3):
    assert len(jsonl(corpus3 / "manifest.jsonl")) == 36
    assert len(jsonl(corpus3 / "train.jsonl")) == 18
    assert len(jsonl(corpus3 / "val.jsonl")) == 9
    assert len(jsonl(corpus3 / "test.jsonl")) == 9
    assert len(list((corpus3 / "images").glob("*.png"))) == 36
    resolved = json.loads((corpus3 / "config.json").read_text())
    assert resolved["per_class"] == 12 and resolved["seed"] == 7
    assert (corpus3 / "run_meta.json").exists()


def test_synth_stratified_split(corpus3):
    for name, per_class in (("train", 6), ("val", 3), ("test", 3)):
        rows = jsonl(corpus3 / f"{name}.jsonl")
        counts = {}
        for r in rows:
            counts[r["label"]] = counts.get(r["label"], 0) + 1
        assert counts == {"word": per_class, "number": per_class, "date": per_class}


def test_synth_same_seed_same_bytes(tmp_path, corpus3):
    cfg = write_cfg(tmp_path / "synth.json", SYNTH_CFG)
    code = run(["synth", "--config", cfg, "--classes", "word,number,date",
                "--seed", 7, "--out", tmp_path / "again"])
    assert code == 0
    # image paths are manifest-relative, so bytes match across directories
    for rel in ("manifest.jsonl", "train.jsonl", "config.json"):
        assert sha(tmp_path / "again" / rel) == sha(corpus3 / rel)
    image = sorted((corpus3 / "images").glob("*.png"))[0]
    assert sha(tmp_path / "again" / "images" / image.name) == sha(image)


def test_synth_unknown_class_exits_2(tmp_path, capsys):
    code = run(["synth", "--classes", "word,poem", "--per-class", 2, "--out", tmp_path / "x"])
    assert code == 2
    assert "poem" in capsys.readouterr().err


def test_synth_env_var_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv("HWCLASSIFY_DATA", str(tmp_path / "store"))
    code = run(["synth", "--classes", "word", "--per-class", 4, "--seed", 1])
    assert code == 0
    assert (tmp_path / "store" / "synth" / "manifest.jsonl").exists()


# ------------------------------------------------------------------ train


def test_train_artifacts(softmax_run):
    assert (softmax_run / "model.ckpt").exists()
    log = (softmax_run / "train_log.csv").read_text().splitlines()
    assert log[0] == "epoch,train_loss,val_metric,metric_name"
    assert len(log) == 1 + 2  # header + one row per epoch
    resolved = json.loads((softmax_run / "config.json").read_text())
    assert resolved["hyper"]["loss"] == "softmax"
    assert resolved["model"]["input_shape"] == [1, 16, 48]


def test_train_same_seed_same_checkpoint(tmp_path, softmax_run, corpus3):
    cfg = write_cfg(tmp_path / "train.json", TRAIN_CFG)
    code = run(["train", "--config", cfg, "--manifest", corpus3 / "train.jsonl",
                "--val-manifest", corpus3 / "val.jsonl", "--out", tmp_path / "again"])
    assert code == 0
    assert sha(tmp_path / "again" / "model.ckpt") == sha(softmax_run / "model.ckpt")
    assert sha(tmp_path / "again" / "train_log.csv") == sha(softmax_run / "train_log.csv")


def test_train_triplet_single_class_corpus_errors_before_training(tmp_path, capsys):
    code = run(["synth", "--classes", "word", "--per-class", 8, "--seed", 3,
                "--out", tmp_path / "data"])
    assert code == 0
    cfg = dict(TRAIN_CFG)
    cfg["train"] = {**TRAIN_CFG["train"], "loss": "triplet"}
    code = run(["train", "--config", write_cfg(tmp_path / "t.json", cfg),
                "--manifest", tmp_path / "data" / "train.jsonl", "--out", tmp_path / "run"])
    assert code == 2
    assert "2 classes" in capsys.readouterr().err
    assert not (tmp_path / "run" / "model.ckpt").exists()


def test_train_without_manifest_exits_2(tmp_path):
    assert run(["train", "--out", tmp_path / "run"]) == 2


# ------------------------------------------------------------------ embed


def test_embed_writes_labeled_jsonl(support_jsonl):
    rows = jsonl(support_jsonl)
    assert len(rows) == 9
    assert set(rows[0]) == {"label", "embedding"}
    assert len(rows[0]["embedding"]) == 16
    assert {r["label"] for r in rows} == {"word", "number", "date"}


# ------------------------------------------------------------------ classify


def test_classify_softmax_predictions(tmp_path, softmax_run, corpus3):
    code = run(["classify", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--method", "softmax",
                "--out", tmp_path / "out"])
    assert code == 0
    rows = jsonl(tmp_path / "out" / "predictions.jsonl")
    assert len(rows) == 9
    assert set(rows[0]) == {"sample", "true_label", "predicted", "probabilities"}
    assert len(rows[0]["probabilities"]) == 3
    assert abs(sum(rows[0]["probabilities"]) - 1.0) < 1e-6


def test_classify_llr_reports_per_class_scores(tmp_path, softmax_run, corpus3, support_jsonl):
    code = run(["classify", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--method", "llr",
                "--support", support_jsonl, "--out", tmp_path / "out"])
    assert code == 0
    rows = jsonl(tmp_path / "out" / "predictions.jsonl")
    assert set(rows[0]["per_class_llr"]) == {"word", "number", "date"}
    for r in rows:
        best = max(r["per_class_llr"].values())
        assert r["per_class_llr"][r["predicted"]] == best


def test_classify_naive_without_support_exits_2(tmp_path, softmax_run, corpus3, capsys):
    code = run(["classify", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--method", "naive",
                "--out", tmp_path / "out"])
    assert code == 2
    assert "--support" in capsys.readouterr().err


# ------------------------------------------------------------------ eval


def test_eval_softmax_report_schema(tmp_path, softmax_run, corpus3):
    out = tmp_path / "out"
    code = run(["eval", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--method", "softmax", "--out", out])
    assert code == 0
    report = json.loads((out / "metrics.json").read_text())
    assert set(report) >= {"accuracy", "precision", "recall", "f1", "per_class"}
    for key in ("accuracy", "precision", "recall", "f1"):
        assert 0.0 <= report[key] <= 1.0
    header = (out / "confusion.csv").read_text().splitlines()[0]
    assert header == "actual/predicted,word,number,date"
    assert len(jsonl(out / "predictions.jsonl")) == 9
    assert len((out / "pca.csv").read_text().splitlines()) == 10
    assert (out / "plots" / "confusion_heatmap.svg").exists()
    assert (out / "plots" / "pca_scatter.svg").exists()


def test_eval_llr_and_naive_side_by_side(tmp_path, triplet_run, corpus3, support_jsonl):
    # one parent directory, one comparable report per method
    reports = {}
    for method in ("naive", "llr"):
        code = run(["eval", "--checkpoint", triplet_run / "model.ckpt",
                    "--manifest", corpus3 / "test.jsonl", "--method", method,
                    "--support", support_jsonl, "--seed", 1,
                    "--out", tmp_path / "cmp" / method])
        assert code == 0
        reports[method] = json.loads((tmp_path / "cmp" / method / "metrics.json").read_text())
    assert set(reports["naive"]) == set(reports["llr"])
    assert reports["naive"]["averaging"] == reports["llr"]["averaging"] == "weighted"


def test_eval_reads_config_section_flags_win(tmp_path, triplet_run, corpus3, support_jsonl):
    cfg = write_cfg(tmp_path / "eval.json", {
        "eval": {"method": "llr", "support": str(support_jsonl),
                 "family": "histogram", "knn_k": 3, "averaging": "macro"}
    })
    code = run(["eval", "--config", cfg, "--checkpoint", triplet_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--family", "gaussian",
                "--out", tmp_path / "out"])
    assert code == 0
    resolved = json.loads((tmp_path / "out" / "config.json").read_text())
    assert resolved["method"] == "llr"  # from config
    assert resolved["family"] == "gaussian"  # flag beats config
    assert resolved["averaging"] == "macro"
    report = json.loads((tmp_path / "out" / "metrics.json").read_text())
    assert report["averaging"] == "macro"


def test_eval_method_required_somewhere(tmp_path, softmax_run, corpus3, capsys):
    code = run(["eval", "--checkpoint", softmax_run / "model.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--out", tmp_path / "out"])
    assert code == 2
    assert "method" in capsys.readouterr().err


def test_eval_rerun_is_byte_identical_outside_run_meta(tmp_path, softmax_run, corpus3):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run(["eval", "--checkpoint", softmax_run / "model.ckpt",
                    "--manifest", corpus3 / "test.jsonl", "--method", "softmax",
                    "--out", out])
        assert code == 0
        outs.append(out)
    a, b = outs
    rels = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert rels == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    for rel in rels:
        if rel.name == "run_meta.json":
            continue  # timestamps live here and nowhere else
        assert sha(a / rel) == sha(b / rel), rel


# ------------------------------------------------------------------ unseen


@pytest.fixture(scope="module")
def two_class_run(tmp_path_factory):
    """Triplet model that never saw dates, plus a 3-class corpus to query."""
    root = tmp_path_factory.mktemp("two_class")
    cfg = write_cfg(root / "synth.json", SYNTH_CFG)
    assert run(["synth", "--config", cfg, "--classes", "word,number",
                "--seed", 11, "--out", root / "data2"]) == 0
    tcfg = dict(TRAIN_CFG)
    tcfg["train"] = {**TRAIN_CFG["train"], "loss": "triplet", "margin": 0.5, "epochs": 2}
    assert run(["train", "--config", write_cfg(root / "train.json", tcfg),
                "--manifest", root / "data2" / "train.jsonl", "--out", root / "run"]) == 0
    return root / "run"


def test_unseen_report_layout(tmp_path, two_class_run, corpus3):
    out = tmp_path / "out"
    code = run(["unseen", "--checkpoint", two_class_run / "model.ckpt",
                "--support-manifest", corpus3 / "val.jsonl",
                "--query-manifest", corpus3 / "test.jsonl",
                "--new-class", "date", "--support-per-class", 3, "--knn-k", 3,
                "--out", out])
    assert code == 0
    report = json.loads((out / "unseen_report.json").read_text())
    assert report["trained_classes"] == ["word", "number"]
    assert report["new_class"] == "date"
    for phase, n_classes, n_queries in (("two_class", 2, 6), ("three_class", 3, 9)):
        row = report[phase]
        assert len(row["classes"]) == n_classes
        assert row["samples"] == n_queries
        assert 0.0 <= row["naive_accuracy"] <= 1.0
        assert 0.0 <= row["llr_accuracy"] <= 1.0
    rows = jsonl(out / "predictions.jsonl")
    assert len(rows) == 9
    assert set(rows[0]) == {"sample", "true_label", "predicted", "naive_predicted"}


def test_unseen_new_class_must_be_untrained(tmp_path, two_class_run, corpus3, capsys):
    code = run(["unseen", "--checkpoint", two_class_run / "model.ckpt",
                "--support-manifest", corpus3 / "val.jsonl",
                "--query-manifest", corpus3 / "test.jsonl",
                "--new-class", "word", "--support-per-class", 3,
                "--out", tmp_path / "out"])
    assert code == 2
    assert "word" in capsys.readouterr().err


def test_unseen_single_support_sample_errors_clearly(tmp_path, two_class_run, corpus3, capsys):
    code = run(["unseen", "--checkpoint", two_class_run / "model.ckpt",
                "--support-manifest", corpus3 / "val.jsonl",
                "--query-manifest", corpus3 / "test.jsonl",
                "--new-class", "date", "--support-per-class", 3, "--new-support", 1,
                "--knn-k", 3, "--out", tmp_path / "out"])
    assert code == 2
    err = capsys.readouterr().err
    assert "date" in err and "support" in err
    assert not (tmp_path / "out" / "unseen_report.json").exists()


# ------------------------------------------------------------------ plot


def test_plot_artifacts(tmp_path, triplet_run, corpus3):
    out = tmp_path / "out"
    code = run(["plot", "--checkpoint", triplet_run / "model.ckpt",
                "--manifest", corpus3 / "val.jsonl", "--out", out])
    assert code == 0
    rows = (out / "pca.csv").read_text().splitlines()
    assert rows[0] == "x,y,label" and len(rows) == 10
    assert (out / "plots" / "pca_scatter.svg").read_text().startswith("<svg")
    summary = json.loads((out / "projection.json").read_text())
    assert len(summary["explained_variance"]) == 2
    assert set(summary["silhouette_per_class"]) == {"word", "number", "date"}
    assert summary["samples"] == 9


# ------------------------------------------------------------------ parser


def test_no_subcommand_exits_2():
    assert run([]) == 2


def test_version_exits_0(capsys):
    assert run(["--version"]) == 0
    assert "hwclassify" in capsys.readouterr().out


def test_bad_method_choice_exits_2(tmp_path):
    code = run(["classify", "--checkpoint", "x", "--manifest", "y", "--method", "votes"])
    assert code == 2


def test_missing_checkpoint_file_exits_1(tmp_path, corpus3):
    code = run(["classify", "--checkpoint", tmp_path / "nope.ckpt",
                "--manifest", corpus3 / "test.jsonl", "--method", "softmax",
                "--out", tmp_path / "out"])
    assert code == 1
