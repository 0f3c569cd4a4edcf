"""Command-line entry point.

One executable, seven subcommands, wired into reproducible experiment
recipes::

    hwclassify synth    --config configs/exp_3class.json --out runs/corpus3
    hwclassify train    --config configs/exp_3class.json --manifest runs/corpus3/train.jsonl \\
                        --val-manifest runs/corpus3/val.jsonl --out runs/model3
    hwclassify embed    --checkpoint runs/model3/model.ckpt --manifest runs/corpus3/val.jsonl \\
                        --out runs/model3/support.jsonl
    hwclassify classify --checkpoint runs/model3/model.ckpt --manifest runs/corpus3/test.jsonl \\
                        --method llr --support runs/model3/support.jsonl --out runs/eval3
    hwclassify eval     --checkpoint runs/model3/model.ckpt --manifest runs/corpus3/test.jsonl \\
                        --method softmax --out runs/eval3
    hwclassify unseen   --checkpoint runs/model2/model.ckpt --support-manifest runs/corpus3/val.jsonl \\
                        --query-manifest runs/corpus3/test.jsonl --new-class date --out runs/unseen
    hwclassify plot     --checkpoint runs/model3/model.ckpt --manifest runs/corpus3/test.jsonl \\
                        --out runs/plots

Config files are JSON. A file may be flat (keys for one command) or
sectioned by command name ({"synth": {...}, "train": {...}}); explicit
flags always win over config values. Every command echoes its resolved
configuration to <out>/config.json and confines volatile data (timestamps,
argv) to <out>/run_meta.json, so rerunning a recipe with the same seed
reproduces every other output byte for byte.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
The HWCLASSIFY_DATA environment variable sets the default parent directory
for outputs (default "runs").
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    SupportSet,
    fit_distance_model,
    llr_classify,
    load_support,
    naive_classify,
    save_support,
    softmax_classify,
    subset_support,
    unseen_class_protocol,
)
from .dataset import (
    CLASS_ORDER,
    CorpusGenerators,
    PreprocessConfig,
    build_corpus,
    load_manifest,
    save_manifest,
    split_manifest,
)
from .errors import ConfigurationError, HwclassifyError
from .evaluate import confusion, emit_report, metrics, pca_project, silhouette_by_class
from .model import Checkpoint, HyperParams, ModelConfig, load_checkpoint, save_checkpoint, train
from .pipeline import build_support, embed_manifest, load_arrays, manifest_norm_stats
from .printgen import default_font
from .strokegen import RenderSpec, TextGenConfig, builtin_bank, load_wordlist


# --------------------------------------------------------------------------
# config plumbing


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    return cfg


def _section(cfg: dict, name: str) -> dict:
    """Pull the per-command section, or treat the whole file as one."""
    sub = cfg.get(name)
    if isinstance(sub, dict):
        merged = dict(sub)
        if "seed" in cfg and "seed" not in merged:
            merged["seed"] = cfg["seed"]
        return merged
    return cfg


def _pick(flag_value, cfg: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def _out_dir(args, command: str) -> Path:
    base = os.environ.get("HWCLASSIFY_DATA", "runs")
    out = Path(args.out) if args.out else Path(base) / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(out: Path, command: str, resolved: dict) -> None:
    (out / "config.json").write_text(
        json.dumps({"command": command, **resolved}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    meta = {
        "command": command,
        "argv": sys.argv[1:],
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def _pre_from_checkpoint(ckpt: Checkpoint) -> PreprocessConfig:
    stored = ckpt.metadata.get("preprocess")
    if not isinstance(stored, dict):
        raise ConfigurationError(
            "checkpoint carries no preprocess settings; produce it with `hwclassify train`"
        )
    return PreprocessConfig(**stored)


def _classes_from_checkpoint(ckpt: Checkpoint) -> tuple:
    stored = ckpt.metadata.get("classes")
    if not stored:
        raise ConfigurationError(
            "checkpoint carries no class list; produce it with `hwclassify train`"
        )
    return tuple(stored)


# --------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    cfg = _section(_load_config(args.config), "synth")
    classes = _pick(args.classes, cfg, "classes", list(CLASS_ORDER))
    if isinstance(classes, str):
        classes = [c.strip() for c in classes.split(",") if c.strip()]
    per_class = int(_pick(args.per_class, cfg, "per_class", 100))
    seed = int(_pick(args.seed, cfg, "seed", 0))
    printed_fraction = float(_pick(args.printed_fraction, cfg, "printed_fraction", 0.0))
    target_height = int(cfg.get("target_height", 64))
    jitter_sigma = float(cfg.get("jitter_sigma", 0.01))
    inter_glyph_gap = float(cfg.get("inter_glyph_gap", 0.25))
    stroke_width_range = tuple(cfg.get("stroke_width_range", (1.0, 3.0)))
    ink_range = tuple(cfg.get("ink_range", (0.0, 0.5)))
    split = cfg.get("split", {"train": 0.8, "val": 0.1, "test": 0.1})
    fractions = (float(split["train"]), float(split["val"]), float(split["test"]))
    out = _out_dir(args, "synth")

    spec = RenderSpec(
        target_height=target_height,
        jitter_sigma=jitter_sigma,
        inter_glyph_gap=inter_glyph_gap,
    )
    gens = CorpusGenerators(
        bank=builtin_bank(),
        text_cfg=TextGenConfig(wordlist=load_wordlist()),
        render_spec=spec,
        font=default_font() if printed_fraction > 0 else None,
        printed_fraction=printed_fraction,
        stroke_width_range=stroke_width_range,
        ink_range=ink_range,
    )
    manifest = build_corpus({c: per_class for c in classes}, gens, seed, out)
    parts = split_manifest(manifest, fractions, seed)
    for name, part in zip(("train", "val", "test"), parts):
        save_manifest(part, out / f"{name}.jsonl")
    _echo(out, "synth", {
        "classes": list(classes),
        "per_class": per_class,
        "seed": seed,
        "printed_fraction": printed_fraction,
        "target_height": target_height,
        "jitter_sigma": jitter_sigma,
        "inter_glyph_gap": inter_glyph_gap,
        "stroke_width_range": list(stroke_width_range),
        "ink_range": list(ink_range),
        "split": {"train": fractions[0], "val": fractions[1], "test": fractions[2]},
    })
    print(f"synthesized {len(manifest)} samples into {out}")
    for name, part in zip(("train", "val", "test"), parts):
        print(f"  {name}: {len(part)} samples, classes {part.classes()}")
    return 0


# --------------------------------------------------------------------------
# train


def cmd_train(args) -> int:
    cfg_all = _load_config(args.config)
    cfg = _section(cfg_all, "train")
    pre_cfg = cfg_all.get("preprocess", cfg.get("preprocess", {}))
    model_cfg_in = cfg_all.get("model", cfg.get("model", {}))
    if args.manifest is None:
        raise ConfigurationError("train needs --manifest pointing at a train split")
    seed = int(_pick(args.seed, cfg, "seed", 0))
    out = _out_dir(args, "train")

    height = int(pre_cfg.get("height", 64))
    width = int(pre_cfg.get("width", 216))
    binarize = bool(pre_cfg.get("binarize", False))
    normalize = bool(pre_cfg.get("normalize", True))
    pre = PreprocessConfig(out_height=height, out_width=width, binarize=binarize)
    if normalize:
        mean, std = manifest_norm_stats(args.manifest, pre)
        pre = replace(pre, mean=mean, std=std)
    x_train, y_train, classes = load_arrays(args.manifest, pre)

    loss = str(_pick(args.loss, cfg, "loss", "softmax"))
    hyper = HyperParams(
        lr=float(cfg.get("lr", 1e-4)),
        batch_size=int(cfg.get("batch_size", 128)),
        epochs=int(_pick(args.epochs, cfg, "epochs", 20)),
        loss=loss,
        margin=float(cfg.get("margin", 0.2)),
        mining=str(cfg.get("mining", "random")),
        seed=seed,
    )
    stages = tuple(tuple(s) for s in model_cfg_in.get("stages", ModelConfig().stages))
    model_cfg = ModelConfig(
        stages=stages,
        embedding_dim=int(model_cfg_in.get("embedding_dim", 512)),
        num_classes=len(classes) if loss == "softmax" else None,
        input_shape=(1, height, width),
        dtype=str(model_cfg_in.get("dtype", "float64")),
    )
    x_val = y_val = None
    if args.val_manifest:
        x_val, y_val, _ = load_arrays(args.val_manifest, pre, classes=classes)

    print(f"training on {len(x_train)} samples, classes {classes}, loss {loss}")
    ckpt, records = train(model_cfg, hyper, x_train, y_train, x_val, y_val)
    ckpt = Checkpoint(
        config=ckpt.config,
        params=ckpt.params,
        opt_state=ckpt.opt_state,
        metadata={**ckpt.metadata, "classes": list(classes), "preprocess": asdict(pre)},
    )
    save_checkpoint(out / "model.ckpt", ckpt)

    lines = ["epoch,train_loss,val_metric,metric_name"]
    for rec in records:
        lines.append(
            f"{rec['epoch']},{rec['train_loss']!r},"
            f"{rec.get('val_metric', '')!r},{rec.get('metric_name', '')}"
        )
    (out / "train_log.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _echo(out, "train", {
        "manifest": str(args.manifest),
        "val_manifest": str(args.val_manifest) if args.val_manifest else None,
        "seed": seed,
        "preprocess": asdict(pre),
        "model": model_cfg.to_dict(),
        "hyper": asdict(hyper),
    })
    last = records[-1] if records else {}
    print(f"saved {out / 'model.ckpt'} after {len(records)} epochs"
          + (f", final train loss {last.get('train_loss'):.4f}" if records else ""))
    if ckpt.metadata.get("aborted"):
        print("warning: training aborted on a non-finite loss; checkpoint holds the last finished epoch")
    return 0


# --------------------------------------------------------------------------
# embed


def cmd_embed(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    pre = _pre_from_checkpoint(ckpt)
    emb, labels = embed_manifest(ckpt, args.manifest, pre)
    out_path = Path(args.out) if args.out else Path(os.environ.get("HWCLASSIFY_DATA", "runs")) / "embeddings.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_support(out_path, SupportSet(embeddings=emb, labels=labels, source=str(args.manifest)))
    print(f"wrote {len(labels)} embeddings ({emb.shape[1]}-d) to {out_path}")
    return 0


# --------------------------------------------------------------------------
# classify / eval


def _predict(ckpt, x, method: str, classes, support, args):
    """Run one decision strategy; returns (predictions, per_sample_extra)."""
    if method == "softmax":
        preds, probs = softmax_classify(ckpt, x, classes=classes)
        return preds, [{"probabilities": p.tolist()} for p in probs]
    from .classify import embed_queries

    emb = embed_queries(ckpt, x)
    if method == "naive":
        preds = naive_classify(
            emb, support, num_classes=len(support.classes), knn_k=args.knn_k, seed=args.seed
        )
        return preds, [{} for _ in preds]
    dm = fit_distance_model(support, family=args.family)
    scores = [llr_classify(e, support, dm, aggregation=args.aggregation) for e in emb]
    return [s.predicted for s in scores], [{"per_class_llr": dict(s.per_class)} for s in scores]


def _resolve_decision(args, section: str) -> None:
    """Fill classify/eval/unseen parameters from the config section; flags win."""
    cfg = _section(_load_config(args.config), section)
    if hasattr(args, "method"):
        args.method = _pick(args.method, cfg, "method", None)
        if args.method not in ("softmax", "naive", "llr"):
            raise ConfigurationError(
                f"method must be softmax, naive, or llr, got {args.method!r}"
            )
        args.support = _pick(args.support, cfg, "support", None)
    args.knn_k = int(_pick(args.knn_k, cfg, "knn_k", 5))
    args.family = str(_pick(args.family, cfg, "family", "gaussian"))
    args.aggregation = str(_pick(args.aggregation, cfg, "aggregation", "nearest5"))
    args.seed = int(_pick(args.seed, cfg, "seed", 0))
    if hasattr(args, "averaging"):
        args.averaging = str(_pick(args.averaging, cfg, "averaging", "weighted"))
    if hasattr(args, "new_class"):
        args.new_class = _pick(args.new_class, cfg, "new_class", None)
        if not args.new_class:
            raise ConfigurationError("unseen needs --new-class (or new_class in the config)")
        args.support_per_class = int(_pick(args.support_per_class, cfg, "support_per_class", 20))
        if args.new_support is None and "new_support" in cfg:
            args.new_support = int(cfg["new_support"])


def _load_method_inputs(args):
    ckpt = load_checkpoint(args.checkpoint)
    pre = _pre_from_checkpoint(ckpt)
    if args.method == "softmax":
        classes = _classes_from_checkpoint(ckpt)
        support = None
    else:
        if not args.support:
            raise ConfigurationError(f"method {args.method!r} needs --support <embeddings.jsonl>")
        support = load_support(args.support)
        classes = support.classes
    man = load_manifest(args.manifest)
    root = Path(args.manifest).parent
    from .dataset import preprocess, read_png

    x = np.stack([preprocess(read_png(root / s.image_path), pre) for s in man.samples])
    truth = [s.label for s in man.samples]
    names = [s.image_path for s in man.samples]
    return ckpt, x, truth, names, classes, support


def _write_predictions(out: Path, names, truth, preds, extras) -> None:
    with open(out / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for name, t, p, extra in zip(names, truth, preds, extras):
            rec = {"sample": name, "true_label": t, "predicted": p, **extra}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def cmd_classify(args) -> int:
    _resolve_decision(args, "classify")
    ckpt, x, truth, names, classes, support = _load_method_inputs(args)
    preds, extras = _predict(ckpt, x, args.method, classes, support, args)
    out = _out_dir(args, "classify")
    _write_predictions(out, names, truth, preds, extras)
    _echo(out, "classify", {
        "checkpoint": str(args.checkpoint),
        "manifest": str(args.manifest),
        "method": args.method,
        "support": str(args.support) if args.support else None,
        "knn_k": args.knn_k,
        "family": args.family,
        "aggregation": args.aggregation,
        "seed": args.seed,
    })
    correct = sum(p == t for p, t in zip(preds, truth))
    print(f"{args.method}: {correct}/{len(preds)} correct ({correct / len(preds):.2%}) -> {out / 'predictions.jsonl'}")
    return 0


def cmd_eval(args) -> int:
    from .classify import class_sort_key, embed_queries

    _resolve_decision(args, "eval")
    ckpt, x, truth, names, classes, support = _load_method_inputs(args)
    preds, extras = _predict(ckpt, x, args.method, classes, support, args)
    out = _out_dir(args, "eval")
    _write_predictions(out, names, truth, preds, extras)

    order = tuple(sorted(set(truth) | set(classes), key=class_sort_key))
    cm = confusion(truth, preds, classes=order)
    report = metrics(cm, averaging=args.averaging)
    emb = embed_queries(ckpt, x)
    proj, ratios = pca_project(emb)
    emit_report(report, cm, proj, truth, out, ratios=ratios)
    _echo(out, "eval", {
        "checkpoint": str(args.checkpoint),
        "manifest": str(args.manifest),
        "method": args.method,
        "support": str(args.support) if args.support else None,
        "knn_k": args.knn_k,
        "family": args.family,
        "aggregation": args.aggregation,
        "averaging": args.averaging,
        "seed": args.seed,
    })
    print(
        f"{args.method}: accuracy {report.accuracy:.4f}, precision {report.precision:.4f}, "
        f"recall {report.recall:.4f}, f1 {report.f1:.4f} -> {out / 'metrics.json'}"
    )
    return 0


# --------------------------------------------------------------------------
# unseen


def cmd_unseen(args) -> int:
    _resolve_decision(args, "unseen")
    ckpt = load_checkpoint(args.checkpoint)
    pre = _pre_from_checkpoint(ckpt)
    trained = _classes_from_checkpoint(ckpt)
    new_class = args.new_class
    if new_class in trained:
        raise ConfigurationError(f"{new_class!r} was part of training; pick a class outside {trained}")
    seed = args.seed
    out = _out_dir(args, "unseen")

    new_support = args.new_support if args.new_support is not None else args.support_per_class
    per_class = {c: args.support_per_class for c in trained}
    per_class[new_class] = new_support
    support = build_support(
        ckpt, args.support_manifest, pre, per_class, seed=seed, classes=(*trained, new_class)
    )

    man = load_manifest(args.query_manifest)
    root = Path(args.query_manifest).parent
    from .dataset import preprocess, read_png
    from .classify import embed_queries

    known_idx = [i for i, s in enumerate(man.samples) if s.label in trained]
    all_idx = [i for i, s in enumerate(man.samples) if s.label in (*trained, new_class)]
    if not all_idx:
        raise ConfigurationError(f"query manifest has no samples of {(*trained, new_class)}")

    def batch(idxs):
        x = np.stack([preprocess(read_png(root / man.samples[i].image_path), pre) for i in idxs])
        return x, [man.samples[i].label for i in idxs]

    rows = {}
    if known_idx:
        x2, y2 = batch(known_idx)
        sup2 = subset_support(support, trained)
        emb2 = embed_queries(ckpt, x2)
        naive2 = naive_classify(emb2, sup2, num_classes=len(trained), knn_k=args.knn_k, seed=seed)
        dm2 = fit_distance_model(sup2, family=args.family)
        llr2 = [llr_classify(e, sup2, dm2, aggregation=args.aggregation).predicted for e in emb2]
        rows["two_class"] = {
            "classes": list(trained),
            "samples": len(y2),
            "naive_accuracy": float(np.mean([p == t for p, t in zip(naive2, y2)])),
            "llr_accuracy": float(np.mean([p == t for p, t in zip(llr2, y2)])),
        }

    x3, y3 = batch(all_idx)
    result = unseen_class_protocol(
        ckpt, support, x3, new_class=new_class, true_labels=y3,
        knn_k=args.knn_k, family=args.family, aggregation=args.aggregation, seed=seed,
    )
    rows["three_class"] = {
        "classes": list(result.classes),
        "samples": len(y3),
        "naive_accuracy": result.naive_accuracy,
        "llr_accuracy": result.llr_accuracy,
    }
    report = {
        "trained_classes": list(trained),
        "new_class": new_class,
        "support_per_class": per_class,
        **rows,
    }
    (out / "unseen_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_predictions(
        out,
        [man.samples[i].image_path for i in all_idx],
        y3,
        list(result.llr_predictions),
        [{"naive_predicted": p} for p in result.naive_predictions],
    )
    _echo(out, "unseen", {
        "checkpoint": str(args.checkpoint),
        "support_manifest": str(args.support_manifest),
        "query_manifest": str(args.query_manifest),
        "new_class": new_class,
        "support_per_class": args.support_per_class,
        "new_support": new_support,
        "knn_k": args.knn_k,
        "family": args.family,
        "aggregation": args.aggregation,
        "seed": seed,
    })
    for phase, row in rows.items():
        print(
            f"{phase}: naive {row['naive_accuracy']:.4f}, llr {row['llr_accuracy']:.4f} "
            f"({row['samples']} queries)"
        )
    print(f"report -> {out / 'unseen_report.json'}")
    return 0


# --------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    from .evaluate import scatter_svg

    ckpt = load_checkpoint(args.checkpoint)
    pre = _pre_from_checkpoint(ckpt)
    emb, labels = embed_manifest(ckpt, args.manifest, pre)
    proj, ratios = pca_project(emb)
    out = _out_dir(args, "plot")
    rows = ["x,y,label"]
    for (x, y), label in zip(proj, labels):
        rows.append(f"{x!r},{y!r},{label}")
    (out / "pca.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    (plots / "pca_scatter.svg").write_text(scatter_svg(proj, labels, ratios=ratios), encoding="utf-8")
    # silhouette over the projected points: scores how separated the
    # classes look in this 2-D view, not in the full embedding space
    sil = silhouette_by_class(proj, labels) if len(set(labels)) >= 2 else {}
    summary = {
        "explained_variance": [float(r) for r in ratios],
        "silhouette_per_class": sil,
        "samples": len(labels),
    }
    (out / "projection.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _echo(out, "plot", {"checkpoint": str(args.checkpoint), "manifest": str(args.manifest)})
    print(f"projection written to {out} (variance {ratios[0]:.1%} / {ratios[1]:.1%})")
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hwclassify",
        description="Synthesize handwriting-style corpora, train small CNN classifiers, and evaluate them.",
    )
    parser.add_argument("--version", action="version", version=f"hwclassify {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--out", help="output directory (default $HWCLASSIFY_DATA/<command>)")

    p = sub.add_parser("synth", help="synthesize a labeled corpus with train/val/test splits")
    common(p)
    p.add_argument("--classes", help="comma-separated class names")
    p.add_argument("--per-class", type=int, default=None, dest="per_class")
    p.add_argument("--printed-fraction", type=float, default=None, dest="printed_fraction")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on a manifest split")
    common(p)
    p.add_argument("--manifest", help="training split manifest")
    p.add_argument("--val-manifest", dest="val_manifest", help="validation split manifest")
    p.add_argument("--loss", choices=("softmax", "triplet"), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="embed manifest samples into a labeled JSONL file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output JSONL path")
    p.set_defaults(func=cmd_embed)

    def decision_flags(p):
        # defaults stay None so a config file can fill them; flags win
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--manifest", required=True, help="query manifest")
        p.add_argument("--method", choices=("softmax", "naive", "llr"), default=None)
        p.add_argument("--support", help="support embeddings JSONL (naive/llr)")
        p.add_argument("--knn-k", type=int, default=None, dest="knn_k")
        p.add_argument("--family", choices=("gaussian", "histogram"), default=None)
        p.add_argument("--aggregation", choices=("nearest5", "min", "mean"), default=None)

    p = sub.add_parser("classify", help="predict labels for a manifest")
    common(p)
    decision_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="predict and score against the manifest's labels")
    common(p)
    decision_flags(p)
    p.add_argument("--averaging", choices=("weighted", "macro"), default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("unseen", help="two-class vs three-class comparison with an untrained class")
    common(p)
    p.add_argument("--checkpoint", required=True, help="embedding checkpoint trained on a class subset")
    p.add_argument("--support-manifest", required=True, dest="support_manifest")
    p.add_argument("--query-manifest", required=True, dest="query_manifest")
    p.add_argument("--new-class", default=None, dest="new_class")
    p.add_argument("--support-per-class", type=int, default=None, dest="support_per_class")
    p.add_argument("--new-support", type=int, default=None, dest="new_support",
                   help="support size for the new class (default: --support-per-class)")
    p.add_argument("--knn-k", type=int, default=None, dest="knn_k")
    p.add_argument("--family", choices=("gaussian", "histogram"), default=None)
    p.add_argument("--aggregation", choices=("nearest5", "min", "mean"), default=None)
    p.set_defaults(func=cmd_unseen)

    p = sub.add_parser("plot", help="PCA projection data and scatter plot for a manifest")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad values reaching constructors are user input problems
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HwclassifyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
