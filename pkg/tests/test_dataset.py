"""Tests for corpus building, manifests, splits, and preprocessing."""

import json
import os

import numpy as np
import pytest

from hwclassify.dataset import (
    CorpusGenerators,
    Manifest,
    PreprocessConfig,
    Sample,
    binarize,
    build_corpus,
    corpus_norm_stats,
    load_manifest,
    preprocess,
    read_png,
    resize_bilinear,
    save_manifest,
    save_png,
    split_manifest,
)
from hwclassify.errors import ConfigurationError, StratificationError
from hwclassify.printgen import default_font
from hwclassify.strokegen import RenderSpec, TextGenConfig, builtin_bank


def small_generators(printed_fraction=0.0):
    return CorpusGenerators(
        bank=builtin_bank(),
        text_cfg=TextGenConfig(),
        render_spec=RenderSpec(target_height=24),
        font=default_font(),
        printed_fraction=printed_fraction,
    )


def fake_manifest(per_class: dict[str, int]) -> Manifest:
    samples = []
    for label, n in per_class.items():
        for i in range(n):
            samples.append(Sample(f"images/{label}_{i}.png", label, "w0", "stroke_synth", "x1"))
    return Manifest(samples=tuple(samples))


# ------------------------------------------------------------------ types


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample("a.png", "poetry", "w0", "stroke_synth", "x")
    with pytest.raises(ValueError):
        Sample("a.png", "word", "w0", "scanned", "x")
    with pytest.raises(ValueError):
        Sample("a.png", "word", "w0", "printed", "x")
    Sample("a.png", "word", "printed", "printed", "x")  # fine


def test_manifest_split_validation():
    with pytest.raises(ValueError):
        Manifest(samples=(), split="holdout")


def test_manifest_roundtrip(tmp_path):
    m = fake_manifest({"word": 3, "date": 2})
    path = tmp_path / "manifest.jsonl"
    save_manifest(m, path)
    back = load_manifest(path)
    assert back.samples == m.samples


def test_manifest_field_names_exact(tmp_path):
    m = fake_manifest({"word": 1})
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    record = json.loads(path.read_text().strip())
    assert list(record) == ["image_path", "label", "writer_id", "source", "text"]


# ------------------------------------------------------------------ building


def test_build_corpus_minimal(tmp_path):
    m = build_corpus({"word": 1}, small_generators(), seed=0, out_dir=tmp_path)
    assert len(m) == 1
    assert m.class_counts() == {"word": 1}
    img = read_png(tmp_path / m.samples[0].image_path)
    assert img.dtype == np.uint8 and img.ndim == 2
    assert (img < 255).any()


def test_build_corpus_counts_and_paths(tmp_path):
    spec = {"word": 3, "number": 3, "date": 3}
    m = build_corpus(spec, small_generators(), seed=5, out_dir=tmp_path)
    assert m.class_counts() == spec
    counts = m.class_counts()
    assert max(counts.values()) - min(counts.values()) <= 1
    for s in m.samples:
        assert not os.path.isabs(s.image_path)
        assert os.path.exists(tmp_path / s.image_path)
        assert s.source == "stroke_synth"
        assert s.writer_id in builtin_bank().writers
    assert (tmp_path / "manifest.jsonl").exists()


def test_build_corpus_deterministic(tmp_path):
    spec = {"number": 2, "zip_code": 2}
    a = build_corpus(spec, small_generators(0.5), seed=9, out_dir=tmp_path / "a")
    b = build_corpus(spec, small_generators(0.5), seed=9, out_dir=tmp_path / "b")
    assert a.samples == b.samples
    for s in a.samples:
        pa = (tmp_path / "a" / s.image_path).read_bytes()
        pb = (tmp_path / "b" / s.image_path).read_bytes()
        assert pa == pb
    c = build_corpus(spec, small_generators(0.5), seed=10, out_dir=tmp_path / "c")
    assert any(sa.text != sc.text for sa, sc in zip(a.samples, c.samples))


def test_build_corpus_printed_fraction(tmp_path):
    m = build_corpus({"word": 4}, small_generators(0.5), seed=1, out_dir=tmp_path)
    printed = [s for s in m.samples if s.source == "printed"]
    assert len(printed) == 2
    assert all(s.writer_id == "printed" for s in printed)


def test_build_corpus_rejects_bad_spec(tmp_path):
    with pytest.raises(ConfigurationError):
        build_corpus({"word": 0}, small_generators(), seed=0, out_dir=tmp_path)
    with pytest.raises(ConfigurationError):
        build_corpus({"poem": 1}, small_generators(), seed=0, out_dir=tmp_path)


def test_generators_validation():
    with pytest.raises(ConfigurationError):
        CorpusGenerators(bank=builtin_bank(), text_cfg=TextGenConfig(), printed_fraction=0.5)
    with pytest.raises(ConfigurationError):
        CorpusGenerators(bank=builtin_bank(), text_cfg=TextGenConfig(), stroke_width_range=(0.2, 1.0))


# ------------------------------------------------------------------ splitting


def test_split_exact_arithmetic():
    m = fake_manifest({"word": 100, "date": 100})
    tr, va, te = split_manifest(m, (0.8, 0.1, 0.1), seed=0)
    assert tr.class_counts() == {"word": 80, "date": 80}
    assert va.class_counts() == {"word": 10, "date": 10}
    assert te.class_counts() == {"word": 10, "date": 10}
    assert (tr.split, va.split, te.split) == ("train", "val", "test")


def test_split_disjoint_union():
    m = fake_manifest({"word": 17, "number": 23, "date": 11})
    parts = split_manifest(m, (0.6, 0.2, 0.2), seed=3)
    paths = [s.image_path for p in parts for s in p.samples]
    assert len(paths) == len(set(paths)) == len(m)
    assert set(paths) == {s.image_path for s in m.samples}


def test_split_deterministic():
    m = fake_manifest({"word": 40, "date": 40})
    a = split_manifest(m, (0.8, 0.1, 0.1), seed=7)
    b = split_manifest(m, (0.8, 0.1, 0.1), seed=7)
    for pa, pb in zip(a, b):
        assert pa.samples == pb.samples
    c = split_manifest(m, (0.8, 0.1, 0.1), seed=8)
    assert any(pa.samples != pc.samples for pa, pc in zip(a, c))


def test_split_proportions_within_one():
    m = fake_manifest({"word": 103, "number": 57})
    tr, va, te = split_manifest(m, (0.8, 0.1, 0.1), seed=1)
    for label, n in (("word", 103), ("number", 57)):
        for part, f in ((tr, 0.8), (va, 0.1), (te, 0.1)):
            assert abs(part.class_counts()[label] - f * n) <= 1


def test_split_small_class_gets_all_splits():
    m = fake_manifest({"word": 3, "date": 100})
    tr, va, te = split_manifest(m, (0.8, 0.1, 0.1), seed=0)
    assert tr.class_counts()["word"] == 1
    assert va.class_counts()["word"] == 1
    assert te.class_counts()["word"] == 1


def test_split_validation_errors():
    m = fake_manifest({"word": 10})
    with pytest.raises(ConfigurationError):
        split_manifest(m, (0.5, 0.5, 0.5), seed=0)
    with pytest.raises(ConfigurationError):
        split_manifest(m, (0.8, 0.2, -0.0), seed=0)
    tiny = fake_manifest({"word": 2, "date": 10})
    with pytest.raises(StratificationError, match="word"):
        split_manifest(tiny, (0.8, 0.1, 0.1), seed=0)


# ------------------------------------------------------------------ binarize


def brute_force_otsu(img: np.ndarray) -> np.ndarray:
    best_t, best_v = 0, -1.0
    flat = img.astype(np.float64).ravel()
    for t in range(256):
        dark = flat[flat < t]
        light = flat[flat >= t]
        if dark.size == 0 or light.size == 0:
            v = 0.0
        else:
            w0 = dark.size / flat.size
            w1 = light.size / flat.size
            v = w0 * w1 * (dark.mean() - light.mean()) ** 2
        if v > best_v:
            best_v, best_t = v, t
    return np.where(img < best_t, 0, 255).astype(np.uint8)


def test_binarize_bimodal_exact():
    rng = np.random.default_rng(0)
    img = np.where(rng.random((20, 30)) < 0.5, 20, 230).astype(np.uint8)
    out = binarize(img)
    np.testing.assert_array_equal(out[img == 20], 0)
    np.testing.assert_array_equal(out[img == 230], 255)


def test_binarize_constant_all_white():
    img = np.full((8, 8), 128, dtype=np.uint8)
    np.testing.assert_array_equal(binarize(img), 255)


def test_binarize_binary_unchanged():
    rng = np.random.default_rng(1)
    img = np.where(rng.random((16, 16)) < 0.3, 0, 255).astype(np.uint8)
    np.testing.assert_array_equal(binarize(img), img)


def test_binarize_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(25):
        kind = rng.integers(3)
        if kind == 0:
            img = rng.integers(0, 256, size=(12, 18)).astype(np.uint8)
        elif kind == 1:
            img = (rng.normal(120, 40, (12, 18))).clip(0, 255).astype(np.uint8)
        else:
            modes = rng.integers(0, 256, size=2)
            img = np.where(rng.random((12, 18)) < 0.5, modes[0], modes[1]).astype(np.uint8)
        np.testing.assert_array_equal(binarize(img), brute_force_otsu(img))


def test_binarize_idempotent():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(20, 20)).astype(np.uint8)
    once = binarize(img)
    assert set(np.unique(once)) <= {0, 255}
    np.testing.assert_array_equal(binarize(once), once)


# ------------------------------------------------------------------ preprocess


def test_resize_identity():
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, size=(9, 13)).astype(np.uint8)
    np.testing.assert_allclose(resize_bilinear(img, 9, 13), img.astype(np.float64))


def test_resize_checkerboard_halving():
    # 2x downsample with half-pixel centers averages each 2x2 block
    img = np.zeros((128, 432), dtype=np.uint8)
    img[::2, ::2] = 255
    img[1::2, 1::2] = 255
    out = resize_bilinear(img, 64, 216)
    np.testing.assert_allclose(out, 127.5)


def test_preprocess_pads_right():
    img = np.zeros((64, 100), dtype=np.uint8)
    cfg = PreprocessConfig(out_height=64, out_width=216, mean=0.25, std=0.5)
    x = preprocess(img, cfg)
    assert x.shape == (1, 64, 216)
    expected_pad = (1.0 - 0.25) / 0.5
    np.testing.assert_allclose(x[0, :, 100:], expected_pad)
    np.testing.assert_allclose(x[0, :, :100], (0.0 - 0.25) / 0.5)


def test_preprocess_downsamples_without_padding():
    img = np.full((128, 432), 90, dtype=np.uint8)
    x = preprocess(img, PreprocessConfig(out_height=64, out_width=216))
    assert x.shape == (1, 64, 216)
    np.testing.assert_allclose(x, 90 / 255.0)


def test_preprocess_center_crops_wide_inputs():
    img = np.zeros((32, 640), dtype=np.uint8)
    img[:, :320] = 255  # left half white
    x = preprocess(img, PreprocessConfig(out_height=32, out_width=216))
    assert x.shape == (1, 32, 216)
    # scaled width stays 640; crop starts at (640-216)//2 = 212
    assert x[0, 0, 0] == pytest.approx(1.0)
    assert x[0, 0, -1] == pytest.approx(0.0)


def test_preprocess_constant_zero_identity_norm():
    img = np.zeros((10, 10), dtype=np.uint8)
    x = preprocess(img, PreprocessConfig(out_height=16, out_width=24, pad_value=0))
    np.testing.assert_allclose(x, 0.0)


def test_preprocess_shape_constant_across_aspects():
    cfg = PreprocessConfig(out_height=64, out_width=216)
    for shape in ((64, 100), (32, 500), (200, 64), (64, 216)):
        img = np.zeros(shape, dtype=np.uint8)
        assert preprocess(img, cfg).shape == (1, 64, 216)


def test_preprocess_binarize_flag():
    img = np.where(np.eye(32, 48, dtype=bool), 30, 220).astype(np.uint8)
    cfg = PreprocessConfig(out_height=32, out_width=48, binarize=True)
    x = preprocess(img, cfg)
    assert set(np.unique(x)) <= {0.0, 1.0}


def test_corpus_norm_stats():
    imgs = [np.full((16, 16), 128, dtype=np.uint8) for _ in range(3)]
    cfg = PreprocessConfig(out_height=16, out_width=16)
    mean, std = corpus_norm_stats(imgs, cfg)
    assert mean == pytest.approx(128 / 255.0)
    assert std == pytest.approx(1e-12)  # degenerate floor


def test_png_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(20, 31)).astype(np.uint8)
    path = tmp_path / "x.png"
    save_png(path, img)
    np.testing.assert_array_equal(read_png(path), img)
