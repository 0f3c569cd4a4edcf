"""Stroke and glyph primitives plus glyph-bank ingestion.

Coordinate convention: x grows rightward, y grows downward (image
convention). A normalized glyph lives in a unit-height box, y in [0, 1],
with its leftmost point at x = 0. The built-in bank puts the baseline at
y = 0.8 so descenders and baseline dots keep their vertical position.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DegenerateGlyphError,
    RejectedRecordError,
    StrokeParseError,
    UnknownWriterError,
)

# Characters every writer must provide before a bank is usable.
REQUIRED_CHARS = tuple("0123456789") + (".", "-")

# Advance width assigned to glyphs with zero horizontal extent.
MIN_ADVANCE = 0.05


@dataclass(frozen=True)
class Stroke:
    """One pen-down trace: an ordered (n, 2) array of x/y points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
            raise ValueError(f"stroke points must be a non-empty (n, 2) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("stroke contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def translated(self, dx: float, dy: float) -> "Stroke":
        return Stroke(self.points + np.array([dx, dy]))


@dataclass(frozen=True)
class Glyph:
    """Normalized strokes for one character from one writer."""

    char: str
    strokes: tuple[Stroke, ...]
    advance_width: float
    writer_id: str

    def __post_init__(self):
        if len(self.char) != 1:
            raise ValueError(f"glyph char must be a single character, got {self.char!r}")
        if not self.strokes:
            raise ValueError("glyph has no strokes")
        if self.advance_width <= 0:
            raise ValueError(f"advance_width must be positive, got {self.advance_width}")
        height = self.bbox()[3] - self.bbox()[1]
        if not 0 <= height <= 1 + 1e-9:
            raise ValueError(f"normalized glyph height must lie in (0, 1], got {height}")

    def bbox(self) -> tuple[float, float, float, float]:
        pts = np.concatenate([s.points for s in self.strokes])
        return (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())


class GlyphBank:
    """Immutable per-writer store of glyph variants keyed by character."""

    def __init__(self, glyphs: dict[str, dict[str, list[Glyph]]]):
        for writer, chars in glyphs.items():
            missing = [c for c in REQUIRED_CHARS if c not in chars]
            if missing:
                raise ValueError(f"writer {writer!r} is missing required characters: {missing}")
            for char, variants in chars.items():
                for g in variants:
                    if g.writer_id != writer:
                        raise ValueError(
                            f"glyph for {char!r} tagged writer {g.writer_id!r} stored under {writer!r}"
                        )
        self._glyphs = glyphs

    @property
    def writers(self) -> list[str]:
        return sorted(self._glyphs)

    def chars(self, writer_id: str) -> set[str]:
        return set(self._bank_for(writer_id))

    def variants(self, writer_id: str, char: str) -> list[Glyph]:
        return list(self._bank_for(writer_id).get(char, []))

    def mean_advance(self, writer_id: str) -> float:
        widths = [g.advance_width for variants in self._bank_for(writer_id).values() for g in variants]
        return float(np.mean(widths))

    def _bank_for(self, writer_id: str) -> dict[str, list[Glyph]]:
        if writer_id not in self._glyphs:
            raise UnknownWriterError(f"unknown writer {writer_id!r}; bank has {self.writers}")
        return self._glyphs[writer_id]

    def __iter__(self):
        for writer in sorted(self._glyphs):
            for char in sorted(self._glyphs[writer]):
                for glyph in self._glyphs[writer][char]:
                    yield glyph


def normalize_glyph(strokes: list[Stroke]) -> tuple[tuple[Stroke, ...], float]:
    """Translate the bbox min corner to the origin and scale height to 1.0.

    Aspect ratio is preserved. Zero-height glyphs with positive width
    (a dash) are scaled by width instead, leaving height sub-unit.
    Returns the normalized strokes and the advance width (scaled width,
    floored at MIN_ADVANCE for zero-width glyphs).
    """
    if not strokes:
        raise ValueError("at least one stroke required")
    strokes = [s if isinstance(s, Stroke) else Stroke(s) for s in strokes]
    pts = np.concatenate([s.points for s in strokes])
    xmin, ymin = pts[:, 0].min(), pts[:, 1].min()
    width = pts[:, 0].max() - xmin
    height = pts[:, 1].max() - ymin
    if height == 0 and width == 0:
        raise DegenerateGlyphError("glyph has zero width and zero height")
    scale = 1.0 / height if height > 0 else 1.0 / width
    normalized = tuple(Stroke((s.points - np.array([xmin, ymin])) * scale) for s in strokes)
    advance = max(width * scale, MIN_ADVANCE)
    return normalized, advance


def make_glyph(char: str, strokes: list[Stroke], writer_id: str) -> Glyph:
    """Build a Glyph from raw strokes via normalize_glyph."""
    normalized, advance = normalize_glyph(strokes)
    return Glyph(char=char, strokes=normalized, advance_width=advance, writer_id=writer_id)


def parse_stroke_file(raw: bytes, format: str) -> list[tuple[str, list[Stroke]]]:
    """Parse labeled stroke records from a byte stream.

    Supported formats:
      * ``jsonl_points``: one JSON object per line,
        ``{"label": "7", "strokes": [[[x, y], ...], ...]}``
      * ``xml_online``: ``<StrokeFile><Character label="7"><Stroke>
        <Point x="1.0" y="2.0"/>...</Stroke>...</Character>...</StrokeFile>``

    Coordinates are passed through unmodified.
    """
    if format == "jsonl_points":
        return _parse_jsonl_points(raw)
    if format == "xml_online":
        return _parse_xml_online(raw)
    raise ValueError(f"unknown stroke format {format!r}")


def _parse_jsonl_points(raw: bytes) -> list[tuple[str, list[Stroke]]]:
    records = []
    offset = 0
    for line in raw.split(b"\n"):
        stripped = line.strip()
        if stripped:
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise StrokeParseError(f"invalid JSON: {exc.msg}", offset + exc.pos) from exc
            records.append(_record_from(obj.get("label"), obj.get("strokes"), offset))
        offset += len(line) + 1
    return records


def _parse_xml_online(raw: bytes) -> list[tuple[str, list[Stroke]]]:
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        line, col = exc.position
        lines = raw.split(b"\n")
        offset = sum(len(ln) + 1 for ln in lines[: line - 1]) + col
        raise StrokeParseError(f"invalid XML: {exc.msg.split(':')[0]}", offset) from exc
    records = []
    for elem in root.iter("Character"):
        label = elem.get("label")
        strokes = [
            [[float(p.get("x")), float(p.get("y"))] for p in stroke_elem.iter("Point")]
            for stroke_elem in elem.iter("Stroke")
        ]
        records.append(_record_from(label, strokes, 0))
    return records


def _record_from(label, raw_strokes, offset: int) -> tuple[str, list[Stroke]]:
    if not isinstance(label, str) or len(label) != 1:
        raise RejectedRecordError(f"record label must be a single character, got {label!r}")
    if not raw_strokes:
        raise RejectedRecordError(f"record {label!r} has no strokes")
    return label, [Stroke(np.asarray(pts, dtype=np.float64)) for pts in raw_strokes]


def save_bank(bank: GlyphBank, path) -> None:
    """Write a bank as JSONL: one glyph per line, normalized coordinates."""
    with open(path, "w", encoding="utf-8") as fh:
        for glyph in bank:
            record = {
                "writer": glyph.writer_id,
                "char": glyph.char,
                "strokes": [s.points.tolist() for s in glyph.strokes],
            }
            fh.write(json.dumps(record) + "\n")


def load_bank(path) -> GlyphBank:
    """Load a JSONL glyph bank written in normalized glyph space.

    Glyphs are validated (finite coordinates, height <= 1) but not
    re-normalized, so sub-unit glyphs such as dots keep their authored
    vertical position.
    """
    glyphs: dict[str, dict[str, list[Glyph]]] = {}
    with open(path, "rb") as fh:
        raw = fh.read()
    offset = 0
    for line in raw.split(b"\n"):
        stripped = line.strip()
        if stripped:
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise StrokeParseError(f"invalid JSON: {exc.msg}", offset + exc.pos) from exc
            writer = obj.get("writer")
            char = obj.get("char")
            if not isinstance(writer, str) or not writer:
                raise RejectedRecordError(f"glyph record needs a writer id, got {writer!r}")
            if not isinstance(char, str) or len(char) != 1:
                raise RejectedRecordError(f"glyph char must be a single character, got {char!r}")
            strokes = tuple(Stroke(np.asarray(pts, dtype=np.float64)) for pts in obj["strokes"])
            pts = np.concatenate([s.points for s in strokes])
            width = float(pts[:, 0].max() - pts[:, 0].min())
            glyph = Glyph(char=char, strokes=strokes, advance_width=max(width, MIN_ADVANCE), writer_id=writer)
            glyphs.setdefault(writer, {}).setdefault(char, []).append(glyph)
        offset += len(line) + 1
    return GlyphBank(glyphs)
