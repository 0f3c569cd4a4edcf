"""String composition: glyph selection and left-to-right layout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedCharacterError
from .stroke import GlyphBank, Stroke


@dataclass(frozen=True)
class PlacedGlyph:
    """One glyph instance after layout, with provenance kept for auditing."""

    char: str
    writer_id: str
    x_offset: float
    strokes: tuple[Stroke, ...]


@dataclass(frozen=True)
class ComposedString:
    text: str
    writer_id: str
    glyphs: tuple[PlacedGlyph, ...]

    @property
    def strokes(self) -> list[Stroke]:
        return [s for g in self.glyphs for s in g.strokes]


def compose_string(
    bank: GlyphBank,
    writer_id: str,
    text: str,
    rng_seed: int,
    gap: float = 0.0,
) -> ComposedString:
    """Lay out ``text`` left to right using one writer's glyphs.

    Glyph variants are chosen uniformly at random (seeded). The pen
    advances by each glyph's advance width plus ``gap`` (absolute, in
    glyph-space units where 1.0 is the glyph box height).
    """
    if not text:
        raise ValueError("text must be non-empty")
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    available = bank.chars(writer_id)  # raises UnknownWriterError first
    missing = sorted(set(text) - available)
    if missing:
        raise UnsupportedCharacterError(missing[0], context=f"writer {writer_id!r}")
    rng = np.random.default_rng(rng_seed)
    placed = []
    pen_x = 0.0
    for char in text:
        variants = bank.variants(writer_id, char)
        glyph = variants[int(rng.integers(len(variants)))]
        strokes = tuple(s.translated(pen_x, 0.0) for s in glyph.strokes)
        placed.append(PlacedGlyph(char=char, writer_id=glyph.writer_id, x_offset=pen_x, strokes=strokes))
        pen_x += glyph.advance_width + gap
    return ComposedString(text=text, writer_id=writer_id, glyphs=tuple(placed))
