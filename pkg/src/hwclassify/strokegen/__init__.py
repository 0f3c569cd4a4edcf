"""Handwriting synthesis from online stroke data.

Pipeline: parse or build a per-writer glyph bank, compose strings by
concatenating glyph variants along a pen-advance axis, rasterize the
stroke polylines to grayscale images, and generate class-conditioned
label strings.
"""

from .builtin import BASELINE, DESCENDER, XHEIGHT, builtin_bank
from .compose import ComposedString, PlacedGlyph, compose_string
from .render import RENDER_MARGIN, RenderSpec, render
from .stroke import (
    MIN_ADVANCE,
    REQUIRED_CHARS,
    Glyph,
    GlyphBank,
    Stroke,
    load_bank,
    make_glyph,
    normalize_glyph,
    parse_stroke_file,
    save_bank,
)
from .textgen import (
    CLASSES,
    DEFAULT_DATE_PATTERNS,
    TextGenConfig,
    classify_text,
    format_date,
    generate_text,
    load_wordlist,
)

__all__ = [
    "BASELINE",
    "CLASSES",
    "ComposedString",
    "DEFAULT_DATE_PATTERNS",
    "DESCENDER",
    "Glyph",
    "GlyphBank",
    "MIN_ADVANCE",
    "PlacedGlyph",
    "RENDER_MARGIN",
    "RenderSpec",
    "REQUIRED_CHARS",
    "Stroke",
    "TextGenConfig",
    "XHEIGHT",
    "builtin_bank",
    "classify_text",
    "compose_string",
    "format_date",
    "generate_text",
    "load_bank",
    "load_wordlist",
    "make_glyph",
    "normalize_glyph",
    "parse_stroke_file",
    "render",
    "save_bank",
]
