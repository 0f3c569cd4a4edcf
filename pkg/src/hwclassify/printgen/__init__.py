"""Printed-text rendering from an embedded bitmap font.

Glyph cells are blitted onto a binary grid with one cell-pixel of
spacing, the grid is scaled to the target height by nearest neighbor,
and a seeded ink level in [0, 0.3] sets how dark the type prints.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from ..errors import ConfigurationError, UnsupportedCharacterError
from .glyph_art import GLYPH_ART

# Blank border around the printed text, in output pixels.
PRINT_MARGIN = 4

# Characters every usable font must provide.
FONT_CHARS = tuple("0123456789") + (".", "-") + tuple(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
)

# Upper bound of the seeded ink draw; keeps printed strokes near-black.
MAX_PRINT_INK = 0.3


class BitmapFont:
    """Immutable fixed-cell-height bitmap font."""

    def __init__(self, name: str, cell_height: int, glyphs: dict[str, np.ndarray]):
        if cell_height < 1:
            raise ConfigurationError(f"cell_height must be positive, got {cell_height}")
        missing = [c for c in FONT_CHARS if c not in glyphs]
        if missing:
            raise ConfigurationError(f"font {name!r} is missing glyphs: {missing[:8]}")
        store = {}
        for char, bitmap in glyphs.items():
            arr = np.asarray(bitmap, dtype=np.uint8)
            if arr.ndim != 2 or arr.shape[0] != cell_height or arr.shape[1] == 0:
                raise ConfigurationError(
                    f"glyph {char!r} must be ({cell_height}, w>0), got shape {arr.shape}"
                )
            if not np.isin(arr, (0, 1)).all():
                raise ConfigurationError(f"glyph {char!r} bitmap must be 0/1")
            arr = arr.copy()
            arr.flags.writeable = False
            store[char] = arr
        self.name = name
        self.cell_height = cell_height
        self._glyphs = store

    def chars(self) -> set[str]:
        return set(self._glyphs)

    def glyph(self, char: str) -> np.ndarray:
        if char not in self._glyphs:
            raise UnsupportedCharacterError(char, context=f"font {self.name!r}")
        return self._glyphs[char]

    def cell_width(self, char: str) -> int:
        return int(self.glyph(char).shape[1])


def font_from_art(name: str, art: dict[str, tuple[str, ...]]) -> BitmapFont:
    """Build a font from ASCII art rows ('#' ink, '.' blank)."""
    glyphs = {}
    heights = {len(rows) for rows in art.values()}
    if len(heights) != 1:
        raise ConfigurationError(f"glyph art rows disagree on cell height: {sorted(heights)}")
    for char, rows in art.items():
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ConfigurationError(f"glyph {char!r} rows have uneven widths")
        glyphs[char] = np.array([[1 if c == "#" else 0 for c in row] for row in rows], dtype=np.uint8)
    return BitmapFont(name=name, cell_height=heights.pop(), glyphs=glyphs)


def default_font() -> BitmapFont:
    return font_from_art("dotmatrix-8", GLYPH_ART)


def save_font(font: BitmapFont, path) -> None:
    """Write a font as JSON with base64 row-major 0/1 bitmaps."""
    record = {
        "name": font.name,
        "cell_height": font.cell_height,
        "glyphs": {
            char: {
                "width": font.cell_width(char),
                "bits": base64.b64encode(font.glyph(char).tobytes()).decode("ascii"),
            }
            for char in sorted(font.chars())
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=1, sort_keys=True)


def load_font(path) -> BitmapFont:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    cell_height = int(record["cell_height"])
    glyphs = {}
    for char, entry in record["glyphs"].items():
        raw = base64.b64decode(entry["bits"])
        glyphs[char] = np.frombuffer(raw, dtype=np.uint8).reshape(cell_height, int(entry["width"]))
    return BitmapFont(name=record["name"], cell_height=cell_height, glyphs=glyphs)


def render_printed(text: str, font: BitmapFont, target_height: int, seed: int) -> np.ndarray:
    """Render printed text to a uint8 grayscale image, white background.

    Width is a deterministic function of (text, font, target_height):
    cells plus one cell-pixel spacing, nearest-neighbor scaled so the
    cell height fills target_height minus the margins. The seed only
    draws the ink level, in [0, MAX_PRINT_INK].
    """
    if not text:
        raise ValueError("text must be non-empty")
    inner_h = target_height - 2 * PRINT_MARGIN
    if inner_h < 1:
        raise ValueError(f"target_height {target_height} leaves no room inside the margins")
    cells = [font.glyph(c) for c in text]

    grid_w = sum(c.shape[1] for c in cells) + (len(cells) - 1)
    grid = np.zeros((font.cell_height, grid_w), dtype=np.uint8)
    x = 0
    for cell in cells:
        grid[:, x : x + cell.shape[1]] = cell
        x += cell.shape[1] + 1

    scale = inner_h / font.cell_height
    inner_w = max(1, int(round(grid_w * scale)))
    rows = np.minimum((np.arange(inner_h) / scale).astype(np.int64), font.cell_height - 1)
    cols = np.minimum((np.arange(inner_w) / scale).astype(np.int64), grid_w - 1)
    scaled = grid[np.ix_(rows, cols)]

    ink = np.random.default_rng(seed).uniform(0.0, MAX_PRINT_INK)
    on_value = np.uint8(round(255.0 * ink))
    img = np.full((target_height, inner_w + 2 * PRINT_MARGIN), 255, dtype=np.uint8)
    region = img[PRINT_MARGIN : PRINT_MARGIN + inner_h, PRINT_MARGIN : PRINT_MARGIN + inner_w]
    region[scaled == 1] = on_value
    return img


__all__ = [
    "BitmapFont",
    "FONT_CHARS",
    "MAX_PRINT_INK",
    "PRINT_MARGIN",
    "default_font",
    "font_from_art",
    "load_font",
    "render_printed",
    "save_font",
]
