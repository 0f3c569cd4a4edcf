import numpy as np
import pytest

from hwclassify.strokegen import GlyphBank, REQUIRED_CHARS, make_glyph


@pytest.fixture(scope="session")
def tiny_bank() -> GlyphBank:
    """Single writer, every required char drawn as the same diagonal line.

    Raw points (0,0)-(4,10) normalize to height 1.0 and width 0.4, so
    every glyph has advance_width exactly 0.4. That makes layout
    arithmetic in tests exact.
    """
    glyphs = {}
    for char in REQUIRED_CHARS:
        g = make_glyph(char, [np.array([[0.0, 0.0], [4.0, 10.0]])], "w0")
        glyphs.setdefault("w0", {})[char] = [g]
    return GlyphBank(glyphs)
