"""Hand-authored glyph bank: two synthetic writers, digits + dot + dash + a-z.

Shapes are polyline skeletons authored in normalized glyph space
(y down, baseline at 0.8, x-height 0.35, ascenders to 0.05, descenders
to 1.0, digits spanning 0.1..0.8). Writer styles are derived
deterministically: an upright writer and a slanted one, each with two
wavy variants per character so composition has variants to choose from.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .stroke import MIN_ADVANCE, Glyph, GlyphBank, Stroke

BASELINE = 0.8
XHEIGHT = 0.35
ASCENDER = 0.05
DESCENDER = 1.0
DIGIT_TOP = 0.1


def _arc(cx, cy, rx, ry, deg0, deg1, n=14):
    t = np.radians(np.linspace(deg0, deg1, n))
    return np.stack([cx + rx * np.cos(t), cy + ry * np.sin(t)], axis=1)


def _pts(*pairs):
    return np.array(pairs, dtype=np.float64)


def _base_shapes() -> dict[str, list[np.ndarray]]:
    """Character -> list of polylines, authored in glyph space."""
    b, x, a, d, t = BASELINE, XHEIGHT, ASCENDER, DESCENDER, DIGIT_TOP
    mid = (x + b) / 2  # x-height midline, 0.575
    ry = (b - x) / 2  # bowl half-height, 0.225
    shapes: dict[str, list[np.ndarray]] = {
        "0": [_arc(0.21, (t + b) / 2, 0.21, (b - t) / 2, -90, 270, 18)],
        "1": [_pts((0.0, t + 0.14), (0.16, t), (0.16, b))],
        "2": [
            np.concatenate(
                [
                    _arc(0.19, t + 0.16, 0.19, 0.16, 180, 345, 10),
                    _pts((0.36, t + 0.22), (0.0, b), (0.38, b)),
                ]
            )
        ],
        "3": [
            np.concatenate(
                [
                    _arc(0.18, t + 0.16, 0.17, 0.16, 160, 430, 10),
                    _arc(0.18, b - 0.17, 0.19, 0.17, -70, 160, 10),
                ]
            )
        ],
        "4": [_pts((0.28, t), (0.0, t + 0.42), (0.4, t + 0.42)), _pts((0.28, t), (0.28, b))],
        "5": [
            np.concatenate(
                [
                    _pts((0.34, t), (0.04, t), (0.02, t + 0.28)),
                    _arc(0.18, b - 0.21, 0.2, 0.21, -100, 140, 12),
                ]
            )
        ],
        "6": [
            np.concatenate(
                [
                    _pts((0.3, t), (0.1, t + 0.3), (0.02, b - 0.2)),
                    _arc(0.2, b - 0.17, 0.18, 0.17, 180, 520, 14),
                ]
            )
        ],
        "7": [_pts((0.0, t), (0.38, t), (0.12, b))],
        "8": [
            np.concatenate(
                [
                    _arc(0.19, t + 0.15, 0.15, 0.15, -90, 270, 12),
                    _arc(0.19, b - 0.19, 0.19, 0.19, 270, -90, 12),
                ]
            )
        ],
        "9": [
            np.concatenate(
                [
                    _arc(0.19, t + 0.17, 0.17, 0.17, 0, 360, 12),
                    _pts((0.36, t + 0.17), (0.3, b - 0.25), (0.14, b)),
                ]
            )
        ],
        ".": [_arc(0.035, b - 0.035, 0.035, 0.035, 0, 360, 8)],
        "-": [_pts((0.0, 0.475), (0.3, 0.475))],
        "a": [_arc(0.18, mid, 0.18, ry, 0, 360, 14), _pts((0.36, x), (0.36, b))],
        "b": [_pts((0.0, a), (0.0, b)), _arc(0.18, mid, 0.18, ry, 90, 450, 14)],
        "c": [_arc(0.2, mid, 0.2, ry, 55, 305, 12)],
        "d": [_arc(0.18, mid, 0.18, ry, 90, 450, 14), _pts((0.36, a), (0.36, b))],
        "e": [np.concatenate([_pts((0.0, mid), (0.36, mid)), _arc(0.18, mid, 0.18, ry, 0, -300, 14)])],
        "f": [_pts((0.3, a + 0.05), (0.2, a), (0.12, a + 0.08), (0.12, b)), _pts((0.0, x), (0.26, x))],
        "g": [
            _arc(0.18, mid, 0.18, ry, 0, 360, 14),
            _pts((0.36, x), (0.36, d - 0.1), (0.28, d), (0.12, d), (0.05, d - 0.07)),
        ],
        "h": [_pts((0.0, a), (0.0, b)), _pts((0.0, mid), (0.1, x + 0.03), (0.24, x + 0.02), (0.3, mid), (0.3, b))],
        "i": [_pts((0.03, x), (0.03, b)), _pts((0.02, 0.19), (0.04, 0.21))],
        "j": [_pts((0.12, x), (0.12, d - 0.08), (0.07, d), (0.0, d - 0.04)), _pts((0.11, 0.19), (0.13, 0.21))],
        "k": [_pts((0.0, a), (0.0, b)), _pts((0.27, x), (0.0, 0.62)), _pts((0.1, 0.54), (0.3, b))],
        "l": [_pts((0.03, a), (0.03, b))],
        "m": [
            _pts((0.0, x), (0.0, b)),
            _pts((0.0, 0.48), (0.07, x + 0.01), (0.17, x + 0.04), (0.21, 0.52), (0.21, b)),
            _pts((0.21, 0.48), (0.28, x + 0.01), (0.38, x + 0.04), (0.42, 0.52), (0.42, b)),
        ],
        "n": [
            _pts((0.0, x), (0.0, b)),
            _pts((0.0, 0.48), (0.08, x + 0.01), (0.22, x + 0.03), (0.28, 0.52), (0.28, b)),
        ],
        "o": [_arc(0.18, mid, 0.18, ry, -90, 270, 16)],
        "p": [_pts((0.0, x), (0.0, d)), _arc(0.18, mid, 0.18, ry, 90, 450, 14)],
        "q": [_arc(0.18, mid, 0.18, ry, 90, 450, 14), _pts((0.36, x), (0.36, d))],
        "r": [_pts((0.0, x), (0.0, b)), _pts((0.0, 0.5), (0.08, x + 0.02), (0.2, x), (0.26, 0.42))],
        "s": [
            _pts(
                (0.3, 0.42),
                (0.22, x),
                (0.1, x + 0.01),
                (0.04, 0.45),
                (0.1, 0.55),
                (0.22, 0.6),
                (0.28, 0.68),
                (0.22, 0.78),
                (0.08, 0.79),
                (0.0, 0.72),
            )
        ],
        "t": [_pts((0.12, 0.15), (0.12, 0.7), (0.17, b), (0.26, 0.76)), _pts((0.0, x), (0.26, x))],
        "u": [
            _pts((0.0, x), (0.0, 0.66), (0.05, 0.78), (0.16, b), (0.27, 0.73), (0.31, 0.6), (0.31, x)),
            _pts((0.31, x), (0.31, b)),
        ],
        "v": [_pts((0.0, x), (0.16, b), (0.32, x))],
        "w": [_pts((0.0, x), (0.11, b), (0.22, 0.48), (0.33, b), (0.44, x))],
        "x": [_pts((0.0, x), (0.3, b)), _pts((0.3, x), (0.0, b))],
        "y": [_pts((0.0, x), (0.16, b)), _pts((0.32, x), (0.1, d))],
        "z": [_pts((0.0, x), (0.3, x), (0.0, b), (0.3, b))],
    }
    return shapes


def _resample(pts: np.ndarray, step: float = 0.07) -> np.ndarray:
    """Resample a polyline to roughly uniform arclength spacing."""
    seg = np.diff(pts, axis=0)
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    total = seglen.sum()
    if total == 0:
        return pts
    arclen = np.concatenate([[0.0], np.cumsum(seglen)])
    n_out = max(int(np.ceil(total / step)) + 1, pts.shape[0])
    targets = np.linspace(0.0, total, n_out)
    out_x = np.interp(targets, arclen, pts[:, 0])
    out_y = np.interp(targets, arclen, pts[:, 1])
    return np.stack([out_x, out_y], axis=1)


def _wave(pts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Displace interior points perpendicular to the path, hand-tremor style."""
    pts = _resample(pts)
    if pts.shape[0] < 3:
        return pts
    seg = np.diff(pts, axis=0)
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    arclen = np.concatenate([[0.0], np.cumsum(seglen)])
    amp = rng.uniform(0.006, 0.014)
    freq = rng.uniform(1.0, 2.4)
    phase = rng.uniform(0.0, 2 * np.pi)
    # Central-difference tangents for interior points.
    tangent = pts[2:] - pts[:-2]
    norm = np.hypot(tangent[:, 0], tangent[:, 1])
    norm[norm == 0] = 1.0
    normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1) / norm[:, None]
    offset = amp * np.sin(2 * np.pi * freq * arclen[1:-1] + phase)
    out = pts.copy()
    out[1:-1] += normal * offset[:, None]
    return out


def _style_seed(writer: str, char: str, variant: int) -> int:
    digest = hashlib.sha256(f"{writer}/{char}/{variant}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _make_glyph(writer: str, char: str, variant: int, polylines: list[np.ndarray], slant: float) -> Glyph:
    rng = np.random.default_rng(_style_seed(writer, char, variant))
    strokes = []
    for pts in polylines:
        pts = _wave(pts, rng)
        if slant != 0.0:
            pts = pts.copy()
            pts[:, 0] = pts[:, 0] + slant * (BASELINE - pts[:, 1])
        strokes.append(pts)
    xmin = min(p[:, 0].min() for p in strokes)
    ymin = min(p[:, 1].min() for p in strokes)
    ymax = max(p[:, 1].max() for p in strokes)
    yshift = 0.0
    if ymin < 0:
        yshift = -ymin
    elif ymax > 1:
        yshift = 1 - ymax
    strokes = [Stroke(p - np.array([xmin, -yshift])) for p in strokes]
    width = max(p.points[:, 0].max() for p in strokes)
    return Glyph(char=char, strokes=tuple(strokes), advance_width=max(width, MIN_ADVANCE), writer_id=writer)


_WRITER_SLANTS = {"wr-upright": 0.0, "wr-slanted": 0.22}
_VARIANTS_PER_CHAR = 2


def builtin_bank() -> GlyphBank:
    """The bank shipped with the package: 2 writers, 38 characters, 2 variants each."""
    shapes = _base_shapes()
    glyphs: dict[str, dict[str, list[Glyph]]] = {}
    for writer, slant in _WRITER_SLANTS.items():
        per_char: dict[str, list[Glyph]] = {}
        for char, polylines in shapes.items():
            per_char[char] = [
                _make_glyph(writer, char, variant, polylines, slant) for variant in range(_VARIANTS_PER_CHAR)
            ]
        glyphs[writer] = per_char
    return GlyphBank(glyphs)
