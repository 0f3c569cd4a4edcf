"""Rasterization of stroke sequences onto a white canvas.

Each polyline segment is drawn as a capsule (stadium) of radius
stroke_width / 2. Pixel coverage comes from the signed distance of the
pixel center to the segment, with a one-pixel linear falloff, and
overlapping segments keep the darkest value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .compose import ComposedString
from .stroke import Stroke

# Blank border around the rendered strokes, in pixels.
RENDER_MARGIN = 4


@dataclass(frozen=True)
class RenderSpec:
    target_height: int = 64
    stroke_width: float = 2.0
    ink_intensity: float = 0.0
    jitter_sigma: float = 0.0
    inter_glyph_gap: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.target_height < 16:
            raise ValueError(f"target_height must be >= 16, got {self.target_height}")
        if self.stroke_width < 1:
            raise ValueError(f"stroke_width must be >= 1, got {self.stroke_width}")
        if not 0 <= self.ink_intensity <= 1:
            raise ValueError(f"ink_intensity must be in [0, 1], got {self.ink_intensity}")
        if self.jitter_sigma < 0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")
        if self.inter_glyph_gap < 0:
            raise ValueError(f"inter_glyph_gap must be >= 0, got {self.inter_glyph_gap}")


def render(strokes: Union[Sequence[Stroke], ComposedString], spec: RenderSpec) -> np.ndarray:
    """Render strokes to a uint8 grayscale image, white background.

    Canvas height is spec.target_height; width follows the scaled stroke
    extent plus a fixed margin. Glyph-space y in [0, 1] maps to the
    drawable rows [margin, height - margin]. Jitter is applied per point
    in glyph-space units before scaling, seeded deterministically.
    """
    if isinstance(strokes, ComposedString):
        strokes = strokes.strokes
    if not strokes:
        raise ValueError("no strokes to render")

    rng = np.random.default_rng(spec.seed)
    jittered = []
    for stroke in strokes:
        pts = stroke.points
        if spec.jitter_sigma > 0:
            pts = pts + rng.normal(0.0, spec.jitter_sigma, pts.shape)
        jittered.append(pts)

    all_pts = np.concatenate(jittered)
    xmin = all_pts[:, 0].min()
    xmax = all_pts[:, 0].max()
    ymax = all_pts[:, 1].max()

    height = spec.target_height
    margin = RENDER_MARGIN
    scale = (height - 2 * margin) / max(1.0, ymax)
    width = int(np.ceil((xmax - xmin) * scale)) + 2 * margin

    alpha = np.zeros((height, width), dtype=np.float64)
    radius = spec.stroke_width / 2.0
    reach = radius + 1.0
    for pts in jittered:
        px = margin + (pts[:, 0] - xmin) * scale
        py = margin + pts[:, 1] * scale
        if pts.shape[0] == 1:
            segments = [(px[0], py[0], px[0], py[0])]
        else:
            segments = zip(px[:-1], py[:-1], px[1:], py[1:])
        for x0, y0, x1, y1 in segments:
            _draw_capsule(alpha, x0, y0, x1, y1, radius, reach)

    intensity = 255.0 - alpha * 255.0 * (1.0 - spec.ink_intensity)
    return np.rint(intensity).clip(0, 255).astype(np.uint8)


def _draw_capsule(alpha: np.ndarray, x0, y0, x1, y1, radius, reach) -> None:
    h, w = alpha.shape
    r0 = max(int(np.floor(min(y0, y1) - reach)), 0)
    r1 = min(int(np.ceil(max(y0, y1) + reach)), h - 1)
    c0 = max(int(np.floor(min(x0, x1) - reach)), 0)
    c1 = min(int(np.ceil(max(x0, x1) + reach)), w - 1)
    if r0 > r1 or c0 > c1:
        return
    cy = np.arange(r0, r1 + 1, dtype=np.float64)[:, None] + 0.5
    cx = np.arange(c0, c1 + 1, dtype=np.float64)[None, :] + 0.5
    dx, dy = x1 - x0, y1 - y0
    denom = dx * dx + dy * dy
    if denom == 0:
        dist = np.hypot(cx - x0, cy - y0)
    else:
        t = ((cx - x0) * dx + (cy - y0) * dy) / denom
        t = np.clip(t, 0.0, 1.0)
        dist = np.hypot(cx - (x0 + t * dx), cy - (y0 + t * dy))
    coverage = np.clip(0.5 + radius - dist, 0.0, 1.0)
    region = alpha[r0 : r1 + 1, c0 : c1 + 1]
    np.maximum(region, coverage, out=region)
