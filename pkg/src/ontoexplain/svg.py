"""Deterministic SVG scatter of the boundary and evidence (no plotting library)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .representative import GLOBAL, LOCAL, NEGATIVE, POSITIVE

WIDTH, HEIGHT, PAD = 480, 400, 50
CLASS_COLOURS = {0: "#9e9e9e", 1: "#f2c14e"}
EVIDENCE_STYLE = {
    (POSITIVE, GLOBAL): ("extreme-positive", "#1f77b4"),
    (POSITIVE, LOCAL): ("local-positive", "#2ca02c"),
    (NEGATIVE, GLOBAL): ("extreme-negative", "#d62728"),
    (NEGATIVE, LOCAL): ("local-negative", "#9467bd"),
}


def _f(x):
    return f"{x:.2f}"


def _scaler(values, lo_px, hi_px, flip=False):
    lo, hi = float(np.min(values)), float(np.max(values))
    span = (hi - lo) or 1.0

    def to_px(v):
        t = (float(v) - lo) / span
        if flip:
            t = 1 - t
        return lo_px + t * (hi_px - lo_px)

    return to_px


def _marker(kind, x, y, colour, css):
    if kind == "circle":
        return f'<circle class="{css}" cx="{_f(x)}" cy="{_f(y)}" r="2.5" fill="{colour}" fill-opacity="0.6"/>'
    if kind == "triangle":
        pts = f"{_f(x)},{_f(y - 5)} {_f(x - 4.5)},{_f(y + 3.5)} {_f(x + 4.5)},{_f(y + 3.5)}"
        return f'<polygon class="{css}" points="{pts}" fill="none" stroke="{colour}" stroke-width="1.2"/>'
    if kind == "plus":
        return (f'<path class="{css}" d="M{_f(x - 5)} {_f(y)}H{_f(x + 5)}M{_f(x)} {_f(y - 5)}V{_f(y + 5)}" '
                f'stroke="{colour}" stroke-width="1.6"/>')
    if kind == "diamond":
        pts = f"{_f(x)},{_f(y - 5)} {_f(x + 5)},{_f(y)} {_f(x)},{_f(y + 5)} {_f(x - 5)},{_f(y)}"
        return f'<polygon class="{css}" points="{pts}" fill="{colour}" fill-opacity="0.8"/>'
    if kind == "square":
        return (f'<rect class="{css}" x="{_f(x - 4)}" y="{_f(y - 4)}" width="8" height="8" '
                f'fill="{colour}" fill-opacity="0.8"/>')
    if kind == "x":
        return (f'<path class="{css}" d="M{_f(x - 4)} {_f(y - 4)}L{_f(x + 4)} {_f(y + 4)}'
                f'M{_f(x - 4)} {_f(y + 4)}L{_f(x + 4)} {_f(y - 4)}" stroke="{colour}" stroke-width="1.6"/>')
    raise ValueError(kind)


EVIDENCE_SHAPES = {
    (POSITIVE, GLOBAL): "square",
    (POSITIVE, LOCAL): "plus",
    (NEGATIVE, GLOBAL): "diamond",
    (NEGATIVE, LOCAL): "x",
}


def render_svg(plot, title: str = "") -> str:
    """Training points, boundary hull vertices, four evidence kinds and the test point."""
    P = np.vstack([plot.points, plot.test_point[None, :]])
    sx = _scaler(P[:, 0], PAD, WIDTH - PAD)
    sy = _scaler(P[:, 1], PAD, HEIGHT - PAD, flip=True)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="11">{escape(plot.axes[0])}</text>',
        f'<text x="14" y="{HEIGHT // 2}" font-size="11" transform="rotate(-90 14 {HEIGHT // 2})" '
        f'text-anchor="middle">{escape(plot.axes[1])}</text>',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
        f'fill="none" stroke="#cccccc"/>',
        '<g id="training">',
    ]
    for (x, y), lab in zip(plot.points, plot.labels):
        out.append(_marker("circle", sx(x), sy(y), CLASS_COLOURS[int(lab)], "train-point"))
    out.append("</g>")
    out.append('<g id="hull">')
    for r in plot.hull_rows:
        x, y = plot.points[r]
        out.append(_marker("triangle", sx(x), sy(y), "#1f3c88", "hull-vertex"))
    out.append("</g>")
    if plot.evidence is not None:
        for key, (css, colour) in EVIDENCE_STYLE.items():
            out.append(f'<g id="{css}">')
            for p in plot.evidence.group(*key):
                x, y = plot.points[p.row_index]
                out.append(_marker(EVIDENCE_SHAPES[key], sx(x), sy(y), colour, css))
            out.append("</g>")
    tx, ty = sx(plot.test_point[0]), sy(plot.test_point[1])
    out.append('<g id="test" class="test-point">'
               f'<rect x="{_f(tx - 6)}" y="{_f(ty - 6)}" width="12" height="12" fill="none" '
               f'stroke="#e41a1c" stroke-width="2"/>'
               f'<path d="M{_f(tx - 6)} {_f(ty - 6)}L{_f(tx + 6)} {_f(ty + 6)}M{_f(tx - 6)} {_f(ty + 6)}'
               f'L{_f(tx + 6)} {_f(ty - 6)}" stroke="#e41a1c" stroke-width="2"/></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
