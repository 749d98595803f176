"""Tiny SVG emitter for mean +- std error-bar plots."""

from __future__ import annotations

import math
from typing import Sequence

WIDTH, HEIGHT, MARGIN = 480, 320, 50
COLORS = ("#1f4e9c", "#7a3b8f", "#2e7d32", "#c62828")


def errorbar_svg(x: Sequence[float], series: dict[str, tuple[Sequence[float], Sequence[float]]],
                 title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Render each named (means, stds) pair as a polyline with vertical error bars."""
    lows = [m - s for means, stds in series.values() for m, s in zip(means, stds)
            if math.isfinite(m)]
    highs = [m + s for means, stds in series.values() for m, s in zip(means, stds)
             if math.isfinite(m)]
    y_lo, y_hi = (min(lows), max(highs)) if lows else (0.0, 1.0)
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_lo, x_hi = min(x), max(x)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1

    def px(v):
        return MARGIN + (v - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def py(v):
        return HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
           f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
           f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
           f'<text x="{WIDTH / 2}" y="20" text-anchor="middle">{title}</text>',
           f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle">{xlabel}</text>',
           f'<text x="12" y="{HEIGHT / 2}" transform="rotate(-90 12 {HEIGHT / 2})" '
           f'text-anchor="middle">{ylabel}</text>',
           f'<text x="{MARGIN - 4}" y="{py(y_lo):.1f}" text-anchor="end" font-size="10">'
           f'{y_lo:.2e}</text>',
           f'<text x="{MARGIN - 4}" y="{py(y_hi):.1f}" text-anchor="end" font-size="10">'
           f'{y_hi:.2e}</text>']
    for v in x:
        out.append(f'<text x="{px(v):.1f}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle" '
                   f'font-size="10">{v:g}</text>')

    for k, (name, (means, stds)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = [(px(xi), py(m)) for xi, m in zip(x, means) if math.isfinite(m)]
        out.append(f'<polyline fill="none" stroke="{color}" points="'
                   + " ".join(f"{a:.1f},{b:.1f}" for a, b in pts) + '"/>')
        for xi, m, s in zip(x, means, stds):
            if not math.isfinite(m):
                continue
            s = s if math.isfinite(s) else 0.0
            out.append(f'<line x1="{px(xi):.1f}" y1="{py(m - s):.1f}" x2="{px(xi):.1f}" '
                       f'y2="{py(m + s):.1f}" stroke="{color}"/>')
            out.append(f'<circle cx="{px(xi):.1f}" cy="{py(m):.1f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * k}" text-anchor="end" '
                   f'fill="{color}" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
