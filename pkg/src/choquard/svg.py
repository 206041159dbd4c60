"""Minimal SVG line plots: polylines, a frame and tick labels. No plotting dependency."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, count)


def write_line_plot(path, x, series: dict, x_label: str = "x", title: str = "",
                    width: int = 640, height: int = 400) -> None:
    """Each series is scaled to its own maximum so curves of different size share one frame."""
    x = np.asarray(x, dtype=float)
    left, right, top, bottom = 60, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = float(x.min()), float(x.max())

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1.0 - v) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
             f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        parts.append(f'<text x="{sx(t):.1f}" y="{top + ph + 15}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(0.0, 1.0):
        parts.append(f'<text x="{left - 5}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.2g}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(x_label)}</text>')
    if title:
        parts.append(f'<text x="{left + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    for k, (name, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=float)
        peak = float(np.max(np.abs(y))) or 1.0
        pts = " ".join(f"{sx(a):.2f},{sy(b / peak):.2f}" for a, b in zip(x, y))
        color = COLORS[k % len(COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{left + pw - 5}" y="{top + 15 + 14 * k}" text-anchor="end" fill="{color}">'
                     f'{escape(name)} (max {peak:.4g})</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
