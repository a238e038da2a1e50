"""Minimal deterministic SVG line charts.

No plotting library: identical table data must yield identical bytes, so
the renderer formats every coordinate with fixed precision and draws from
a fixed palette. Good enough for the handful of report figures.
"""

from __future__ import annotations

import math
from typing import Sequence

Point = tuple[float, float]
Series = tuple[str, Sequence[Point]]

WIDTH, HEIGHT = 860, 480
MARGIN_LEFT, MARGIN_RIGHT = 90, 30
MARGIN_TOP, MARGIN_BOTTOM = 50, 60

PALETTE = ("#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085",
           "#7f8c8d", "#2c3e50")


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _label(value: float) -> str:
    if value == 0:
        return "0"
    if abs(value) >= 1e15 or abs(value) < 1e-4:
        return f"{value:.3e}"
    return f"{value:.6g}"


def _bounds(series: Sequence[Series]) -> tuple[float, float, float, float]:
    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    if x_min == x_max:
        x_min, x_max = x_min - 1, x_max + 1
    if y_min == y_max:
        pad = abs(y_min) * 0.1 or 1.0
        y_min, y_max = y_min - pad, y_max + pad
    return x_min, x_max, y_min, y_max


def render_line_chart(title: str, x_label: str, y_label: str,
                      series: Sequence[Series]) -> str:
    """Render named (x, y) series as an SVG document string."""
    series = [(name, list(pts)) for name, pts in series if pts]
    if not series:
        raise ValueError("nothing to plot")
    x_min, x_max, y_min, y_max = _bounds(series)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        return HEIGHT - MARGIN_BOTTOM - (y - y_min) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>',
    ]

    # gridlines and tick labels
    for i in range(5):
        frac = i / 4
        gx = MARGIN_LEFT + frac * plot_w
        gy = HEIGHT - MARGIN_BOTTOM - frac * plot_h
        x_val = x_min + frac * (x_max - x_min)
        y_val = y_min + frac * (y_max - y_min)
        parts.append(
            f'<line x1="{_fmt(gx)}" y1="{MARGIN_TOP}" x2="{_fmt(gx)}" '
            f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="#dddddd"/>')
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{_fmt(gy)}" '
            f'x2="{WIDTH - MARGIN_RIGHT}" y2="{_fmt(gy)}" stroke="#dddddd"/>')
        parts.append(
            f'<text x="{_fmt(gx)}" y="{HEIGHT - MARGIN_BOTTOM + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{_label(x_val)}</text>')
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{_fmt(gy + 4)}" '
            f'text-anchor="end" font-family="sans-serif" font-size="11">'
            f'{_label(y_val)}</text>')

    # axes
    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333333"/>')
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w // 2}" y="{HEIGHT - 16}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">'
        f'{_escape(x_label)}</text>')
    parts.append(
        f'<text x="20" y="{MARGIN_TOP + plot_h // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {MARGIN_TOP + plot_h // 2})">'
        f'{_escape(y_label)}</text>')

    # series
    for idx, (name, pts) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}"
                          for x, y in pts if _finite(x, y))
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"/>')
        ly = MARGIN_TOP + 16 + idx * 18
        parts.append(
            f'<line x1="{WIDTH - MARGIN_RIGHT - 150}" y1="{ly - 4}" '
            f'x2="{WIDTH - MARGIN_RIGHT - 122}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="3"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN_RIGHT - 116}" y="{ly}" '
            f'font-family="sans-serif" font-size="12">{_escape(name)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _finite(x: float, y: float) -> bool:
    return math.isfinite(x) and math.isfinite(y)


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
