"""Standalone SVG 1.1 rendering of sweep results.

No plotting library: the output must be byte-stable across platforms and
thread counts, so coordinates are formatted with fixed precision and the
series order is fully determined by the data.
"""
from __future__ import annotations

import math

SERIES_COLORS = ["black", "red", "blue", "green", "orange", "purple"]

WIDTH, HEIGHT = 640, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 20, 50


class PlotError(ValueError):
    pass


def _coord(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _series_from_rows(rows: list[dict], x_axis: str) -> list[tuple[float, list]]:
    by_f: dict[float, list] = {}
    for row in rows:
        for key in (x_axis, "F", "mean_sigma"):
            if key not in row:
                raise PlotError(f"plot rows need a '{key}' column")
            if not math.isfinite(float(row[key])):
                raise PlotError(f"non-finite value in column '{key}'")
        by_f.setdefault(float(row["F"]), []).append(
            (float(row[x_axis]), float(row["mean_sigma"])))
    out = []
    for f_val in sorted(by_f):
        pts = sorted(by_f[f_val])
        out.append((f_val, pts))
    return out


def emit_svg_plot(rows: list[dict], x_axis: str = "mu") -> str:
    """Render mean hierarchy strength against one swept axis, one polyline
    per F value. Returns the SVG document as text."""
    if not rows:
        raise PlotError("no rows to plot")
    series = _series_from_rows(rows, x_axis)
    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_hi = y_lo + 1.0
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
             f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    # frame
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    x1, y1 = MARGIN_LEFT + plot_w, MARGIN_TOP
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for i in range(5):
        frac = i / 4.0
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        px, py = _coord(sx(xv)), _coord(sy(yv))
        parts.append(f'<line x1="{px}" y1="{y0}" x2="{px}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{px}" y="{y0 + 18}" font-size="11" '
                     f'text-anchor="middle">{_tick_label(xv)}</text>')
        parts.append(f'<line x1="{x0 - 5}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py}" font-size="11" '
                     f'text-anchor="end" dominant-baseline="middle">{_tick_label(yv)}</text>')
    parts.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" '
                 f'font-size="13" text-anchor="middle">{x_axis}</text>')
    parts.append(f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.1f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{MARGIN_TOP + plot_h / 2:.1f})">sigma</text>')
    for idx, (f_val, pts) in enumerate(series):
        color = SERIES_COLORS[idx % len(SERIES_COLORS)]
        coords = " ".join(f"{_coord(sx(x))},{_coord(sy(y))}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{coords}"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{_coord(sx(x))}" cy="{_coord(sy(y))}" '
                         f'r="3" fill="{color}"/>')
        ly = MARGIN_TOP + 14 + 16 * idx
        parts.append(f'<line x1="{x1 - 110}" y1="{ly}" x2="{x1 - 86}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{x1 - 80}" y="{ly + 4}" font-size="12">'
                     f'F={_tick_label(f_val)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
