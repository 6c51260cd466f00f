"""Minimal SVG line charts and scatter maps, written without a plotting library."""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

W, H = 520, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 130, 30, 50


def _scale(v, lo, hi, a, b):
    if hi == lo:
        return (a + b) / 2
    return a + (v - lo) * (b - a) / (hi - lo)


def _frame(title: str, xlabel: str, ylabel: str, xlim, ylim) -> list[str]:
    x0, x1 = LEFT, W - RIGHT
    y0, y1 = H - BOTTOM, TOP
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{(y0 + y1) / 2}" text-anchor="middle" transform="rotate(-90 15 {(y0 + y1) / 2})">{escape(ylabel)}</text>',
    ]
    for t in range(5):
        xv = xlim[0] + t * (xlim[1] - xlim[0]) / 4
        yv = ylim[0] + t * (ylim[1] - ylim[0]) / 4
        px = _scale(xv, *xlim, x0, x1)
        py = _scale(yv, *ylim, y0, y1)
        out.append(f'<text x="{px:.1f}" y="{y0 + 15}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{x0 - 5}" y="{py + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    return out


def line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> str:
    xs = [x for xsr, _ in series.values() for x in xsr]
    ys = [y for _, ysr in series.values() for y in ysr]
    xlim = (min(xs, default=0.0), max(xs, default=1.0))
    ylim = (min(min(ys, default=0.0), 0.0), max(ys, default=1.0))
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    for i, (name, (xsr, ysr)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{_scale(x, *xlim, LEFT, W - RIGHT):.2f},{_scale(y, *ylim, H - BOTTOM, TOP):.2f}" for x, y in zip(xsr, ysr)
        )
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 15 * i + 10
        out.append(f'<line x1="{W - RIGHT + 10}" y1="{ly}" x2="{W - RIGHT + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - RIGHT + 35}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out)


def scatter_map(points: Sequence[tuple[float, float, bool]], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Points coloured by a boolean flag (filled when true)."""
    out = _frame(title, xlabel, ylabel, (0.0, 1.0), (0.0, 1.0))
    for x, y, flag in points:
        px = _scale(x, 0.0, 1.0, LEFT, W - RIGHT)
        py = _scale(y, 0.0, 1.0, H - BOTTOM, TOP)
        color = PALETTE[0] if flag else "#dddddd"
        out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out)
