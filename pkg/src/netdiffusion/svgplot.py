"""Minimal SVG line chart of approximation error against Hamming velocity."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import DataError

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=30, top=40, bottom=60)
SERIES = (
    ("eq", "Equilibrium", "#c0392b", "mean_rmse_eq", "ci95_eq"),
    ("pert", "Perturbative", "#2471a3", "mean_rmse_pert", "ci95_pert"),
)


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


def _f(x: float) -> str:
    return f"{x:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


def render_svg(summary: Sequence) -> str:
    if len(summary) < 2:
        raise DataError(f"plot needs at least 2 rate summaries, got {len(summary)}")
    xs = [s.mean_velocity for s in summary]
    ys = []
    for s in summary:
        for _, _, _, mean_attr, ci_attr in SERIES:
            m, c = getattr(s, mean_attr), getattr(s, ci_attr) or 0.0
            ys.extend((m - c, m + c))
    x_lo, x_hi = min(0.0, min(xs)), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return MARGIN["top"] + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, y0 = MARGIN["left"], MARGIN["top"] + ph
    out.append(f'<g class="axes" stroke="black" fill="none">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN["top"]}" x2="{x0}" y2="{y0}"/>')
    out.append("</g>")
    for t in _ticks(x_lo, x_hi):
        X = _f(px(t))
        out.append(f'<line class="tick" x1="{X}" y1="{y0}" x2="{X}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{y0 + 18}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        Y = _f(py(t))
        out.append(f'<line class="tick" x1="{x0 - 5}" y1="{Y}" x2="{x0}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_tick_label(t)}</text>')
    out.append(
        f'<text class="xlabel" x="{_f(x0 + pw / 2)}" y="{HEIGHT - 15}" text-anchor="middle">'
        "Mean Hamming velocity (edge changes per step)</text>"
    )
    out.append(
        f'<text class="ylabel" x="20" y="{_f(MARGIN["top"] + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 20 {_f(MARGIN["top"] + ph / 2)})">Mean RMSE vs exact final state</text>'
    )
    order = sorted(range(len(summary)), key=lambda i: xs[i])
    for key, label, color, mean_attr, ci_attr in SERIES:
        pts = [(px(xs[i]), py(getattr(summary[i], mean_attr))) for i in order]
        out.append(f'<g class="series series-{key}" stroke="{color}" fill="{color}">')
        out.append(
            '<polyline fill="none" stroke-width="1.5" points="'
            + " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
            + '"/>'
        )
        for i in order:
            s = summary[i]
            m, c = getattr(s, mean_attr), getattr(s, ci_attr)
            X = _f(px(xs[i]))
            if c:
                out.append(f'<line class="ci" x1="{X}" y1="{_f(py(m - c))}" x2="{X}" y2="{_f(py(m + c))}"/>')
            out.append(f'<circle class="marker marker-{key}" cx="{X}" cy="{_f(py(m))}" r="3.5"/>')
        out.append("</g>")
    for k, (key, label, color, _, _) in enumerate(SERIES):
        ly = MARGIN["top"] + 10 + 18 * k
        lx = x0 + 15
        out.append(f'<circle class="legend" cx="{lx}" cy="{ly}" r="4" fill="{color}"/>')
        out.append(f'<text x="{lx + 10}" y="{ly}" dominant-baseline="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(summary: Sequence, path) -> None:
    """Write the error-vs-velocity chart (with 95% CI bars) as SVG."""
    text = render_svg(summary)
    Path(path).write_text(text)
