"""Minimal SVG line charts: one polyline per series, linear autoscaled axes."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 1000, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 90, 30, 40, 60
N_TICKS = 5
MAX_POINTS = 4000
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
           "#e377c2")


def _ticks(lo, hi):
    return np.linspace(lo, hi, N_TICKS)


def _thin(x, y):
    # keep the file size bounded on long trajectories
    if len(x) <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, len(x) - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def line_chart(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """series: iterable of (label, x, y). Returns the SVG document as text."""
    series = [(str(lab), np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series]
    finite = [np.isfinite(x) & np.isfinite(y) for _, x, y in series]
    xs = np.concatenate([x[m] for (_, x, _), m in zip(series, finite)] or [np.zeros(1)])
    ys = np.concatenate([y[m] for (_, _, y), m in zip(series, finite)] or [np.zeros(1)])
    x0, x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN_T + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
           f'width="{WIDTH}" height="{HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" '
           'stroke="black"/>']
    for t in _ticks(x0, x1):
        px = sx(t)
        out.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + ph}" x2="{px:.2f}" '
                   f'y2="{MARGIN_T + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MARGIN_T + ph + 22}" font-size="14" '
                   f'text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        py = sy(t)
        out.append(f'<line x1="{MARGIN_L - 6}" y1="{py:.2f}" x2="{MARGIN_L}" y2="{py:.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 10}" y="{py + 5:.2f}" font-size="14" '
                   f'text-anchor="end">{t:.4g}</text>')
    if x0 < 0 < x1:
        out.append(f'<line x1="{sx(0):.2f}" y1="{MARGIN_T}" x2="{sx(0):.2f}" '
                   f'y2="{MARGIN_T + ph}" stroke="#bbbbbb"/>')
    if y0 < 0 < y1:
        out.append(f'<line x1="{MARGIN_L}" y1="{sy(0):.2f}" x2="{MARGIN_L + pw}" '
                   f'y2="{sy(0):.2f}" stroke="#bbbbbb"/>')
    for i, ((label, x, y), m) in enumerate(zip(series, finite)):
        x, y = _thin(x[m], y[m])
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"><title>{escape(label)}</title></polyline>')
        ly = MARGIN_T + 18 + 18 * i
        out.append(f'<text x="{MARGIN_L + pw - 10}" y="{ly}" font-size="14" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" font-size="18" '
                   f'text-anchor="middle">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{MARGIN_L + pw / 2:.0f}" y="{HEIGHT - 15}" font-size="16" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="20" y="{MARGIN_T + ph / 2:.0f}" font-size="16" '
                   f'text-anchor="middle" transform="rotate(-90 20 {MARGIN_T + ph / 2:.0f})">'
                   f'{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trajectory_chart(trajs, mode: str = "solution") -> str:
    """u against r (solution) or u' against u (phase), one curve per trajectory."""
    series = []
    for t in trajs:
        label = t.label or f"alpha={t.params.alpha:.4g}"
        if mode == "phase":
            series.append((label, t.u, t.v))
        else:
            series.append((label, t.r, t.u))
    if mode == "phase":
        return line_chart(series, "phase plane", "u", "u'")
    return line_chart(series, "radial profiles", "r", "u")
