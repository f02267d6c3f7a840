"""Minimal static SVG line and scatter plots (axes, ticks, labels, polylines)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
W, H = 720, 440
ML, MR, MT, MB = 70, 130, 40, 55


def _bounds(values):
    v = np.concatenate([np.asarray(a, float).ravel() for a in values]) if values else np.empty(0)
    v = v[np.isfinite(v)]
    if len(v) == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.03 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, n=5):
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


class _Frame:
    def __init__(self, xs, ys, title, xlabel, ylabel, hlines=()):
        self.x0, self.x1 = _bounds(xs)
        self.y0, self.y1 = _bounds(list(ys) + [np.asarray(hlines, float)])
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
            f'<text x="{ML + (W - ML - MR) / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
            f'<text x="16" y="{MT + (H - MT - MB) / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {MT + (H - MT - MB) / 2:.1f})">{escape(ylabel)}</text>',
            f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
            'fill="none" stroke="black"/>',
        ]
        for t in _ticks(self.x0, self.x1):
            px = self.px(t)
            self.parts.append(f'<line x1="{px:.2f}" y1="{H - MB}" x2="{px:.2f}" y2="{H - MB + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.2f}" y="{H - MB + 18}" text-anchor="middle">{t:g}</text>')
        for t in _ticks(self.y0, self.y1):
            py = self.py(t)
            self.parts.append(f'<line x1="{ML - 5}" y1="{py:.2f}" x2="{ML}" y2="{py:.2f}" stroke="black"/>')
            self.parts.append(f'<text x="{ML - 8}" y="{py + 4:.2f}" text-anchor="end">{t:.4g}</text>')
        for yv in hlines:
            py = self.py(yv)
            self.parts.append(f'<line x1="{ML}" y1="{py:.2f}" x2="{W - MR}" y2="{py:.2f}" '
                              'stroke="gray" stroke-dasharray="4 3"/>')

    def px(self, x):
        return ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)

    def py(self, y):
        return H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)

    def legend(self, i, label, color):
        y = MT + 10 + 18 * i
        self.parts.append(f'<line x1="{W - MR + 10}" y1="{y}" x2="{W - MR + 30}" y2="{y}" '
                          f'stroke="{color}" stroke-width="2"/>')
        self.parts.append(f'<text x="{W - MR + 35}" y="{y + 4}">{escape(label)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _thin(x, y, max_points):
    if len(x) > max_points:
        idx = np.linspace(0, len(x) - 1, max_points).astype(int)
        return x[idx], y[idx]
    return x, y


def line_plot(series, title="", xlabel="", ylabel="", hlines=(), max_points=4000) -> str:
    """``series`` is a list of ``(x, y, label)``; non-finite values break the polyline."""
    xs = [np.asarray(s[0], float) for s in series]
    ys = [np.asarray(s[1], float) for s in series]
    fr = _Frame(xs, ys, title, xlabel, ylabel, hlines)
    for i, (x, y, (_, _, label)) in enumerate(zip(xs, ys, series)):
        color = COLORS[i % len(COLORS)]
        x, y = _thin(x, y, max_points)
        ok = np.isfinite(x) & np.isfinite(y)
        breaks = np.flatnonzero(np.diff(ok.astype(int)) != 0) + 1
        for seg in np.split(np.arange(len(x)), breaks):
            seg = seg[ok[seg]]
            if len(seg) < 2:
                continue
            pts = " ".join(f"{fr.px(x[j]):.2f},{fr.py(y[j]):.2f}" for j in seg)
            fr.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        fr.legend(i, label, color)
    return fr.render()


def scatter_plot(x, y, title="", xlabel="", ylabel="", label="") -> str:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    fr = _Frame([x], [y], title, xlabel, ylabel)
    color = COLORS[0]
    for a, b in zip(x, y):
        if math.isfinite(a) and math.isfinite(b):
            fr.parts.append(f'<circle cx="{fr.px(a):.2f}" cy="{fr.py(b):.2f}" r="1.3" fill="{color}"/>')
    if label:
        fr.legend(0, label, color)
    return fr.render()
