"""Minimal SVG output (heatmaps and line plots) with no plotting dependency.

Colormaps: ``sequential`` interpolates the viridis anchor colors
#440154 -> #3b528b -> #21918c -> #5ec962 -> #fde725 over [min, max];
``diverging`` runs #2166ac -> #f7f7f7 -> #b2182b over [-m, m] with
m = max |z|, so zero is always white.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

SEQUENTIAL = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"]
DIVERGING = ["#2166ac", "#f7f7f7", "#b2182b"]
LINE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

W, H = 640, 420
ML, MR, MT, MB = 70, 90, 40, 55


def _rgb(h):
    return np.array([int(h[i:i + 2], 16) for i in (1, 3, 5)], dtype=float)


def _cmap(t, anchors):
    t = float(np.clip(t, 0.0, 1.0))
    cols = [_rgb(a) for a in anchors]
    s = t * (len(cols) - 1)
    i = min(int(s), len(cols) - 2)
    c = cols[i] + (s - i) * (cols[i + 1] - cols[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def _axes(parts, x0, x1, y0, y1, xlabel, ylabel, title):
    pw, ph = W - ML - MR, H - MT - MB
    parts.append(f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for k in range(5):
        f = k / 4
        xv = x0 + f * (x1 - x0)
        yv = y0 + f * (y1 - y0)
        xp = ML + f * pw
        yp = MT + ph - f * ph
        parts.append(f'<line x1="{xp:.1f}" y1="{MT + ph}" x2="{xp:.1f}" y2="{MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{xp:.1f}" y="{MT + ph + 18}" font-size="11" text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<line x1="{ML - 5}" y1="{yp:.1f}" x2="{ML}" y2="{yp:.1f}" stroke="black"/>')
        parts.append(f'<text x="{ML - 8}" y="{yp + 4:.1f}" font-size="11" text-anchor="end">{yv:.4g}</text>')
    parts.append(f'<text x="{ML + pw / 2}" y="{H - 12}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{MT + ph / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 16 {MT + ph / 2})">{escape(ylabel)}</text>')
    parts.append(f'<text x="{W / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')


def _write(path, parts):
    body = "\n".join(parts)
    Path(path).write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n', encoding="utf-8")


def heatmap(path, z, x, y, title="", xlabel="", ylabel="", diverging=False) -> None:
    """z has shape (len(y), len(x)); cells are drawn between node midpoints."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pw, ph = W - ML - MR, H - MT - MB
    if diverging:
        m = float(np.max(np.abs(z))) or 1.0
        lo, hi, anchors = -m, m, DIVERGING
    else:
        lo, hi, anchors = float(np.min(z)), float(np.max(z)), SEQUENTIAL
        if hi <= lo:
            hi = lo + 1.0
    x0, x1 = (x[0], x[-1]) if x.size > 1 else (x[0] - 0.5, x[0] + 0.5)
    y0, y1 = (y[0], y[-1]) if y.size > 1 else (y[0] - 0.5, y[0] + 0.5)
    parts = []
    nx, ny = x.size, y.size
    cw, chh = pw / nx, ph / ny
    for i in range(ny):
        for j in range(nx):
            c = _cmap((z[i, j] - lo) / (hi - lo), anchors)
            parts.append(f'<rect x="{ML + j * cw:.2f}" y="{MT + ph - (i + 1) * chh:.2f}" '
                         f'width="{cw + 0.3:.2f}" height="{chh + 0.3:.2f}" fill="{c}"/>')
    _axes(parts, x0, x1, y0, y1, xlabel, ylabel, title)
    # colorbar
    bx = W - MR + 20
    for k in range(50):
        c = _cmap(k / 49, anchors)
        parts.append(f'<rect x="{bx}" y="{MT + ph - (k + 1) * ph / 50:.2f}" width="16" '
                     f'height="{ph / 50 + 0.3:.2f}" fill="{c}"/>')
    parts.append(f'<text x="{bx + 20}" y="{MT + 10}" font-size="10">{hi:.3g}</text>')
    parts.append(f'<text x="{bx + 20}" y="{MT + ph}" font-size="10">{lo:.3g}</text>')
    _write(path, parts)


def lineplot(path, x, series: dict, title="", xlabel="", ylabel="") -> None:
    x = np.asarray(x, dtype=float)
    pw, ph = W - ML - MR, H - MT - MB
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    finite = np.concatenate([v[np.isfinite(v)] for v in ys]) if ys else np.zeros(1)
    lo = float(np.min(finite)) if finite.size else 0.0
    hi = float(np.max(finite)) if finite.size else 1.0
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    x0, x1 = float(x[0]), float(x[-1]) if x.size > 1 else float(x[0]) + 1.0
    parts = []
    for k, (name, v) in enumerate(series.items()):
        col = LINE_COLORS[k % len(LINE_COLORS)]
        segs, cur = [], []
        for xv, yv in zip(x, np.asarray(v, dtype=float)):
            if not np.isfinite(yv):
                if cur:
                    segs.append(cur)
                cur = []
                continue
            px = ML + (xv - x0) / (x1 - x0) * pw
            py = MT + ph - (yv - lo) / (hi - lo) * ph
            cur.append(f"{px:.2f},{py:.2f}")
        if cur:
            segs.append(cur)
        for s in segs:
            parts.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{" ".join(s)}"/>')
        parts.append(f'<text x="{W - MR + 8}" y="{MT + 14 + 16 * k}" font-size="11" fill="{col}">{escape(str(name))}</text>')
    _axes(parts, x0, x1, lo, hi, xlabel, ylabel, title)
    _write(path, parts)
