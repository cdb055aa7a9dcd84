"""Minimal deterministic SVG line charts.

Matplotlib embeds timestamps and hashed ids in its SVG output; studies here
need byte-identical artifacts across reruns, so charts are emitted by hand.
"""

from __future__ import annotations

import numpy as np

__all__ = ["line_chart"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step * 0.5, step)


def line_chart(path, x, series: dict, title: str = "", xlabel: str = "",
               ylabel: str = "", width: int = 720, height: int = 440) -> None:
    """Write a multi-line chart; ``series`` maps label -> y array."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    all_y = np.concatenate([v[np.isfinite(v)] for v in ys.values()])
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    ml, mr, mt, mb = 64, 150, 36, 46

    def sx(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * (width - ml - mr)

    def sy(v):
        return height - mb - (v - y_lo) / (y_hi - y_lo) * (height - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(f'<line x1="{px:.2f}" y1="{mt}" x2="{px:.2f}" y2="{height - mb}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{px:.2f}" y="{height - mb + 16}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{tx:g}</text>')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(f'<line x1="{ml}" y1="{py:.2f}" x2="{width - mr}" y2="{py:.2f}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{ml - 6}" y="{py + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{ty:g}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{width - ml - mr}" '
               f'height="{height - mt - mb}" fill="none" stroke="#333333"/>')
    for i, (label, y) in enumerate(ys.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y)
                       if np.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        ly = mt + 16 + 16 * i
        out.append(f'<line x1="{width - mr + 8}" y1="{ly - 4}" x2="{width - mr + 28}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - mr + 34}" y="{ly}" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
    if xlabel:
        out.append(f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 8}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                   f'{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{(mt + height - mb) / 2:.1f}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="12" '
                   f'transform="rotate(-90 16 {(mt + height - mb) / 2:.1f})">'
                   f'{ylabel}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
