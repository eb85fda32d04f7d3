"""Minimal SVG line charts for ratio-versus-eps plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape


def line_chart(series, title: str = "", xlabel: str = "eps", ylabel: str = "ratio",
               hlines=(), log_x: bool = True, width: int = 560, height: int = 360) -> str:
    """Render ``series = [(label, xs, ys), ...]`` as a standalone SVG document.

    ``hlines`` are ``(label, y)`` reference levels drawn dashed.
    """
    pad_l, pad_r, pad_t, pad_b = 64, 16, 32, 48
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)
           if math.isfinite(y) and (x > 0 or not log_x)]
    ys_all = [y for _, y in pts] + [y for _, y in hlines]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    x0, x1 = min(tx(x) for x, _ in pts), max(tx(x) for x, _ in pts)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    span = (y1 - y0) or 1.0
    y0, y1 = y0 - 0.08 * span, y1 + 0.08 * span
    W, H = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (tx(x) - x0) / (x1 - x0) * W

    def py(y):
        return pad_t + (1 - (y - y0) / (y1 - y0)) * H

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{pad_l}" y="{pad_t}" width="{W}" height="{H}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
           f'{escape(title)}</text>',
           f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 14 {height / 2:.1f})">{escape(ylabel)}</text>']
    for k in range(5):
        yv = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{pad_l - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    if log_x:
        for e in range(math.floor(x0), math.ceil(x1) + 1):
            if x0 - 1e-9 <= e <= x1 + 1e-9:
                xp = px(10.0 ** e)
                out.append(f'<text x="{xp:.1f}" y="{pad_t + H + 16}" text-anchor="middle">1e{e}</text>')
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    for k, (label, y) in enumerate(hlines):
        out.append(f'<line x1="{pad_l}" x2="{pad_l + W}" y1="{py(y):.1f}" y2="{py(y):.1f}" '
                   f'stroke="#888" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{pad_l + W - 4}" y="{py(y) - 4:.1f}" text-anchor="end" '
                   f'fill="#666">{escape(label)}</text>')
    for k, (label, xs, ys) in enumerate(series):
        col = colors[k % len(colors)]
        good = [(px(x), py(y)) for x, y in zip(xs, ys) if math.isfinite(y) and (x > 0 or not log_x)]
        if not good:
            continue
        path = " ".join(f"{a:.1f},{b:.1f}" for a, b in good)
        out.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="1.6"/>')
        out += [f'<circle cx="{a:.1f}" cy="{b:.1f}" r="2.5" fill="{col}"/>' for a, b in good]
        out.append(f'<text x="{pad_l + 8}" y="{pad_t + 14 + 14 * k}" fill="{col}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
