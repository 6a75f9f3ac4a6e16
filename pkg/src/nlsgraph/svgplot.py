"""Minimal static SVG line charts for solution profiles.

One polyline per edge, laid out left to right in edge-id order along the
meshed arclength, with edge-id labels.  No external plotting dependency; the
output is a plain 1000x400 SVG document string.
"""
from __future__ import annotations

import numpy as np

from .meshing import GridFunction

WIDTH = 1000
HEIGHT = 400
_MARGIN_L = 60
_MARGIN_R = 20
_MARGIN_T = 34
_MARGIN_B = 40

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_profile(u: GridFunction, title: str = "") -> str:
    """Render the per-edge values of ``u`` as an SVG document string."""
    mesh = u.mesh
    eids = sorted(mesh.edge_dofs)
    spans = []
    offset = 0.0
    for eid in eids:
        n = len(mesh.edge_dofs[eid])
        length = mesh.edge_h[eid] * (n - 1)
        spans.append((eid, offset, length))
        offset += length
    total = max(offset, 1e-300)

    vmax = float(np.max(u.values))
    vmin = float(np.min(u.values))
    lo = min(vmin, 0.0)
    hi = max(vmax, 0.0)
    pad = 0.05 * max(hi - lo, 1e-12)
    lo, hi = lo - pad, hi + pad

    px_w = WIDTH - _MARGIN_L - _MARGIN_R
    px_h = HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(s):
        return _MARGIN_L + px_w * s / total

    def sy(v):
        return _MARGIN_T + px_h * (hi - v) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_MARGIN_L}" y="18" font-family="monospace" '
            f'font-size="13">{title}</text>')
    # frame and zero line
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{px_w}" height="{px_h}" '
        f'fill="none" stroke="#cccccc"/>')
    if lo < 0.0 < hi:
        y0 = sy(0.0)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y0:.1f}" x2="{_MARGIN_L + px_w}" '
            f'y2="{y0:.1f}" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    for label, v in ((_fmt(hi), hi), (_fmt(lo), lo)):
        parts.append(
            f'<text x="4" y="{sy(v) + 4:.1f}" font-family="monospace" '
            f'font-size="11">{label}</text>')

    for i, (eid, off, length) in enumerate(spans):
        color = _PALETTE[i % len(_PALETTE)]
        vals = u.edge_values(eid)
        n = len(vals)
        xs = off + mesh.edge_h[eid] * np.arange(n)
        pts = " ".join(
            f"{sx(s):.1f},{sy(v):.1f}" for s, v in zip(xs, vals))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.3" '
            f'points="{pts}"/>')
        xsep = sx(off)
        parts.append(
            f'<line x1="{xsep:.1f}" y1="{_MARGIN_T}" x2="{xsep:.1f}" '
            f'y2="{_MARGIN_T + px_h}" stroke="#eeeeee"/>')
        # alternate label rows so short edges stay readable
        ylab = HEIGHT - _MARGIN_B + (14 if i % 2 == 0 else 26)
        parts.append(
            f'<text x="{xsep + 2:.1f}" y="{ylab}" font-family="monospace" '
            f'font-size="10" fill="{color}">e{eid}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_profile_svg(path, u: GridFunction, title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_profile(u, title))
