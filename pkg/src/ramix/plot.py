"""Static SVG line plots of spectra.

Output is plain text built from fixed-precision numbers, so the same input
always produces the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .io_utils import atomic_write_text

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


@dataclass
class PlotSpec:
    series: list  # Spectrum objects
    labels: list
    output: str | None = None
    width: int = 800
    height: int = 450
    title: str = ""

    def __post_init__(self):
        if not self.series:
            raise ValueError("plot needs at least one series")
        if len(self.labels) != len(self.series):
            raise ValueError("one label per series required")
        grid = self.series[0].grid
        if any(s.grid != grid for s in self.series):
            raise ValueError("all plotted series must share one grid")
        if self.width < 200 or self.height < 150:
            raise ValueError("plot must be at least 200x150 px")


def _ticks(lo, hi, n=6):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(first, hi + step * 1e-9, step)]


def _num(v):
    return f"{v:.2f}".rstrip("0").rstrip(".") if abs(v) >= 1e-12 else "0"


def render_svg(spec: PlotSpec) -> str:
    W, H = spec.width, spec.height
    left, right, top, bottom = 70, 20, 30 if spec.title else 15, 55
    pw, ph = W - left - right, H - top - bottom
    x = spec.series[0].grid.points()
    ys = np.stack([s.intensities for s in spec.series])
    x0, x1 = float(x[0]), float(x[-1])
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(spec.title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        px = sx(t)
        out.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{top + ph + 18}" text-anchor="middle">{_num(t)}</text>')
    for t in _ticks(y0, y1):
        py = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end">{_num(t)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">Raman shift (cm⁻¹)</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {top + ph / 2:.1f})">'
        "Intensity (a.u.)</text>"
    )
    for i, y in enumerate(ys):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        colour = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
    lx, ly = left + pw - 170, top + 10
    for i, label in enumerate(spec.labels):
        colour = PALETTE[i % len(PALETTE)]
        yy = ly + 16 * i
        out.append(f'<line x1="{lx}" y1="{yy + 6}" x2="{lx + 20}" y2="{yy + 6}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{yy + 10}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(spec: PlotSpec, path=None) -> str:
    path = path or spec.output
    if path is None:
        raise ValueError("no output path given")
    atomic_write_text(path, render_svg(spec))
    return path
