"""Static, byte-deterministic SVG line plots of CSV columns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ColumnMissing, NonFiniteData
from .io import atomic_write, read_csv

__all__ = ["PlotSpec", "nice_ticks", "render_svg", "emit_svg_plot"]

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 20, 20, 52
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


@dataclass(frozen=True)
class PlotSpec:
    """``series`` holds (x column, y column) pairs drawn as one polyline each."""

    series: tuple[tuple[str, str], ...]
    x_label: str = ""
    y_label: str = ""
    output: str = "plot.svg"
    markers: tuple[float, ...] = field(default=())


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [round(k * step, 12) for k in range(first, last + 1)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.6g}"


def render_svg(spec: PlotSpec, header: Sequence[str], rows: Sequence[dict]) -> str:
    data = []
    for xc, yc in spec.series:
        for c in (xc, yc):
            if c not in header:
                raise ColumnMissing(f"column {c!r} not in CSV (have {', '.join(header)})")
        if not rows:
            raise ColumnMissing(f"series ({xc}, {yc}) is empty")
        xs, ys = [], []
        for i, row in enumerate(rows):
            x, y = row[xc], row[yc]
            if not (isinstance(x, (int, float)) and isinstance(y, (int, float))) or not (
                math.isfinite(x) and math.isfinite(y)
            ):
                raise NonFiniteData(f"row {i}: ({xc}, {yc}) = ({x!r}, {y!r})")
            xs.append(float(x))
            ys.append(float(y))
        data.append((xs, ys))

    all_x = [v for xs, _ in data for v in xs] + [m for m in spec.markers if math.isfinite(m)]
    all_y = [v for _, ys in data for v in ys]
    xt = nice_ticks(min(all_x), max(all_x))
    yt = nice_ticks(min(all_y), max(all_y))
    x0, x1 = min(xt[0], min(all_x)), max(xt[-1], max(all_x))
    y0, y1 = min(yt[0], min(all_y)), max(yt[-1], max(all_y))
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return MARGIN_T + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    bottom = MARGIN_T + ph
    for t in xt:
        X = _fmt(px(t))
        out.append(f'<line x1="{X}" y1="{bottom}" x2="{X}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{bottom + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in yt:
        Y = _fmt(py(t))
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{Y}" x2="{MARGIN_L}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_label(t)}</text>')
    for m in spec.markers:
        X = _fmt(px(m))
        out.append(
            f'<line class="marker" x1="{X}" y1="{MARGIN_T}" x2="{X}" y2="{bottom}" '
            f'stroke="gray" stroke-dasharray="4 3"/>'
        )
    for k, (xs, ys) in enumerate(data):
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        colour = COLOURS[k % len(COLOURS)]
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
    if spec.x_label:
        out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{_escape(spec.x_label)}</text>')
    if spec.y_label:
        cy = MARGIN_T + ph / 2
        out.append(
            f'<text x="16" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 16 {cy:.1f})">'
            f"{_escape(spec.y_label)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_svg_plot(spec: PlotSpec, csv_path, out_dir=None) -> Path:
    header, rows = read_csv(csv_path)
    text = render_svg(spec, header, rows)
    target = Path(out_dir or Path(csv_path).parent) / spec.output
    return atomic_write(target, text)
