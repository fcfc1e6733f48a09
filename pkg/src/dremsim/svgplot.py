"""Minimal static SVG line charts for run figures.

Hand-rolled rather than pulled from a plotting stack so that figure output
is deterministic and the package stays dependency-light; these are plain
polyline charts, nothing interactive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
)


@dataclass(frozen=True)
class Panel:
    """One chart: labelled traces over a shared x grid."""

    title: str
    xlabel: str
    ylabel: str
    x: np.ndarray
    traces: list[tuple[str, np.ndarray]]
    log_y: bool = False


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def render_panel(panel: Panel, width: int = 880, height: int = 320,
                 y_offset: int = 0) -> tuple[list[str], int]:
    """Render one panel into SVG elements; returns (elements, height used)."""
    ml, mr, mt, mb = 70, 160, 34, 42
    px0, px1 = ml, width - mr
    py0, py1 = y_offset + mt, y_offset + height - mb

    x = np.asarray(panel.x, dtype=float)
    finite_ys = []
    traces = []
    for label, y in panel.traces:
        y = np.asarray(y, dtype=float)
        if panel.log_y:
            with np.errstate(divide="ignore", invalid="ignore"):
                y = np.where(y > 0, np.log10(np.maximum(y, 1e-300)), np.nan)
        traces.append((label, y))
        vals = y[np.isfinite(y)]
        if vals.size:
            finite_ys.append(vals)
    if finite_ys:
        all_y = np.concatenate(finite_ys)
        ylo, yhi = float(all_y.min()), float(all_y.max())
    else:
        ylo, yhi = 0.0, 1.0
    if yhi - ylo < 1e-12:
        ylo -= 0.5
        yhi += 0.5
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad
    xlo, xhi = float(x[0]), float(x[-1])
    if xhi - xlo < 1e-12:
        xhi = xlo + 1.0

    def sx(v: float) -> float:
        return px0 + (v - xlo) / (xhi - xlo) * (px1 - px0)

    def sy(v: float) -> float:
        return py1 - (v - ylo) / (yhi - ylo) * (py1 - py0)

    el = [
        f'<rect x="{px0}" y="{py0}" width="{px1 - px0}" height="{py1 - py0}" '
        'fill="none" stroke="#222222" stroke-width="1"/>',
        f'<text x="{(px0 + px1) / 2:.1f}" y="{py0 - 12}" text-anchor="middle" '
        f'font-size="14" font-weight="bold">{panel.title}</text>',
        f'<text x="{(px0 + px1) / 2:.1f}" y="{py1 + 32}" text-anchor="middle" '
        f'font-size="12">{panel.xlabel}</text>',
        f'<text x="{px0 - 52}" y="{(py0 + py1) / 2:.1f}" text-anchor="middle" '
        f'font-size="12" transform="rotate(-90 {px0 - 52} {(py0 + py1) / 2:.1f})">'
        f'{panel.ylabel}</text>',
    ]
    for tv in _ticks(xlo, xhi):
        el.append(
            f'<line x1="{sx(tv):.2f}" y1="{py1}" x2="{sx(tv):.2f}" y2="{py1 + 5}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        el.append(
            f'<text x="{sx(tv):.2f}" y="{py1 + 18}" text-anchor="middle" '
            f'font-size="11">{_fmt(tv)}</text>'
        )
    for tv in _ticks(ylo, yhi):
        label = f"1e{_fmt(tv)}" if panel.log_y else _fmt(tv)
        el.append(
            f'<line x1="{px0 - 5}" y1="{sy(tv):.2f}" x2="{px0}" y2="{sy(tv):.2f}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        el.append(
            f'<text x="{px0 - 8}" y="{sy(tv) + 4:.2f}" text-anchor="end" '
            f'font-size="11">{label}</text>'
        )
    for i, (label, y) in enumerate(traces):
        color = PALETTE[i % len(PALETTE)]
        pts: list[str] = []
        segs: list[list[str]] = []
        for xv, yv in zip(x, y):
            if math.isfinite(yv):
                pts.append(f"{sx(xv):.2f},{sy(yv):.2f}")
            elif pts:
                segs.append(pts)
                pts = []
        if pts:
            segs.append(pts)
        for seg in segs:
            if len(seg) > 1:
                el.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.3"/>'
                )
        ly = py0 + 16 * i + 8
        el.append(
            f'<line x1="{px1 + 10}" y1="{ly}" x2="{px1 + 34}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        el.append(
            f'<text x="{px1 + 40}" y="{ly + 4}" font-size="11">{label}</text>'
        )
    return el, height


def render_figure(panels: list[Panel], width: int = 880) -> str:
    """Stack panels vertically into one standalone SVG document."""
    elements: list[str] = []
    y = 0
    for panel in panels:
        el, used = render_panel(panel, width=width, y_offset=y)
        elements.extend(el)
        y += used
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{y}" '
        f'viewBox="0 0 {width} {y}" font-family="Helvetica, Arial, sans-serif">'
        f'<rect width="{width}" height="{y}" fill="#ffffff"/>'
    )
    return head + "".join(elements) + "</svg>\n"
