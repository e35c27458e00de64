"""Minimal deterministic SVG line charts for emitted figures.

Hand-rolled rather than a plotting dependency: output is a plain text SVG
whose bytes depend only on the data, so seeded runs emit identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_WIDTH, _HEIGHT = 720, 360
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 56, 16, 28, 40
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + step / 2, step)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def line_chart(
    series: dict[str, np.ndarray],
    title: str,
    x_label: str = "t",
    y_label: str = "",
    vlines: tuple[int, ...] = (),
    x_start: int = 1,
) -> str:
    """Render named series (equal length, plotted against their index) plus
    optional vertical marker lines; returns the SVG text."""
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    n = max(len(v) for v in ys)
    x_lo, x_hi = x_start, x_start + n - 1
    y_lo = min(float(v.min()) for v in ys)
    y_hi = max(float(v.max()) for v in ys)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / max(x_hi - x_lo, 1) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="16" text-anchor="middle" font-size="13">{title}</text>',
    ]
    for tick in _ticks(y_lo, y_hi):
        y = sy(tick)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_WIDTH - _MARGIN_R}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(f'<text x="{_MARGIN_L - 6}" y="{y + 4:.2f}" text-anchor="end">{_fmt(tick)}</text>')
    for tick in _ticks(x_lo, x_hi):
        x = sx(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T}" x2="{x:.2f}" y2="{_HEIGHT - _MARGIN_B}" '
            f'stroke="#eeeeee" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_HEIGHT - _MARGIN_B + 16}" text-anchor="middle">{_fmt(tick)}</text>'
        )
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333"/>'
    )
    for v in vlines:
        x = sx(float(v))
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T}" x2="{x:.2f}" y2="{_HEIGHT - _MARGIN_B}" '
            f'stroke="#444444" stroke-width="1" stroke-dasharray="4,3"/>'
        )
    for k, (name, v) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{sx(x_start + i):.2f},{sy(val):.2f}" for i, val in enumerate(np.asarray(v, dtype=float)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        parts.append(
            f'<text x="{_WIDTH - _MARGIN_R - 6}" y="{_MARGIN_T + 14 + 13 * k}" text-anchor="end" '
            f'fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH / 2:.1f}" y="{_HEIGHT - 8}" text-anchor="middle">{x_label}</text>'
    )
    if y_label:
        parts.append(
            f'<text x="14" y="{_HEIGHT / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {_HEIGHT / 2:.1f})">{y_label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(path, series, title, **kwargs) -> None:
    Path(path).write_text(line_chart(series, title, **kwargs), encoding="utf-8")
