"""Self-contained deterministic SVG plots.

Hand-rolled writer: no external references, no timestamps, fixed float
formatting, so identical inputs give identical bytes.  Long trajectories
are decimated with a uniform stride before plotting.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = ["plot_trajectory_projection", "plot_error_series", "render_chart"]

WIDTH, HEIGHT = 720, 540
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 20, 36, 48
MAX_POINTS = 2048

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _decimate(array: np.ndarray) -> np.ndarray:
    if len(array) <= MAX_POINTS:
        return array
    stride = int(math.ceil(len(array) / MAX_POINTS))
    picked = array[::stride]
    if not np.array_equal(picked[-1], array[-1]):
        picked = np.vstack([picked, array[-1:]]) if picked.ndim > 1 else \
            np.append(picked, array[-1])
    return picked


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def render_chart(xs: Sequence[float], ys: Sequence[float], title: str,
                 xlabel: str, ylabel: str) -> str:
    """Render one polyline as a complete SVG document."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) == 0:
        raise ValueError("no samples")
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    inner_w = WIDTH - MARGIN_L - MARGIN_R
    inner_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * inner_w

    def sy(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{inner_w}" '
        f'height="{inner_h}" fill="none" stroke="#333" stroke-width="1"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.1f})">{ylabel}</text>',
    ]
    for tick in _ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + inner_h}" '
                     f'x2="{px:.2f}" y2="{MARGIN_T + inner_h + 5}" '
                     f'stroke="#333"/>')
        parts.append(f'<text x="{px:.2f}" y="{MARGIN_T + inner_h + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{_fmt(tick)}</text>')
    for tick in _ticks(y_lo, y_hi):
        py = sy(tick)
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" '
                     f'x2="{MARGIN_L}" y2="{py:.2f}" stroke="#333"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{py + 3:.2f}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="10">{_fmt(tick)}</text>')

    coords = " ".join(f"{sx(float(xv)):.2f},{sy(float(yv)):.2f}"
                      for xv, yv in zip(xs, ys))
    parts.append(f'<polyline points="{coords}" fill="none" stroke="#1f77b4" '
                 f'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_trajectory_projection(traj, out_path, axes: tuple[str, str] = ("x", "y"),
                               title: str = "") -> None:
    """Orthographic projection of the 3D trace onto a pair of axes."""
    for name in axes:
        if name not in _AXIS_INDEX:
            raise ValueError(f"unknown axis {name!r}; use x, y or z")
    pts = _decimate(traj.positions())
    if len(pts) == 0:
        raise ValueError("no samples")
    i, j = _AXIS_INDEX[axes[0]], _AXIS_INDEX[axes[1]]
    svg = render_chart(pts[:, i], pts[:, j],
                       title or f"trajectory ({axes[0]}-{axes[1]} projection)",
                       axes[0], axes[1])
    with open(out_path, "w") as handle:
        handle.write(svg)


def plot_error_series(traj, out_path, title: str = "") -> None:
    """Path-following error norm against time."""
    table = np.column_stack([traj.times, traj.error_norms])
    table = _decimate(table)
    svg = render_chart(table[:, 0], table[:, 1],
                       title or "path-following error", "t [s]", "|e(t)|")
    with open(out_path, "w") as handle:
        handle.write(svg)
