"""Deterministic SVG rendering in the affine chart z = 1."""

from __future__ import annotations

import numpy as np

from .topology import CurveTopology
from .tracking import DivisorPath

WINDOW = (-2.0, 3.0, -2.5, 2.5)  # xmin, xmax, ymin, ymax
SIZE = 500
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22"]


def _pieces(P: np.ndarray, window=WINDOW, jump: float = 1.0) -> list[np.ndarray]:
    """Split a sphere polyline into affine pieces inside the window."""
    xmin, xmax, ymin, ymax = window
    out, cur = [], []
    prev = None
    for p in P:
        if abs(p[2]) < 1e-9:
            q = None
        else:
            q = p[:2] / p[2]
            if not (xmin <= q[0] <= xmax and ymin <= q[1] <= ymax):
                q = None
        if q is None or (prev is not None and np.hypot(*(q - prev)) > jump):
            if len(cur) > 1:
                out.append(np.array(cur))
            cur = []
        if q is not None:
            cur.append(q)
        prev = q
    if len(cur) > 1:
        out.append(np.array(cur))
    return out


def _xy(q, window=WINDOW) -> tuple[float, float]:
    xmin, xmax, ymin, ymax = window
    sx = SIZE / (xmax - xmin)
    sy = SIZE / (ymax - ymin)
    return (q[0] - xmin) * sx, (ymax - q[1]) * sy


def _polyline(piece: np.ndarray, color: str, width: float, dash: str = "") -> str:
    pts = " ".join("{:.2f},{:.2f}".format(*_xy(q)) for q in piece)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'


def _arrow(piece: np.ndarray, color: str) -> str:
    i = len(piece) // 2
    a, b = np.array(_xy(piece[i])), np.array(_xy(piece[min(i + 1, len(piece) - 1)]))
    d = b - a
    n = np.hypot(*d)
    if n == 0:
        return ""
    d /= n
    perp = np.array([-d[1], d[0]])
    tip = a + 6 * d
    left, right = a - 4 * d + 4 * perp, a - 4 * d - 4 * perp
    pts = " ".join("{:.2f},{:.2f}".format(*p) for p in (tip, left, right))
    return f'<polygon points="{pts}" fill="{color}"/>'


def render_svg(path: DivisorPath | None, topo: CurveTopology) -> str:
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    ox, oy = _xy((0.0, 0.0))
    lines.append(f'<line x1="0" y1="{oy:.2f}" x2="{SIZE}" y2="{oy:.2f}" stroke="#dddddd"/>')
    lines.append(f'<line x1="{ox:.2f}" y1="0" x2="{ox:.2f}" y2="{SIZE}" stroke="#dddddd"/>')
    for comp in topo.components:
        closed = np.vstack([comp.vertices, comp.closing_target[None, :]])
        for piece in _pieces(closed):
            lines.append(_polyline(piece, "#333333", 1.5))
            if comp.orientation and len(piece) > 10:
                # marching direction times the orientation flag
                lines.append(_arrow(piece if comp.orientation > 0 else piece[::-1], "#333333"))
    if path is not None:
        for n, j in enumerate(path.real):
            color = COLORS[n % len(COLORS)]
            P = np.real(path.points[:, j, :])
            for piece in _pieces(P, jump=0.5):
                lines.append(_polyline(piece, color, 2.5, "6,3"))
                if len(piece) > 4:
                    lines.append(_arrow(piece, color))
            if abs(P[0, 2]) > 1e-9:
                x, y = _xy(P[0, :2] / P[0, 2])
                lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}" stroke="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def export_plot(path: DivisorPath | None, topo: CurveTopology, file) -> None:
    with open(file, "w") as fh:
        fh.write(render_svg(path, topo))
