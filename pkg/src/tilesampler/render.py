"""Deterministic SVG rendering of tilings and six-vertex configurations.

Pure string assembly with fixed float formatting: the same state always
produces byte-identical output.  Dominoes are colored by orientation and
sublattice parity (four classes), lozenges by orientation, six-vertex states
draw occupied edges bold on a thin grid.
"""

from __future__ import annotations

import numpy as np

from .lattice import Tiling, dominoes_from_tiling
from .lozenge import LozengeTiling, lozenges_from_tiling
from .sixvertex import SixVertexConfig

_SQ3_2 = np.sqrt(3.0) / 2.0

DOMINO_COLORS = {
    ("h", 0): "#d84b4b",
    ("h", 1): "#f2c14e",
    ("v", 0): "#2f6fb0",
    ("v", 1): "#59a66f",
}
LOZENGE_COLORS = {"a": "#d84b4b", "b": "#2f6fb0", "c": "#f2c14e"}


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" '
        f'height="{height:.1f}" viewBox="0 0 {width:.1f} {height:.1f}">'
    )
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def render_domino(t: Tiling, scale: float = 20.0) -> str:
    """One rect per domino; class = orientation x parity of the left/top face."""
    n = t.domain.n
    body = [f'<rect width="{n * scale:.1f}" height="{n * scale:.1f}" fill="white"/>']
    for a, b in dominoes_from_tiling(t):
        (r1, c1), (r2, c2) = a, b
        horizontal = r1 == r2
        key = ("h", (r1 + min(c1, c2)) % 2) if horizontal else ("v", (min(r1, r2) + c1) % 2)
        color = DOMINO_COLORS[key]
        r0, c0 = min(r1, r2), min(c1, c2)
        w = 2 * scale if horizontal else scale
        h = scale if horizontal else 2 * scale
        body.append(
            f'<rect x="{c0 * scale:.1f}" y="{r0 * scale:.1f}" width="{w:.1f}" '
            f'height="{h:.1f}" fill="{color}" stroke="black" stroke-width="0.5"/>'
        )
    return _svg(n * scale, n * scale, body)


def _loz_xy(x: int, y: int, scale: float, sy: int) -> tuple[float, float]:
    # axial -> cartesian, flipped so larger y draws upward
    px = (x + 0.5 * y) * scale
    py = (sy - y) * _SQ3_2 * scale
    return px, py


def render_lozenge(t: LozengeTiling, scale: float = 20.0) -> str:
    """One rhombus per lozenge, shaded by which edge family it crosses."""
    sx, sy = t.domain.size
    width = (sx + 0.5 * sy) * scale
    height = sy * _SQ3_2 * scale
    body = [f'<rect width="{width:.1f}" height="{height:.1f}" fill="white"/>']
    from .lozenge import shared_edge

    for up, down in lozenges_from_tiling(t):
        kind, _, _ = shared_edge(up, down)
        _, ux, uy = up
        _, dx, dy = down
        up_corners = [(ux, uy), (ux + 1, uy), (ux, uy + 1)]
        down_corners = [(dx + 1, dy), (dx, dy + 1), (dx + 1, dy + 1)]
        quad = [p for p in up_corners + down_corners]
        shared = [p for p in up_corners if p in down_corners]
        outline = [p for p in quad if p not in shared]
        # rhombus = two non-shared corners plus the two shared, interleaved
        a, b = shared
        p, q = outline
        pts = [p, a, q, b]
        path = " ".join(
            f"{c[0]:.1f},{c[1]:.1f}"
            for c in (_loz_xy(x, y, scale, sy) for x, y in pts)
        )
        body.append(
            f'<polygon points="{path}" fill="{LOZENGE_COLORS[kind]}" '
            f'stroke="black" stroke-width="0.5"/>'
        )
    return _svg(width, height, body)


def render_sixvertex(cfg: SixVertexConfig, scale: float = 24.0) -> str:
    """Thin grid with occupied edges drawn bold, boundary stubs included."""
    n = cfg.n
    pad = scale
    width = height = (n - 1) * scale + 2 * pad
    body = [f'<rect width="{width:.1f}" height="{height:.1f}" fill="white"/>']

    def vx(r: int, c: int) -> tuple[float, float]:
        return pad + c * scale, pad + r * scale

    def line(p, q, bold: bool):
        w = 2.5 if bold else 0.4
        color = "black" if bold else "#999999"
        body.append(
            f'<line x1="{p[0]:.1f}" y1="{p[1]:.1f}" x2="{q[0]:.1f}" y2="{q[1]:.1f}" '
            f'stroke="{color}" stroke-width="{w}"/>'
        )

    half = 0.5 * scale
    for r in range(n):
        for c in range(n + 1):
            occ = bool(cfg.h_edges[r, c])
            if c == 0:
                p = (pad - half, pad + r * scale)
                q = vx(r, 0)
            elif c == n:
                p = vx(r, n - 1)
                q = (pad + (n - 1) * scale + half, pad + r * scale)
            else:
                p, q = vx(r, c - 1), vx(r, c)
            line(p, q, occ)
    for r in range(n + 1):
        for c in range(n):
            occ = bool(cfg.v_edges[r, c])
            if r == 0:
                p = (pad + c * scale, pad - half)
                q = vx(0, c)
            elif r == n:
                p = vx(n - 1, c)
                q = (pad + c * scale, pad + (n - 1) * scale + half)
            else:
                p, q = vx(r - 1, c), vx(r, c)
            line(p, q, occ)
    return _svg(width, height, body)


def render(state, scale: float = 20.0) -> str:
    """Dispatch on the state type; deterministic vector image as a string."""
    if isinstance(state, Tiling):
        return render_domino(state, scale)
    if isinstance(state, LozengeTiling):
        return render_lozenge(state, scale)
    if isinstance(state, SixVertexConfig):
        return render_sixvertex(state, scale)
    raise TypeError(f"cannot render {type(state)!r}")
