"""SVG drawing of a finite piece of the derived periodic framework."""

from __future__ import annotations

import random
from fractions import Fraction
from xml.sax.saxutils import escape

from .core import OrbitGraph, derive
from .linear import Placement, random_placement


def parse_window(spec: str) -> tuple[int, int]:
    """``"WxH"`` -> (W, H), both positive."""
    try:
        w, h = (int(x) for x in spec.lower().split("x"))
    except ValueError:
        raise ValueError(f"bad window {spec!r}, expected WxH") from None
    if w < 1 or h < 1:
        raise ValueError(f"bad window {spec!r}, sizes must be positive")
    return w, h


def window_cells(arity: int, w: int, h: int) -> list[tuple]:
    if arity == 1:
        if h != 1:
            raise ValueError("one-dimensional gains take a window of height 1")
        return [(i,) for i in range(w)]
    return [(i, j) for i in range(w) for j in range(h)]


def placement_from_document(doc, g: OrbitGraph, seed: int = 0) -> Placement:
    """Use ``doc["placement"]`` when present, otherwise a seeded random one."""
    pl = doc.get("placement") if isinstance(doc, dict) else None
    if pl is None:
        return random_placement(g.n, g.model, random.Random(seed))
    pos = tuple(tuple(Fraction(str(x)) for x in p) for p in pl["positions"])
    lat = tuple(tuple(Fraction(str(x)) for x in row) for row in pl["lattice"])
    if len(pos) != g.n:
        raise ValueError("placement has the wrong number of positions")
    return Placement(pos, lat, None)


def _point(placement, v, z):
    p = placement.positions[v]
    s = placement.translate(z)
    x = float(p[0] + s[0])
    y = float(p[1] + s[1]) if len(p) > 1 else 0.0
    return x, y


def render(g: OrbitGraph, placement: Placement, w: int, h: int, size: int = 480) -> str:
    cells = window_cells(g.arity, w, h)
    frag = derive(g, cells)
    pts = {(v, z): _point(placement, v, z) for v, z in frag.vertices}
    corners = [(0.0, 0.0)]
    lat = [tuple(float(c) for c in row) + (0.0,) * (2 - len(row)) for row in placement.lattice]
    corners.append(lat[0][:2])
    if len(lat) > 1:
        corners += [(lat[0][0] + lat[1][0], lat[0][1] + lat[1][1]), lat[1][:2]]
    xs = [p[0] for p in pts.values()] + [c[0] for c in corners]
    ys = [p[1] for p in pts.values()] + [c[1] for c in corners]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 20
    scale = (size - 2 * pad) / span

    def tr(p):
        return pad + (p[0] - x0) * scale, size - pad - (p[1] - y0) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<title>{escape(f'{g.n} orbit vertices, window {w}x{h}')}</title>",
    ]
    cell = " ".join("%.3f,%.3f" % tr(c) for c in corners)
    out.append(f'<polygon class="cell" points="{cell}" fill="none" stroke="#999" stroke-dasharray="4 3"/>')
    for k, z, a, b in frag.edges:
        (xa, ya), (xb, yb) = tr(pts[a]), tr(pts[b])
        out.append(
            f'<line class="edge" data-edge="{k}" x1="{xa:.3f}" y1="{ya:.3f}" '
            f'x2="{xb:.3f}" y2="{yb:.3f}" stroke="#246" stroke-width="1.5"/>'
        )
    for (v, z), p in sorted(pts.items()):
        x, y = tr(p)
        out.append(
            f'<circle class="vertex" data-vertex="{v}" data-cell="{",".join(map(str, z))}" '
            f'cx="{x:.3f}" cy="{y:.3f}" r="4" fill="#c33"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
