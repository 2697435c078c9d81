"""Static SVG pictures: phase portraits and stratum maps.

Documents are assembled by hand as SVG 1.1 text.  Every coordinate is
printed with a fixed number of decimals, so equal inputs give byte-equal
files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from . import flow
from .classify import SHORT, axis_distance
from .config import DEFAULT, Tolerances
from .core import Params, solve_cubic, spectrum

TAG_COLORS = {
    "E0": "#000000",
    "W1": "#9ecae1",
    "W2": "#fdae6b",
    "H": "#31a354",
    "F8": "#756bb1",
    "PR": "#de2d26",
    "PC": "#e7298a",
    "U": "#bdbdbd",
}
OUTCOME_COLORS = {"lands": "#3182bd", "homoclinic": "#e6550d", "unresolved": "#969696"}
TAG_NAMES = {v: k for k, v in SHORT.items()}

_HEADER = ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n')
_FONT = 'font-family="sans-serif"'


@dataclass(frozen=True)
class PortraitStyle:
    """Sizes and colours for both kinds of picture.

    ``disk_radius`` is the half-width of the portrait window in units of the
    largest root modulus (at least the parameter scale).
    """

    width: int = 600
    height: int = 600
    disk_radius: float = 1.8
    trajectory_seeds: int = 0
    tag_colors: dict = field(default_factory=lambda: dict(TAG_COLORS))
    outcome_colors: dict = field(default_factory=lambda: dict(OUTCOME_COLORS))
    stroke: float = 1.5
    legend_width: int = 170

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.disk_radius <= 0 or self.legend_width < 0:
            raise ValueError("style dimensions must be positive")
        if self.trajectory_seeds < 0:
            raise ValueError("trajectory_seeds must be non-negative")
        missing = set(TAG_COLORS) - set(self.tag_colors)
        missing |= set(OUTCOME_COLORS) - set(self.outcome_colors)
        if missing:
            raise ValueError(f"colour table lacks {sorted(missing)}")


def _f(x: float) -> str:
    return f"{x:.2f}"


class _View:
    def __init__(self, half: float, size: float, x0: float = 0.0):
        self.half, self.size, self.x0 = half, size, x0

    def __call__(self, z: complex):
        k = self.size / (2 * self.half)
        return self.x0 + (z.real + self.half) * k, (self.half - z.imag) * k


def _polylines(z: np.ndarray, view: _View, clip: float) -> list[str]:
    """Split a path into pieces inside the (slightly enlarged) window."""
    def inside(w):
        return abs(w.real) <= clip and abs(w.imag) <= clip

    def edge(a, b):
        # point where the segment a (inside) -> b (outside) leaves the box
        lo, hi = 0.0, 1.0
        for _ in range(50):
            m = 0.5 * (lo + hi)
            lo, hi = (m, hi) if inside(a + m * (b - a)) else (lo, m)
        return a + lo * (b - a)

    pieces, cur = [], []
    prev = None
    for w in z:
        w = complex(w)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            w = None
        if w is not None and inside(w):
            if not cur and prev is not None:
                cur.append(view(edge(w, prev)))
            cur.append(view(w))
        elif cur:
            if w is not None:
                cur.append(view(edge(prev, w)))
            pieces.append(cur)
            cur = []
        prev = w
    if cur:
        pieces.append(cur)
    return [" ".join(f"{_f(x)},{_f(y)}" for x, y in pc) for pc in pieces if len(pc) > 1]


def _legend(items, x: float, y: float) -> list[str]:
    out = []
    for k, (label, color, kind) in enumerate(items):
        yy = y + 20 * k
        if kind == "hatch":
            out.append(f'<rect x="{_f(x)}" y="{_f(yy - 10)}" width="14" height="14" '
                       f'fill="url(#hatch)" stroke="#555555"/>')
        elif kind == "line":
            out.append(f'<line x1="{_f(x)}" y1="{_f(yy - 3)}" x2="{_f(x + 14)}" y2="{_f(yy - 3)}" '
                       f'stroke="{color}" stroke-width="3"/>')
        else:
            out.append(f'<rect x="{_f(x)}" y="{_f(yy - 10)}" width="14" height="14" '
                       f'fill="{color}" stroke="#555555"/>')
        out.append(f'<text x="{_f(x + 20)}" y="{_f(yy + 2)}" font-size="12" {_FONT}>'
                   f'{escape(label)}</text>')
    return out


def _hatch_def(color: str) -> str:
    return ('<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6">'
            f'<rect width="6" height="6" fill="{color}"/>'
            '<path d="M0,6 L6,0" stroke="#000000" stroke-width="1"/></pattern></defs>')


def portrait_svg(p: Params, traces=None, trajectories=(), style: PortraitStyle = PortraitStyle(),
                 tol: Tolerances = DEFAULT) -> str:
    """Phase portrait with roots, the four separatrices and quadrant labels.

    ``traces`` defaults to :func:`flow.trace_separatrices`; ``trajectories``
    are extra :class:`flow.Trajectory` objects drawn thin.  With
    ``style.trajectory_seeds > 0`` that many orbits are added from seeds on
    a circle of half the window size.
    """
    p = Params(*p)
    if traces is None:
        traces = flow.trace_separatrices(p, tol=tol)
    roots = solve_cubic(p, tol)
    lam = spectrum(p, roots)
    half = style.disk_radius * max(p.scale, max(abs(z) for z in roots.roots), 1e-12)
    size = min(style.width, style.height)
    view = _View(half, size)
    clip = 1.5 * half
    W = size + style.legend_width
    out = [_HEADER.format(w=W, h=size),
           f'<rect x="0" y="0" width="{W}" height="{size}" fill="#ffffff"/>',
           f'<g clip-path="url(#frame)"><defs><clipPath id="frame">'
           f'<rect x="0" y="0" width="{size}" height="{size}"/></clipPath></defs>']
    # axes
    cx, cy = view(0j)
    out.append(f'<line x1="0" y1="{_f(cy)}" x2="{size}" y2="{_f(cy)}" stroke="#e0e0e0"/>')
    out.append(f'<line x1="{_f(cx)}" y1="0" x2="{_f(cx)}" y2="{size}" stroke="#e0e0e0"/>')

    extra = list(trajectories)
    if style.trajectory_seeds:
        for k in range(style.trajectory_seeds):
            z0 = 0.5 * half * complex(math.cos(2 * math.pi * (k + 0.5) / style.trajectory_seeds),
                                      math.sin(2 * math.pi * (k + 0.5) / style.trajectory_seeds))
            if any(abs(z0 - r) < 1e-9 for r in roots.roots):
                continue
            for d in ("forward", "backward"):
                extra.append(flow.integrate(p, z0, d, tol=tol))
    for tr in extra:
        for pts in _polylines(tr.z, view, clip):
            out.append(f'<polyline class="orbit" points="{pts}" fill="none" '
                       f'stroke="#bbbbbb" stroke-width="0.8"/>')

    for st in traces:
        color = style.outcome_colors[st.outcome]
        width = 2 * style.stroke if st.outcome == "homoclinic" else style.stroke
        if st.trajectory is None:
            continue
        for pts in _polylines(st.trajectory.z, view, clip):
            out.append(f'<polyline class="separatrix {st.outcome} idx{st.index}" '
                       f'points="{pts}" fill="none" stroke="{color}" stroke-width="{_f(width)}"/>')
    out.append("</g>")

    for j in range(4):
        ang = (j + 0.5) * math.pi / 2
        x, y = view(0.85 * half * complex(math.cos(ang), math.sin(ang)))
        out.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="16" text-anchor="middle" '
                   f'{_FONT} fill="#555555">{j + 1}</text>')

    double = roots.double_index() if not roots.distinct else None
    drawn = set()
    for i, z in enumerate(roots.roots):
        if z in drawn:  # one marker per multiple root
            continue
        drawn.add(z)
        x, y = view(complex(z))
        if double is not None and i == double or lam[i] == 0:
            out.append(f'<rect class="root parabolic" x="{_f(x - 5)}" y="{_f(y - 5)}" '
                       f'width="10" height="10" fill="#000000"/>')
        elif axis_distance(lam[i]) <= tol.axis:
            out.append(f'<path class="root center" d="M{_f(x - 6)},{_f(y)} L{_f(x)},{_f(y - 6)} '
                       f'L{_f(x + 6)},{_f(y)} L{_f(x)},{_f(y + 6)} Z" fill="#ffffff" '
                       f'stroke="#000000" stroke-width="1.5"/>')
        elif lam[i].real < 0:
            out.append(f'<circle class="root attracting" cx="{_f(x)}" cy="{_f(y)}" r="5" fill="#000000"/>')
        else:
            out.append(f'<circle class="root repelling" cx="{_f(x)}" cy="{_f(y)}" r="5" '
                       f'fill="#ffffff" stroke="#000000" stroke-width="1.5"/>')

    items = [("lands", style.outcome_colors["lands"], "line"),
             ("homoclinic loop", style.outcome_colors["homoclinic"], "line"),
             ("unresolved", style.outcome_colors["unresolved"], "line")]
    out += _legend(items, size + 12, 30)
    x0 = size + 12
    y0 = 30 + 20 * len(items) + 10
    lines = [f"e1 = {p.e1.real:.4g}{p.e1.imag:+.4g}i", f"e0 = {p.e0.real:.4g}{p.e0.imag:+.4g}i",
             "filled: attracting", "open: repelling", "diamond: centre", "square: parabolic"]
    for k, s in enumerate(lines):
        out.append(f'<text x="{_f(x0)}" y="{_f(y0 + 16 * k)}" font-size="11" {_FONT}>{escape(s)}</text>')
    out.append("</svg>\n")
    return "\n".join(out)


def _cell_color(tag: str, style: PortraitStyle) -> str:
    return "url(#hatch)" if tag == "U" else style.tag_colors[tag]


def slice_svg(grid, style: PortraitStyle = PortraitStyle()) -> str:
    """Stratum map: one coloured cell per grid point, runs merged along rows.

    Row 0 of the grid (smallest ``Im e0``) is drawn at the bottom.
    Unresolved cells are hatched.
    """
    spec = grid.spec
    tags = grid.tag_array()
    size = min(style.width, style.height)
    cw, ch = size / spec.nx, size / spec.ny
    W = size + style.legend_width
    out = [_HEADER.format(w=W, h=size + 30),
           f'<rect x="0" y="0" width="{W}" height="{size + 30}" fill="#ffffff"/>',
           _hatch_def(style.tag_colors["U"])]
    for r in range(spec.ny):
        y = size - (r + 1) * ch
        c = 0
        while c < spec.nx:
            t = tags[r, c]
            e = c
            while e + 1 < spec.nx and tags[r, e + 1] == t:
                e += 1
            out.append(f'<rect class="cell {t}" x="{_f(c * cw)}" y="{_f(y)}" '
                       f'width="{_f((e - c + 1) * cw)}" height="{_f(ch)}" fill="{_cell_color(t, style)}"/>')
            c = e + 1
    present = [t for t in TAG_COLORS if t in set(tags.ravel())]
    items = [(f"{t}  {TAG_NAMES.get(t, t)}", style.tag_colors[t], "hatch" if t == "U" else "box")
             for t in present]
    out += _legend(items, size + 12, 30)
    b = spec.bounds
    out.append(f'<text x="2" y="{_f(size + 20)}" font-size="11" {_FONT}>'
               f'{escape(f"Re e0 [{b[0]:.4g}, {b[1]:.4g}]  Im e0 [{b[2]:.4g}, {b[3]:.4g}]  e1 fixed: {spec.fixed.real:.4g}{spec.fixed.imag:+.4g}i ({spec.chart})")}'
               '</text>')
    out.append("</svg>\n")
    return "\n".join(out)
