"""Stratum maps of two-dimensional slices of parameter space.

A slice fixes ``e1`` and lets ``e0`` run over a rectangle of a regular
grid.  Cells are classified with the coarse axis band so that the
codimension-one walls show up as one or two cells wide.  Also here: the
discriminant torus knot and the figure-eight segments of the ``|e1| = 1``
chart.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import SHORT, Stratum, classify
from .config import DEFAULT, Tolerances
from .core import Params, discriminant, rotate_params, solve_cubic, spectrum

CSV_COLUMNS = ("re_e1", "im_e1", "re_e0", "im_e0", "tag", "index1", "index2", "cert_digest")
FIGURE_EIGHT_BOUND = math.sqrt(2.0 / 27.0)


def _cstr(z: complex) -> str:
    z = complex(z)
    return f"{z.real:g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):g}i"


@dataclass(frozen=True)
class SliceSpec:
    """Grid over the ``e0`` plane at fixed ``e1``.

    ``chart`` is ``"e1_fixed"`` (``e1 = fixed``), ``"e1_unit"`` (``e1`` is
    ``fixed`` scaled to modulus one) or ``"sphere"`` (``e1`` along ``fixed``
    with ``|e1|**2 + |e0|**2 = 1``; cells with ``|e0| > 1`` stay unresolved).
    ``bounds`` is ``(re_min, re_max, im_min, im_max)`` for ``e0``.
    """

    fixed: complex
    nx: int = 201
    ny: int = 201
    bounds: tuple = (-1.0, 1.0, -1.0, 1.0)
    chart: str = "e1_fixed"
    band: float = 1e-3

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("a slice needs at least 2x2 cells")
        if len(self.bounds) != 4 or not all(math.isfinite(b) for b in self.bounds):
            raise ValueError("bounds must be four finite numbers")
        if self.chart not in ("e1_fixed", "e1_unit", "sphere"):
            raise ValueError(f"unknown chart {self.chart!r}")
        if self.chart != "e1_fixed" and complex(self.fixed) == 0:
            raise ValueError("the e1 direction must be non-zero")
        if not self.band > 0:
            raise ValueError("band must be positive")

    @classmethod
    def around(cls, e1: complex, e0: complex, half_width: float, n: int = 201, **kw) -> "SliceSpec":
        e0 = complex(e0)
        return cls(complex(e1), n, n, (e0.real - half_width, e0.real + half_width,
                                        e0.imag - half_width, e0.imag + half_width), **kw)

    def axes(self):
        x = np.linspace(self.bounds[0], self.bounds[1], self.nx)
        y = np.linspace(self.bounds[2], self.bounds[3], self.ny)
        return x, y

    def params_at(self, e0: complex) -> Params | None:
        f = complex(self.fixed)
        if self.chart == "e1_fixed":
            return Params(f, e0)
        if self.chart == "e1_unit":
            return Params(f / abs(f), e0)
        r2 = 1.0 - abs(e0) ** 2
        if r2 < 0:
            return None
        return Params(math.sqrt(r2) * f / abs(f), e0)

    def filename(self) -> str:
        return f"{self.chart}_e1={_cstr(self.fixed)}_{self.nx}x{self.ny}.csv"


@dataclass
class StratumGrid:
    """Row-major (``e0`` imaginary part slowest) classified cells."""

    spec: SliceSpec
    params: list
    strata: list
    digests: list
    tolerances: dict = field(default_factory=dict)

    def tag_array(self) -> np.ndarray:
        """``ny x nx`` array of short tags."""
        return np.array([s.short for s in self.strata], dtype=object).reshape(self.spec.ny, self.spec.nx)

    def label_array(self) -> np.ndarray:
        """Short tags with their indices, e.g. ``H1`` or ``PR41``."""
        lab = [s.short + "".join(map(str, s.indices)) for s in self.strata]
        return np.array(lab, dtype=object).reshape(self.spec.ny, self.spec.nx)

    def rows(self):
        for p, s, d in zip(self.params, self.strata, self.digests):
            i1 = s.indices[0] if len(s.indices) > 0 else ""
            i2 = s.indices[1] if len(s.indices) > 1 else ""
            yield (repr(p.e1.real), repr(p.e1.imag), repr(p.e0.real), repr(p.e0.imag),
                   s.short, i1, i2, d)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows():
            w.writerow(r)
        return buf.getvalue() if fh is None else ""

    def csv_digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode()).hexdigest()

    def counts(self) -> dict:
        out = {}
        for s in self.strata:
            out[s.short] = out.get(s.short, 0) + 1
        return dict(sorted(out.items()))


def _classify_cell(args):
    p, tol = args
    if p is None:
        return Stratum("Unresolved", diagnostic="outside the chart"), "-"
    try:
        st, cert = classify(p, tol)
        return st, cert.digest()
    except Exception as exc:  # a failing cell must not abort the sweep
        return Stratum("Unresolved", diagnostic=f"{type(exc).__name__}: {exc}"), "-"


def sample_slice(spec: SliceSpec, tol: Tolerances = DEFAULT, threads: int = 1,
                 progress=None) -> StratumGrid:
    """Classify every cell of the slice with the coarse axis band.

    Cells are classified concurrently on ``threads`` workers; the result is
    assembled in row-major order, so it does not depend on scheduling.
    """
    btol = tol.replace(axis=spec.band)
    x, y = spec.axes()
    params = [spec.params_at(complex(xr, yi)) for yi in y for xr in x]
    jobs = [(p, btol) for p in params]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_classify_cell, jobs, chunksize=256))
    else:
        results = []
        for k, job in enumerate(jobs):
            results.append(_classify_cell(job))
            if progress is not None and k % spec.nx == 0:
                progress(k, len(jobs))
    shown = [p if p is not None else Params(0, complex(xr, yi))
             for p, (yi, xr) in zip(params, ((yi, xr) for yi in y for xr in x))]
    return StratumGrid(spec, shown, [r[0] for r in results], [r[1] for r in results],
                       btol.as_dict())


# ---------------------------------------------------------------------------
# adjacency
# ---------------------------------------------------------------------------

@dataclass
class AdjacencyReport:
    pairs: dict           # "A|B" (sorted short tags) -> count of 4-neighbour contacts
    labelled_pairs: dict  # same with indices, e.g. "H1|W2"
    direct_w1_w2: int
    warnings: list

    @property
    def ok(self) -> bool:
        return self.direct_w1_w2 == 0

    def to_json(self) -> str:
        return json.dumps({"pairs": self.pairs, "labelled_pairs": self.labelled_pairs,
                           "direct_w1_w2": self.direct_w1_w2, "warnings": self.warnings},
                          indent=2, sort_keys=True)


def adjacency_report(grid: StratumGrid) -> AdjacencyReport:
    """Which strata touch which (4-neighbourhood) on the grid."""
    tags = grid.tag_array()
    labels = grid.label_array()
    pairs, lpairs = {}, {}
    for a, b, la, lb in ((tags[:, :-1], tags[:, 1:], labels[:, :-1], labels[:, 1:]),
                         (tags[:-1, :], tags[1:, :], labels[:-1, :], labels[1:, :])):
        for u, v, lu, lv in zip(a.ravel(), b.ravel(), la.ravel(), lb.ravel()):
            if lu == lv:
                continue
            if u != v:
                key = "|".join(sorted((u, v)))
                pairs[key] = pairs.get(key, 0) + 1
            lkey = "|".join(sorted((lu, lv)))
            lpairs[lkey] = lpairs.get(lkey, 0) + 1
    direct = pairs.get("W1|W2", 0)
    warnings = []
    if direct:
        warnings.append(f"{direct} W1 cells touch W2 cells without a wall cell between them; "
                        "refine the grid or widen the band")
    return AdjacencyReport(dict(sorted(pairs.items())), dict(sorted(lpairs.items())), direct, warnings)


# ---------------------------------------------------------------------------
# the discriminant knot
# ---------------------------------------------------------------------------

@dataclass
class DeltaKnot:
    a: np.ndarray
    e1: np.ndarray
    e0: np.ndarray
    marks: list             # sample indices of the codimension-3 points
    mark_params: list       # the four codimension-3 points
    chart: str
    delta_residual: float   # max |Delta| / (|4 e1^3| + |27 e0^2|)
    torus_residual: float   # max |4|e1|^3 - 27|e0|^2| / (4|e1|^3)
    winding_e1: int
    winding_e0: int

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "re_a", "im_a", "re_e1", "im_e1", "re_e0", "im_e0", "codim3"])
        marks = set(self.marks)
        for k, (a, e1, e0) in enumerate(zip(self.a, self.e1, self.e0)):
            w.writerow([k, repr(a.real), repr(a.imag), repr(e1.real), repr(e1.imag),
                        repr(e0.real), repr(e0.imag), int(k in marks)])
        return buf.getvalue() if fh is None else ""


def _knot_radius(chart: str) -> float:
    if chart == "e1_unit":
        return 1.0 / math.sqrt(3.0)
    if chart == "sphere":
        # 9 rho^4 + 4 rho^6 = 1 in x = rho^2
        x = np.roots([4.0, 9.0, 0.0, -1.0])
        x = float(min(r.real for r in x if abs(r.imag) < 1e-12 and r.real > 0))
        return math.sqrt(x)
    raise ValueError(f"unknown chart {chart!r}")


def _winding(z: np.ndarray) -> int:
    ang = np.unwrap(np.angle(np.append(z, z[0])))
    return int(round((ang[-1] - ang[0]) / (2 * math.pi)))


def trace_delta_knot(n: int = 256, chart: str = "e1_unit") -> DeltaKnot:
    """Sample the double-root locus ``(e1, e0) = (-3 a**2, 2 a**3)`` on a chart.

    ``a = rho e^{i theta}`` with ``theta_k = pi/4 + 2 pi k / n``, so the four
    points where the simple root is a centre (``9 a**2`` imaginary, i.e.
    ``theta = pi/4 + m pi/2``) are samples whenever ``n`` is a multiple of 4.
    """
    if n < 8:
        raise ValueError("need at least 8 samples")
    rho = _knot_radius(chart)
    th = math.pi / 4 + 2 * math.pi * np.arange(n) / n
    a = rho * np.exp(1j * th)
    e1 = -3.0 * a ** 2
    e0 = 2.0 * a ** 3
    m1, m0 = np.abs(e1), np.abs(e0)
    d = -4.0 * e1 ** 3 - 27.0 * e0 ** 2
    dres = float(np.max(np.abs(d) / (4 * m1 ** 3 + 27 * m0 ** 2)))
    tres = float(np.max(np.abs(4 * m1 ** 3 - 27 * m0 ** 2) / (4 * m1 ** 3)))
    s = 9.0 * a ** 2
    marks = [k for k in range(n) if abs(s[k].real) <= 1e-12 * abs(s[k])]
    mth = math.pi / 4 + np.arange(4) * math.pi / 2
    ma = rho * np.exp(1j * mth)
    mark_params = [Params(-3 * x ** 2, 2 * x ** 3) for x in ma]
    return DeltaKnot(a, e1, e0, marks, mark_params, chart, dres, tres, _winding(e1), _winding(e0))


# ---------------------------------------------------------------------------
# figure-eight segments
# ---------------------------------------------------------------------------

@dataclass
class FigureEightSegment:
    e1: complex
    direction: complex        # e0 runs along this unit direction
    ratios: np.ndarray        # beta/alpha of the interior samples
    e0: np.ndarray            # interior samples
    endpoints: tuple          # the two collision points (on Delta = 0)
    expected_endpoints: tuple  # +-sqrt(2/27) * direction * |1 +- i|
    max_axis_distance: float  # over interior samples

    @property
    def endpoint_error(self) -> float:
        a = sorted(self.endpoints, key=lambda z: (z.real, z.imag))
        b = sorted(self.expected_endpoints, key=lambda z: (z.real, z.imag))
        return max(abs(x - y) for x, y in zip(a, b))


def _family_point(alpha: float, beta: float, unit: complex):
    """Roots ``a, -b, b - a`` with ``a = alpha * unit``, ``b = beta * unit``."""
    a, b = alpha * unit, beta * unit
    return a * b - a * a - b * b, a * b * (b - a)


def figure_eight_segments(n: int = 200) -> list[FigureEightSegment]:
    """Sweep the collinear-root families in the ``|e1| = 1`` chart.

    The roots ``a, -b, b - a`` on a line through the origin along ``1 + i``
    (resp. ``1 - i``) have all eigenvalues imaginary.  Rescaled to
    ``|e1| = 1`` the family fills a segment of ``e0`` whose ends are the
    root collisions ``beta = 2 alpha`` and ``alpha = 2 beta``.
    """
    out = []
    for unit in (1 + 1j, 1 - 1j):
        rs = np.concatenate([np.geomspace(0.5, 2.0, n + 2)[1:-1]])
        e0s = []
        e1_ref = None
        worst = 0.0
        for r in rs:
            e1, e0 = _family_point(1.0, float(r), unit)
            p = Params(e1, e0)
            delta = abs(e1) ** -0.5
            q = Params(delta ** 2 * e1, delta ** 3 * e0)
            e1_ref = q.e1 if e1_ref is None else e1_ref
            e0s.append(q.e0)
            lam = spectrum(q, solve_cubic(q))
            worst = max(worst, max(abs(l.real) / abs(l) for l in lam if l != 0))
        ends = []
        for r in (0.5, 2.0):
            e1, e0 = _family_point(1.0, r, unit)
            delta = abs(e1) ** -0.5
            ends.append(complex(delta ** 3 * e0))
        direction = complex(ends[1] - ends[0])
        direction /= abs(direction)
        u = unit.conjugate()  # e0 runs along conj(unit); |u| = sqrt(2)
        expected = (FIGURE_EIGHT_BOUND * u, -FIGURE_EIGHT_BOUND * u)
        out.append(FigureEightSegment(complex(round(e1_ref.real, 15), round(e1_ref.imag, 15)),
                                      direction, rs, np.array(e0s), tuple(ends), expected, worst))
    return out


def knot_closed_under_rotation(knot: DeltaKnot, tol: float = 1e-12) -> bool:
    """Does ``rotate_params`` permute the four marked points?"""
    pts = knot.mark_params
    for p in pts:
        q = rotate_params(p)
        if not any(abs(q.e1 - r.e1) + abs(q.e0 - r.e0) <= tol for r in pts):
            return False
    return True


def slice_delta_check(p: Params) -> float:
    """Relative size of the discriminant, for sanity checks on grids."""
    return abs(discriminant(p)) / max(1e-300, abs(4 * p.e1 ** 3) + abs(27 * p.e0 ** 2))
