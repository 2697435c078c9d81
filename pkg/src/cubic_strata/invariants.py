"""Complex travel times from infinity to infinity.

For a structurally stable field the separatrices of infinity cut the sphere
into two strips; their widths are the times ``tau`` along loops from
infinity around one root and back.  By the residue theorem such a loop
around a simple root ``z_j`` takes time ``+-2 pi i / P'(z_j)``; the sign is
fixed by asking for ``Im tau > 0``.

Labels ``tau_{i,j}`` name the two quadrants a loop joins.  In ``W2`` (the
attracting separatrices share their root) the loops pass the tips of the
repelling separatrices 2 and 4 and are labelled ``(1,2)`` and ``(3,4)``; in
``W1`` they pass the tips of the attracting separatrices 3 and 1 and are
labelled ``(2,3)`` and ``(1,4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import flow
from .classify import Target, classify, locate_boundary
from .config import DEFAULT, Tolerances
from .core import Params, solve_cubic, spectrum

# separatrix whose tip each loop passes, per W class: (label, separatrix)
_LOOPS = {
    "W2": (((1, 2), 2), ((3, 4), 4)),
    "W1": (((2, 3), 3), ((1, 4), 1)),
}

_ROWS = ("I", "II", "III", "IV")


class InvariantError(RuntimeError):
    """An invariant could not be computed or failed its consistency check."""


@dataclass
class DsInvariant:
    """The pair ``(tau_a, tau_b)`` in the product of upper half-planes."""

    tau_a: complex
    tau_b: complex
    quadrant_pairs: tuple
    enclosed_roots: tuple
    w_class: str
    windings: tuple = ()
    loops: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {
            "tau_a": _cfmt(self.tau_a),
            "tau_b": _cfmt(self.tau_b),
            "quadrant_pairs": [list(q) for q in self.quadrant_pairs],
            "enclosed_roots": list(self.enclosed_roots),
            "w_class": self.w_class,
        }

    def by_label(self) -> dict:
        return {self.quadrant_pairs[0]: self.tau_a, self.quadrant_pairs[1]: self.tau_b}


def _cfmt(z: complex) -> str:
    """``a+bi`` with an explicit sign between the parts."""
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def residue_tau(lam: complex) -> complex:
    """``+-2 pi i / lam`` with the sign making the imaginary part positive."""
    lam = complex(lam)
    if lam == 0 or lam.real == 0:
        raise InvariantError(f"eigenvalue {lam} gives a real loop time (stratum boundary)")
    return math.copysign(1.0, lam.real) * 2j * math.pi / lam


def pullback_loop(p: Params, sep: int, tau: complex, tol: Tolerances = DEFAULT,
                  cfg: flow.IntegratorConfig | None = None):
    """Closed polygon realising the loop around the tip of separatrix ``sep``.

    The flow for complex time ``tau`` carries the seed on one side of the
    separatrix to the seed on the other side; the polygon is that orbit
    closed by the arc of ``|z| = R`` across ``sep``.  Returns the polygon and
    the mismatch of the arrival point (local time relative to ``|tau|``; infinite
    when it arrives in the wrong direction).
    """
    fd = flow.field_data(p, tol)
    seeds = flow.separatrix_seeds(p, fd.R)
    k = sep - 1
    if sep % 2 == 0:
        start, end = (k - 1) % 4, (k + 1) % 4
    else:
        start, end = (k + 1) % 4, (k - 1) % 4
    z0 = seeds[start][1]
    tr = flow.integrate_complex(p, z0, tau, 1.0, cfg, tol)
    if tr.event != "end":
        raise InvariantError(f"complex-time orbit stopped early ({tr.event})")
    z1 = tr.end
    # the arrival point has the local time of the start, in the direction of the end seed
    t0 = flow.t_inf(p, z0)
    miss = abs(flow.t_inf(p, z1) - t0) / abs(tau)
    if abs(math.remainder(math.atan2(z1.imag, z1.real) - seeds[end][0], 2 * math.pi)) > 0.1:
        miss = math.inf
    # arc from the arrival point back to the start, crossing the separatrix direction
    a1 = math.atan2(z1.imag, z1.real)
    a_sep = seeds[k][0]
    a0 = seeds[start][0]
    d1 = math.remainder(a_sep - a1, 2 * math.pi)
    d2 = math.remainder(a0 - a_sep, 2 * math.pi)
    arc = fd.R * np.exp(1j * np.concatenate([
        a1 + d1 * np.linspace(0, 1, 33)[1:],
        a_sep + d2 * np.linspace(0, 1, 33)[1:],
    ]))
    arc[-1] = z0
    poly = np.concatenate([tr.z, arc])
    return poly, miss


def loop_windings(poly: np.ndarray, roots) -> tuple:
    out = []
    for zr in roots:
        d = poly - zr
        out.append(float(np.angle(d[1:] / d[:-1]).sum() / (2 * math.pi)))
    return tuple(out)


def tau_pair(p: Params, graph: flow.ConnectingGraph | None = None, tol: Tolerances = DEFAULT,
             cfg: flow.IntegratorConfig | None = None, verify: bool = True) -> DsInvariant:
    """Douady-Sentenac pair of a generic point.

    With ``verify`` each loop is realised by a complex-time orbit and its
    winding numbers must single out the enclosed root (modulo the loop
    around all three roots, which takes time zero).

    Examples
    --------
    >>> tau_pair(Params(-1, 0)).tau_a
    3.141592653589793j
    """
    p = Params(*p)
    if graph is None:
        graph = flow.connecting_graph(p, cfg, tol)
    if graph.w_class not in _LOOPS:
        raise InvariantError("parameter point is not in W1 or W2")
    roots = solve_cubic(p, tol)
    spec = spectrum(p, roots)
    taus, labels, enclosed, winds, loops = [], [], [], [], []
    for label, sep in _LOOPS[graph.w_class]:
        j = graph.landing[sep]
        tau = residue_tau(spec[j])
        if verify:
            poly, miss = pullback_loop(p, sep, tau, tol, cfg)
            if miss > 1e-6:
                raise InvariantError(f"loop {label} does not return to infinity (miss {miss:.3g})")
            w = loop_windings(poly, roots.roots)
            shift = round(w[(j + 1) % 3])
            rel = [x - shift for x in w]
            want = [0.0, 0.0, 0.0]
            want[j] = round(rel[j])
            if abs(abs(want[j]) - 1) > 0 or max(abs(a - b) for a, b in zip(rel, want)) > 1e-6:
                raise InvariantError(f"loop {label} has windings {np.round(w, 6).tolist()}")
            winds.append(tuple(int(round(x)) for x in rel))
            loops.append(poly)
        taus.append(tau)
        labels.append(label)
        enclosed.append(j)
    return DsInvariant(taus[0], taus[1], tuple(labels), tuple(enclosed), graph.w_class,
                       tuple(winds), tuple(loops))


def homoclinic_period(p: Params, j: int, tol: Tolerances = DEFAULT,
                      cfg: flow.IntegratorConfig | None = None, check_stratum: bool = True) -> float:
    """Common period ``2 pi / |lambda_j|`` of the closed orbits around a centre.

    Cross-checked against the measured return time.
    """
    p = Params(*p)
    if check_stratum:
        st = classify(p, tol, cfg)[0]
        if st.tag not in ("Homoclinic", "FigureEight"):
            raise InvariantError(f"{p} is not on a homoclinic stratum ({st})")
    lam = spectrum(p, solve_cubic(p, tol))[j]
    if lam == 0 or abs(lam.real) > tol.axis * abs(lam):
        raise InvariantError(f"root {j} is not a centre (eigenvalue {lam})")
    tau1 = 2 * math.pi / abs(lam)
    measured = flow.center_period(p, j, cfg, tol)
    if abs(measured - tau1) > tol.center_period_rel * tau1:
        raise InvariantError(f"return time {measured!r} differs from {tau1!r}")
    return tau1


# ---------------------------------------------------------------------------
# limits at a homoclinic wall
# ---------------------------------------------------------------------------

def richardson(values, ratio: float = 2.0, order: int = 2):
    """Extrapolate ``values[k] = f(d0 / ratio**k)`` to ``d -> 0``.

    Eliminates the terms ``d, ..., d**order``; returns the estimate and the
    change from the previous elimination order as an error indicator.
    """
    v = [complex(x) for x in values]
    if len(v) < order + 2:
        raise ValueError("not enough levels for the requested order")
    table = [v]
    for m in range(1, order + 1):
        prev = table[-1]
        f = ratio ** m
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    est = table[order][-1]
    err = max(abs(est - table[order - 1][-1]), abs(est - table[order][-2]))
    return est, err


@dataclass
class LimitReport:
    """One-sided limits of the loop times at a homoclinic wall."""

    wall: Params
    quadrant: int
    center: int
    tau1: float
    w2: dict          # label -> extrapolated limit on the W2 side
    w1: dict          # label -> extrapolated limit on the W1 side
    errors: dict
    distances: tuple
    w2_samples: list = field(default_factory=list, repr=False)
    w1_samples: list = field(default_factory=list, repr=False)

    @property
    def center_w2(self):
        return self.w2[_center_label(self.quadrant, "W2")]

    @property
    def center_w1(self):
        return self.w1[_center_label(self.quadrant, "W1")]

    @property
    def stated_sign(self) -> int:
        """Sign of the W2-side limit relative to the period, as the crossing rows state it.

        Walls in quadrants 1 and 4 are said to give a positive real limit on
        the W2 side, walls in quadrants 2 and 3 a negative one.
        """
        return 1 if self.quadrant in (1, 4) else -1

    def _others(self):
        o2 = [v for k, v in self.w2.items() if k != _center_label(self.quadrant, "W2")][0]
        o1 = [v for k, v in self.w1.items() if k != _center_label(self.quadrant, "W1")][0]
        return o2, o1

    def limit_residual(self) -> float:
        """``|lim_W2 tau_c - s tau1| + |lim_W1 tau_c' + s tau1|``, ``tau1`` the period."""
        s = self.stated_sign
        return abs(self.center_w2 - s * self.tau1) + abs(self.center_w1 + s * self.tau1)

    def shift_residual(self) -> float:
        """``|lim tau'_other - (lim tau_other + s tau1)|``, ``tau1`` the period."""
        o2, o1 = self._others()
        return abs(o1 - (o2 + self.stated_sign * self.tau1))

    def signed_residuals(self) -> dict:
        """The same relations with ``tau1`` replaced by the signed W2 limit."""
        c2, c1 = self.center_w2, self.center_w1
        o2, o1 = self._others()
        return {"opposite_limits": abs(c2 + c1),
                "period_modulus": abs(abs(c2) - self.tau1),
                "real_limit": abs(c2.imag) + abs(c1.imag),
                "sum_rule": abs(o1 - (o2 + c2))}

    def as_dict(self) -> dict:
        return {
            "wall": [_cfmt(self.wall.e1), _cfmt(self.wall.e0)],
            "quadrant": self.quadrant, "center": self.center, "tau1": self.tau1,
            "w2": {f"{a}{b}": _cfmt(v) for (a, b), v in self.w2.items()},
            "w1": {f"{a}{b}": _cfmt(v) for (a, b), v in self.w1.items()},
            "errors": {k: float(v) for k, v in self.errors.items()},
            "limit_residual": self.limit_residual(), "shift_residual": self.shift_residual(),
            "signed": self.signed_residuals(),
        }


def _center_label(quadrant: int, w: str):
    """Label of the loop that shrinks onto the centre of a wall in ``quadrant``."""
    q = quadrant
    if w == "W2":
        return (1, 2) if q in (1, 2) else (3, 4)
    return {1: (1, 4), 2: (2, 3), 3: (2, 3), 4: (1, 4)}[q]


def _unit(a: Params, b: Params):
    d1, d0 = b.e1 - a.e1, b.e0 - a.e0
    n = math.hypot(abs(d1), abs(d0))
    if n == 0:
        raise InvariantError("degenerate path")
    return d1 / n, d0 / n, n


def _wall_on_segment(a: Params, b: Params, tol: Tolerances, samples: int = 65):
    """Root index whose eigenvalue crosses the imaginary axis once along the segment."""
    ss = np.linspace(0.0, 1.0, samples)
    crossings = []
    prev = None
    for s in ss:
        p = Params(a.e1 + s * (b.e1 - a.e1), a.e0 + s * (b.e0 - a.e0))
        r = solve_cubic(p, tol)
        if not r.distinct:
            raise InvariantError("path meets the discriminant locus")
        lam = spectrum(p, r)
        if prev is not None:
            # match roots to the previous sample by proximity
            order = [min(range(3), key=lambda i: abs(r[i] - z)) for z in prev[0]]
            if len(set(order)) != 3:
                raise InvariantError("ambiguous root continuation along the path")
            for j in range(3):
                x = lam[order[j]].real
                # a touching zero is not a crossing: compare with the last non-zero sign
                if x != 0 and signs[j] != 0 and (x > 0) != (signs[j] > 0):
                    crossings.append((j, s))
                if x != 0:
                    signs[j] = x
            prev = ([r[i] for i in order], [lam[i] for i in order])
        else:
            prev = (list(r.roots), list(lam))
            signs = [l.real for l in lam]
    if not crossings:
        raise InvariantError("path does not cross a homoclinic surface")
    if len(crossings) > 1:
        raise InvariantError(f"path crosses {len(crossings)} homoclinic surfaces")
    j, _ = crossings[0]
    return solve_cubic(a, tol)[j]


def _side_class(p: Params, tol, cfg):
    st = classify(p, tol, cfg)[0]
    return st.tag


def verify_limits(p_start: Params, p_end: Params, tol: Tolerances = DEFAULT,
                  cfg: flow.IntegratorConfig | None = None, order: int = 2,
                  verify_loops: bool = False) -> LimitReport:
    """Extrapolate the loop times to the homoclinic wall crossed by a segment.

    The wall is located with :func:`classify.locate_boundary`; loop times are
    computed at distances ``d_k = d0 / 2**k`` (``k = 0..levels``) on both sides
    and extrapolated to ``d = 0``.
    """
    a, b = Params(*p_start), Params(*p_end)
    z_near = _wall_on_segment(a, b, tol)
    wall = locate_boundary(a, b, Target("homoclinic_axis", z_near), tol)
    st = classify(wall, tol, cfg)[0]
    if st.tag != "Homoclinic":
        raise InvariantError(f"located wall point classifies as {st}")
    quadrant = st.indices[0]
    roots = solve_cubic(wall, tol)
    center = min(range(3), key=lambda i: abs(roots[i] - z_near))
    lam = spectrum(wall, roots)[center]
    tau1 = 2 * math.pi / abs(lam)

    u1, u0, length = _unit(a, b)
    da = math.hypot(abs(wall.e1 - a.e1), abs(wall.e0 - a.e0))
    d0 = min(tol.richardson_d0, 0.5 * da, 0.5 * (length - da))
    ds = tuple(d0 / 2 ** k for k in range(tol.richardson_levels + 1))
    sides = {}
    for sgn in (-1.0, 1.0):
        pts = [Params(wall.e1 + sgn * d * u1, wall.e0 + sgn * d * u0) for d in ds]
        tags = {_side_class(q, tol, cfg) for q in pts}
        if len(tags) != 1 or tags.pop() not in ("GenericW1", "GenericW2"):
            raise InvariantError("sample points on one side do not share a W class")
        inv = [tau_pair(q, None, tol, cfg, verify=verify_loops) for q in pts]
        sides[inv[0].w_class] = inv
    if set(sides) != {"W1", "W2"}:
        raise InvariantError("both sides of the wall are in the same W class")

    lims, errs = {"W1": {}, "W2": {}}, {}
    for w, inv in sides.items():
        for idx, lab in enumerate(inv[0].quadrant_pairs):
            vals = [x.tau_a if idx == 0 else x.tau_b for x in inv]
            est, err = richardson(vals, 2.0, order)
            lims[w][lab] = est
            errs[f"{w}:{lab[0]}{lab[1]}"] = err
            if err > tol.limit_tol:
                raise InvariantError(f"{w} limit of tau_{lab} did not converge (change {err:.3g})")
    return LimitReport(wall, quadrant, center, tau1, lims["W2"], lims["W1"], errs, ds,
                       sides["W2"], sides["W1"])


@dataclass
class CrossingReport:
    side_V: tuple           # (tau_12, tau_34) limits on the W2 side
    side_I_to_IV: tuple     # (tau'_14, tau'_23) limits on the W1 side
    crossed: int            # quadrant index of the wall
    row: str
    residual: float
    limits: LimitReport = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return self.residual <= 1e-4

    def as_dict(self) -> dict:
        return {
            "side_V": {"tau_12": _cfmt(self.side_V[0]), "tau_34": _cfmt(self.side_V[1])},
            "side_I_to_IV": {"tau_14": _cfmt(self.side_I_to_IV[0]),
                             "tau_23": _cfmt(self.side_I_to_IV[1])},
            "crossed": f"H{self.crossed}", "row": self.row,
            "residual": self.residual, "passed": self.passed,
        }


def table_residual(row: str, t12: complex, t34: complex, t14: complex, t23: complex) -> float:
    """Residual of one row of the crossing table."""
    s = t12 + t34
    if row == "I":
        return abs(t14 + t12) + abs(t23 - s)
    if row == "II":
        return abs(t14 - s) + abs(t23 + t12)
    if row == "III":
        return abs(t14 - s) + abs(t23 + t34)
    if row == "IV":
        return abs(t14 + t34) + abs(t23 - s)
    raise ValueError(f"unknown row {row!r}")


def crossing_table(p_start: Params, p_end: Params, tol: Tolerances = DEFAULT,
                   cfg: flow.IntegratorConfig | None = None) -> CrossingReport:
    """Check the row of the crossing table for the wall crossed by the segment."""
    rep = verify_limits(p_start, p_end, tol, cfg)
    t12, t34 = rep.w2[(1, 2)], rep.w2[(3, 4)]
    t14, t23 = rep.w1[(1, 4)], rep.w1[(2, 3)]
    row = _ROWS[rep.quadrant - 1]
    return CrossingReport((t12, t34), (t14, t23), rep.quadrant, row,
                          table_residual(row, t12, t34, t14, t23), rep)
