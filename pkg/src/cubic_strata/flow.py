"""Real-time flow of ``dz/dt = P(z)`` on the Riemann sphere.

The four separatrices of the pole at infinity are seeded on the circle
``|z| = R`` where the exact local time from infinity,

    t(z) = int_inf^z dzeta / P(zeta) = -int_0^{1/z} u du / (1 + e1 u**2 + e0 u**3),

is real, and are then followed away from infinity with the compiled kernel
in :mod:`cubic_strata._kernel`.  Directions are indexed ``1..4`` for the
asymptotic arguments ``0, pi/2, pi, 3pi/2``; odd indices are attracting
(they reach infinity in forward time), even indices repelling.  Quadrant
``j`` is the sector between separatrices ``j`` and ``j + 1``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi

from . import _kernel as K
from .config import DEFAULT, Tolerances
from .core import CubicRoots, Params, Spectrum, chart_radius, eval_poly, solve_cubic, spectrum

_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)

ATTRACTING = "attracting"
REPELLING = "repelling"


class FlowError(RuntimeError):
    """A flow computation could not produce a trustworthy answer."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control and event thresholds for one integration.

    ``max_time`` and ``landing_radius`` are given for parameters of unit
    size; each run rescales them with the conic structure (lengths by
    ``scale``, times by ``scale**-2``).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 1e4
    max_steps: int = 200_000
    chart_factor: float = 10.0
    landing_radius: float = 1e-6
    homoclinic_match_tol: float = 1e-6
    infinity_hit: float = 1e-10

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_time", "chart_factor",
                     "landing_radius", "homoclinic_match_tol", "infinity_hit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @classmethod
    def from_tolerances(cls, tol: Tolerances) -> "IntegratorConfig":
        return cls(rel_tol=tol.rel_tol, abs_tol=tol.abs_tol, max_time=tol.max_time,
                   max_steps=tol.max_steps, chart_factor=tol.chart_factor,
                   landing_radius=tol.landing_radius,
                   homoclinic_match_tol=tol.homoclinic_match,
                   infinity_hit=tol.infinity_hit)


@dataclass
class Trajectory:
    """Samples of one integration and the event that ended it.

    ``t`` is the elapsed time ``c * s`` (real for real-time runs), ``chart`` is
    0 in the finite chart and 1 in the chart ``w = 1/z``.
    """

    t: np.ndarray
    z: np.ndarray
    chart: np.ndarray
    event: str
    root: int | None = None
    direction: float | None = None
    multiplier: complex = 1.0

    @property
    def end(self) -> complex:
        return complex(self.z[-1])

    def to_csv(self, fh=None) -> str:
        """Write ``t, re_z, im_z, chart`` rows; returns the text when ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_z", "im_z", "chart"])
        tt = np.real(self.t) if np.all(np.imag(self.t) == 0) else self.t
        for t, z, c in zip(tt, self.z, self.chart):
            w.writerow([repr(t) if isinstance(t, float) else repr(complex(t)),
                        repr(float(z.real)), repr(float(z.imag)), int(c)])
        return buf.getvalue() if fh is None else ""


@dataclass
class SeparatrixTrace:
    """One separatrix of infinity and where it goes.

    ``outcome`` is ``"lands"`` (``root`` is the landing root), ``"homoclinic"``
    (``partner`` is the matched separatrix, ``root`` the enclosed root and
    ``quadrant`` the sector containing the loop) or ``"unresolved"``.
    """

    index: int
    kind: str
    angle: float
    outcome: str
    root: int | None = None
    partner: int | None = None
    quadrant: int | None = None
    diagnostic: str = ""
    seed: complex = 0j
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def resolved(self) -> bool:
        return self.outcome != "unresolved"


@dataclass
class ConnectingGraph:
    landing: dict
    shared_root: int | None
    w_class: str | None  # "W1", "W2" or None
    homoclinic_pairs: list = field(default_factory=list)  # (i, j, quadrant, enclosed root)
    traces: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class FieldData:
    """Roots, spectrum and the derived arrays the kernel needs."""

    p: Params
    roots: CubicRoots
    spec: Spectrum
    R: float
    k_roots: np.ndarray
    k_lams: np.ndarray
    root_map: tuple  # kernel slot -> canonical root index
    min_gap: float


def field_data(p: Params, tol: Tolerances = DEFAULT) -> FieldData:
    r = solve_cubic(p, tol)
    sp = spectrum(p, r)
    zs, ls, idx = [], [], []
    for i, z in enumerate(r.roots):
        if any(z == w for w in zs):
            continue
        zs.append(z)
        ls.append(sp[i])
        idx.append(i)
    gaps = [abs(a - b) for i, a in enumerate(r.roots) for b in r.roots[i + 1:]]
    return FieldData(p, r, sp, chart_radius(p, tol.chart_factor),
                     np.array(zs, dtype=np.complex128), np.array(ls, dtype=np.complex128),
                     tuple(idx), min(gaps))


# ---------------------------------------------------------------------------
# local time near infinity and the separatrix seeds
# ---------------------------------------------------------------------------

def t_inf(p: Params, z: complex) -> complex:
    """Complex time from infinity to ``z`` along the straight ray in ``w = 1/z``.

    Accurate while the segment ``[0, 1/z]`` stays well away from the inverse
    roots, i.e. for ``|z|`` several times the root scale.
    """
    w = 1.0 / complex(z)
    u = 0.5 * w * (_GL_X + 1.0)
    f = -u / (1.0 + p.e1 * u * u + p.e0 * u ** 3)
    return complex(0.5 * w * np.dot(_GL_W, f))


def separatrix_seeds(p: Params, R: float) -> list[tuple[float, complex]]:
    """Angles and points on ``|z| = R`` where the four separatrices cross.

    Newton iteration on ``Im t(R e^{i theta}) = 0`` from ``theta = k pi/2``.
    """
    seeds = []
    for k in range(4):
        th = k * math.pi / 2
        for _ in range(50):
            z = R * complex(math.cos(th), math.sin(th))
            g = t_inf(p, z).imag
            dg = (1j * z / eval_poly(p, z)).imag
            step = g / dg
            th -= step
            if abs(step) < 1e-15:
                break
        z = R * complex(math.cos(th), math.sin(th))
        seeds.append((th, z))
    return seeds


def seed_kind(index: int) -> str:
    return ATTRACTING if index % 2 == 1 else REPELLING


def quadrant_of_pair(i: int, j: int) -> int:
    """Sector between adjacent separatrices ``i`` and ``j`` (1-based)."""
    a, b = sorted((i, j))
    if (a, b) == (1, 4):
        return 4
    if b - a != 1:
        raise ValueError(f"separatrices {i} and {j} are not adjacent")
    return a


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _run(fd: FieldData, z0: complex, c: complex, cfg: IntegratorConfig, *,
         s_end: float = 0.0, landing: bool = True, match=(), period_root: int = -1,
         max_time: float | None = None, max_steps: int | None = None):
    scale = fd.p.scale
    steps = cfg.max_steps if max_steps is None else max_steps
    cap = steps + 2
    out_s = np.empty(cap)
    out_z = np.empty(cap, dtype=np.complex128)
    out_c = np.empty(cap, dtype=np.int8)
    mt = (cfg.max_time if max_time is None else max_time) / scale ** 2
    m = np.asarray(match, dtype=np.float64).reshape(-1)
    ev, arg, n, s, zend, extra = K.integrate_kernel(
        fd.p.e1, fd.p.e0, complex(c), complex(z0), float(fd.R), fd.k_roots, fd.k_lams,
        len(fd.k_roots), float(s_end), cfg.rel_tol, cfg.abs_tol, mt, int(steps),
        cfg.landing_radius * scale, bool(landing), m, cfg.homoclinic_match_tol,
        cfg.infinity_hit / scale, int(period_root), out_s, out_z, out_c)
    root = fd.root_map[arg] if ev in (K.EV_LANDED, K.EV_PERIOD) else None
    tr = Trajectory(t=complex(c).real * out_s[:n] if complex(c).imag == 0 else complex(c) * out_s[:n],
                    z=out_z[:n].copy(), chart=out_c[:n].copy(), event=K.EVENT_NAMES[ev],
                    root=root, direction=extra if ev in (K.EV_INFINITY, K.EV_MATCH) else None,
                    multiplier=complex(c))
    return ev, arg, tr, extra


def _near_parabolic(fd: FieldData, tol: Tolerances) -> bool:
    return fd.roots.distinct and fd.min_gap <= tol.near_parabolic_gap * fd.p.scale


def integrate(p: Params, z0: complex, direction: str = "forward",
              cfg: IntegratorConfig | None = None, tol: Tolerances = DEFAULT) -> Trajectory:
    """Follow the real-time flow from ``z0`` until the first terminal event.

    Events are ``landed`` (``root`` is set), ``reached_infinity``
    (``direction`` is the asymptotic argument), ``time_exhausted`` and
    ``step_failure``.

    Examples
    --------
    >>> integrate(Params(-1, 0), 0.5).root
    1
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    cfg = cfg or IntegratorConfig.from_tolerances(tol)
    fd = field_data(p, tol)
    z0 = complex(z0)
    for z in fd.k_roots:
        if abs(z0 - z) <= cfg.landing_radius * p.scale:
            raise ValueError("starting point is a singular point")
    c = 1.0 if direction == "forward" else -1.0
    mt = cfg.max_time * (tol.near_parabolic_factor if _near_parabolic(fd, tol) else 1.0)
    _, _, tr, _ = _run(fd, z0, c, cfg, max_time=mt)
    return tr


def integrate_complex(p: Params, z0: complex, tau: complex, s_end: float = 1.0,
                      cfg: IntegratorConfig | None = None, tol: Tolerances = DEFAULT) -> Trajectory:
    """Solve ``dz/ds = tau P(z)`` for ``s`` in ``[0, s_end]``: the flow for complex time ``tau s``."""
    cfg = cfg or IntegratorConfig.from_tolerances(tol)
    fd = field_data(p, tol)
    _, _, tr, _ = _run(fd, complex(z0), complex(tau), cfg, s_end=s_end, landing=False,
                       max_time=max(2.0 * s_end, cfg.max_time) * p.scale ** 2)
    return tr


def _winding(poly: np.ndarray, z: complex) -> float:
    d = poly - z
    ang = np.angle(d[1:] / d[:-1])
    return float(ang.sum() / (2 * math.pi))


def _close_on_circle(path: np.ndarray, a0: float, a1: float, R: float, n: int = 64) -> np.ndarray:
    """Append the arc of ``|z| = R`` from angle ``a1`` back to ``a0`` (short way)."""
    d = math.remainder(a0 - a1, 2 * math.pi)
    arc = R * np.exp(1j * (a1 + d * np.linspace(0, 1, n)))
    return np.concatenate([path, arc])


def trace_separatrices(p: Params, cfg: IntegratorConfig | None = None,
                       tol: Tolerances = DEFAULT) -> list[SeparatrixTrace]:
    """Trace the four separatrices of infinity away from infinity."""
    cfg = cfg or IntegratorConfig.from_tolerances(tol)
    if p.e1 == 0 and p.e0 == 0:
        out = []
        for k in range(4):
            ang = k * math.pi / 2
            zz = np.array([cfg.chart_factor * complex(math.cos(ang), math.sin(ang)), 0j])
            tr = Trajectory(np.zeros(2), zz, np.zeros(2, dtype=np.int8), "landed", 0)
            out.append(SeparatrixTrace(k + 1, seed_kind(k + 1), ang, "lands", root=0,
                                       seed=complex(zz[0]), trajectory=tr))
        return out
    fd = field_data(p, tol)
    seeds = separatrix_seeds(p, fd.R)
    mt = cfg.max_time * (tol.near_parabolic_factor if _near_parabolic(fd, tol) else 1.0)
    traces = []
    for k, (ang, z) in enumerate(seeds):
        idx = k + 1
        kind = seed_kind(idx)
        c = -1.0 if kind == ATTRACTING else 1.0
        partners = [(k + 1) % 4, (k - 1) % 4]  # opposite kind, adjacent
        match = [seeds[m][0] for m in partners]
        ev, arg, tr, extra = _run(fd, z, c, cfg, match=match, max_time=mt)
        st = SeparatrixTrace(idx, kind, ang, "unresolved", seed=z, trajectory=tr)
        if ev == K.EV_LANDED:
            st.outcome, st.root = "lands", fd.root_map[arg]
        elif ev in (K.EV_MATCH, K.EV_INFINITY):
            if ev == K.EV_MATCH:
                m = partners[arg]
            else:
                errs = [abs(math.remainder(extra - seeds[q][0], 2 * math.pi)) for q in partners]
                best = int(np.argmin(errs))
                m = partners[best] if errs[best] <= 1e-3 else None
            if m is None:
                st.diagnostic = f"reached infinity at angle {extra:.6g} away from any partner"
            else:
                loop = _close_on_circle(tr.z, ang, seeds[m][0], fd.R)
                wn = [_winding(loop, zr) for zr in fd.roots.roots]
                inside = [i for i, w in enumerate(wn) if abs(abs(w) - 1) < 0.25]
                if len(inside) != 1:
                    st.diagnostic = f"homoclinic loop with windings {np.round(wn, 3).tolist()}"
                else:
                    st.outcome = "homoclinic"
                    st.partner = m + 1
                    st.root = inside[0]
                    st.quadrant = quadrant_of_pair(idx, m + 1)
        else:
            st.diagnostic = f"{tr.event} after t={abs(tr.t[-1]):.6g}"
        traces.append(st)
    # partners must agree with each other
    for st in traces:
        if st.outcome == "homoclinic":
            other = traces[st.partner - 1]
            if other.outcome != "homoclinic" or other.partner != st.index or other.quadrant != st.quadrant:
                st.outcome = "unresolved"
                st.diagnostic = f"unpaired homoclinic match with separatrix {st.partner}"
    return traces


def build_connecting_graph(traces: list[SeparatrixTrace],
                           roots: CubicRoots | None = None) -> ConnectingGraph:
    """Landing pattern of the four separatrices and the W class it implies.

    With distinct roots a pattern without homoclinic pairs must have one
    root shared by a same-kind pair and the other two separatrices at the
    other two roots; anything else raises :class:`FlowError`.  Passing
    ``roots`` with a multiple root skips that check (parabolic points).
    """
    bad = [t.index for t in traces if not t.resolved]
    if bad:
        raise FlowError(f"separatrices {bad} are unresolved")
    landing, pairs = {}, []
    for t in traces:
        if t.outcome == "lands":
            landing[t.index] = t.root
        else:
            landing[t.index] = ("homoclinic", t.partner)
            if t.index < t.partner:
                pairs.append((t.index, t.partner, t.quadrant, t.root))
    if pairs:
        return ConnectingGraph(landing, None, None, pairs, traces)
    rep = [landing[2], landing[4]]
    att = [landing[1], landing[3]]
    if all(isinstance(r, int) and r == 0 for r in rep + att) and len({*rep, *att}) == 1:
        # the triple point: every separatrix lands at the origin
        return ConnectingGraph(landing, 0, None, [], traces)
    if rep[0] == rep[1] and att[0] != att[1] and rep[0] not in att:
        return ConnectingGraph(landing, rep[0], "W1", [], traces)
    if att[0] == att[1] and rep[0] != rep[1] and att[0] not in rep:
        return ConnectingGraph(landing, att[0], "W2", [], traces)
    if roots is not None and not roots.distinct:
        return ConnectingGraph(landing, None, None, [], traces)
    if rep[0] == rep[1] or att[0] == att[1]:
        raise FlowError(f"inconsistent landing pattern {landing}")
    return ConnectingGraph(landing, None, None, [], traces)


def connecting_graph(p: Params, cfg: IntegratorConfig | None = None,
                     tol: Tolerances = DEFAULT) -> ConnectingGraph:
    return build_connecting_graph(trace_separatrices(p, cfg, tol), solve_cubic(p, tol))


# ---------------------------------------------------------------------------
# periods and complex times
# ---------------------------------------------------------------------------

def center_period(p: Params, j: int, cfg: IntegratorConfig | None = None,
                  tol: Tolerances = DEFAULT) -> float:
    """Return time of the closed orbit through ``z_j + r``, ``r = center_seed * scale``.

    The orbit is followed until its argument about ``z_j`` has advanced by
    one full turn; a centre must close up there to ``center_period_rel``.
    """
    cfg = cfg or IntegratorConfig.from_tolerances(tol)
    fd = field_data(p, tol)
    lam = fd.spec[j]
    if lam == 0 or abs(lam.real) > tol.axis * abs(lam):
        raise FlowError(f"root {j} is not a centre (eigenvalue {lam})")
    slot = fd.root_map.index(j) if j in fd.root_map else None
    if slot is None:
        raise FlowError(f"root {j} is a multiple root")
    r0 = tol.center_seed * p.scale
    z0 = complex(fd.k_roots[slot]) + r0
    ev, _, tr, extra = _run(fd, z0, 1.0, cfg, landing=False, period_root=slot,
                            max_time=cfg.max_time)
    if ev != K.EV_PERIOD:
        raise FlowError(f"orbit around root {j} did not complete a turn ({tr.event})")
    if abs(extra - 1.0) > 10 * tol.center_period_rel:
        raise FlowError(f"orbit around root {j} does not close (radius ratio {extra:.12g})")
    return float(tr.t[-1])


def path_time(p: Params, path, closed: bool = False, tol: Tolerances = DEFAULT) -> complex:
    """Complex time ``int dz / P(z)`` along a polyline.

    Segments are integrated with adaptive Gauss-Kronrod quadrature.  The path
    must stay farther than ``1e-6 * scale`` from every root.
    """
    pts = np.asarray(path, dtype=np.complex128).reshape(-1)
    if closed and pts[0] != pts[-1]:
        pts = np.append(pts, pts[0])
    if len(pts) < 2:
        return 0j
    roots = solve_cubic(p, tol).roots
    guard = 1e-6 * p.scale
    a, b = pts[:-1], pts[1:]
    for zr in roots:
        d = b - a
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.clip(np.real((zr - a) * np.conj(d)) / np.abs(d) ** 2, 0.0, 1.0)
        s = np.where(np.abs(d) == 0, 0.0, s)
        if np.min(np.abs(a + s * d - zr)) <= guard:
            raise ValueError(f"path passes within {guard:g} of the root {zr}")

    total = 0j
    for za, zb in zip(a, b):
        d = zb - za
        if d == 0:
            continue
        val, _ = _spi.quad(lambda s, za=za, d=d: d / eval_poly(p, za + s * d), 0.0, 1.0,
                           complex_func=True, epsabs=1e-15 * abs(d), epsrel=tol.quad_rel,
                           limit=200)
        total += val
    return complex(total)
