"""Stratum of a parameter point in the bifurcation diagram.

:func:`classify` gathers the numerical evidence (discriminant, spectrum,
separatrix landings) into a :class:`Certificate`; :func:`decide` turns a
certificate into a :class:`Stratum` using the certificate fields only, so a
stored certificate always reproduces its tag.

Quadrant indices follow :mod:`cubic_strata.flow`: quadrant ``j`` is the
sector between the separatrices of infinity with asymptotic arguments
``(j - 1) pi/2`` and ``j pi/2``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import flow
from .config import DEFAULT, Tolerances
from .core import Params, discriminant, eval_deriv, eval_poly, solve_cubic, spectrum

TAGS = ("EpsilonZero", "GenericW1", "GenericW2", "Homoclinic", "FigureEight",
        "ParabolicRegular", "ParabolicCenter", "Unresolved")

SHORT = {"EpsilonZero": "E0", "GenericW1": "W1", "GenericW2": "W2", "Homoclinic": "H",
         "FigureEight": "F8", "ParabolicRegular": "PR", "ParabolicCenter": "PC",
         "Unresolved": "U"}


class NotBracketedError(ValueError):
    """The boundary indicator does not change sign along the segment."""


class TrackingError(ValueError):
    """Root continuation along a segment became ambiguous."""


@dataclass(frozen=True)
class Stratum:
    """Tag plus its indices (quadrant, pair of quadrants or adjacent pair)."""

    tag: str
    indices: tuple = ()
    diagnostic: str = ""

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @property
    def short(self) -> str:
        return SHORT[self.tag]

    @property
    def family(self) -> str:
        return {"GenericW1": "Generic", "GenericW2": "Generic"}.get(self.tag, self.tag)

    def __str__(self):
        if not self.indices:
            return self.tag
        return f"{self.tag}({', '.join(map(str, self.indices))})"


@dataclass
class Certificate:
    """Everything :func:`decide` needs.

    ``evidence`` holds the norm, root pattern, eigenvalues and the separatrix
    landing table ``[[outcome, root, partner, quadrant], ...]``.
    """

    delta: complex
    axis_distances: tuple
    tag: str
    indices: tuple
    tolerances: dict
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "delta": [self.delta.real, self.delta.imag],
            "axis_distances": list(self.axis_distances),
            "tag": self.tag,
            "indices": list(self.indices),
            "tolerances": dict(self.tolerances),
            "evidence": self.evidence,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(complex(*d["delta"]), tuple(d["axis_distances"]), d["tag"],
                   tuple(d["indices"]), dict(d["tolerances"]), d.get("evidence", {}))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def axis_distance(lam: complex) -> float:
    """Relative distance ``|Re lam| / |lam|`` of an eigenvalue from the imaginary axis.

    >>> axis_distance(1 + 1j) == 1 / math.sqrt(2)
    True
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("axis distance is undefined for a zero eigenvalue")
    return abs(lam.real) / abs(lam)


# ---------------------------------------------------------------------------
# quadrant rules
# ---------------------------------------------------------------------------

def _wrap_q(q: int) -> int:
    return (q - 1) % 4 + 1


def near_wall_quadrant(sep: int, lam: complex) -> int | None:
    """Quadrant of the loop about a near-centre landed by separatrix ``sep`` only.

    Close to a homoclinic wall the near-centre ``B`` is the landing point of
    exactly one of the two separatrices that form the loop.  The loop in the
    quadrant after that separatrix turns clockwise, the one before it
    counterclockwise; the sense of rotation is ``sign(Im lam)``.
    """
    if lam.imag == 0:
        return None
    ccw = lam.imag > 0
    # an attracting separatrix (odd index) is the trailing side of a ccw loop,
    # a repelling one the leading side
    if sep % 2 == 1:
        return sep if ccw else _wrap_q(sep - 1)
    return _wrap_q(sep - 1) if ccw else sep


def _landers(landing, root):
    return [k + 1 for k, e in enumerate(landing) if e[0] == "lands" and e[1] == root]


def _w_class(landing):
    r = [e[1] if e[0] == "lands" else None for e in landing]
    if None in r:
        return None
    if r[1] == r[3] and r[0] != r[2] and r[1] not in (r[0], r[2]):
        return "W1"
    if r[0] == r[2] and r[1] != r[3] and r[0] not in (r[1], r[3]):
        return "W2"
    return None


def _loop_quadrants(landing):
    return sorted({e[3] for e in landing if e[0] == "homoclinic"})


# ---------------------------------------------------------------------------
# decision procedure
# ---------------------------------------------------------------------------

def decide(cert: Certificate) -> Stratum:
    """Recompute the stratum from a certificate alone."""
    ev = cert.evidence
    tol = cert.tolerances
    ax = tol["axis"]
    if ev["norm"] <= tol["zero"]:
        return Stratum("EpsilonZero")
    landing = ev["landing"]
    lams = [complex(*l) for l in ev["lambdas"]]
    unresolved = [k + 1 for k, e in enumerate(landing) if e[0] == "unresolved"]

    if ev["pattern"] == "2+1":
        dbl, sim = ev["double_root"], ev["simple_root"]
        if cert.axis_distances[sim] <= ax:
            at = _landers(landing, dbl)
            if len(at) != 2:
                return Stratum("Unresolved", diagnostic=f"{len(at)} separatrices land at the double root")
            a, b = at
            return Stratum("ParabolicCenter", (flow.quadrant_of_pair(a, b),))
        at = _landers(landing, sim)
        if len(at) != 1 or unresolved:
            return Stratum("Unresolved", diagnostic="simple root not landed by exactly one separatrix")
        m = at[0]
        return Stratum("ParabolicRegular", (_wrap_q(m + 1), _wrap_q(m + 2)))

    on = [j for j, d in enumerate(cert.axis_distances) if d <= ax]
    if len(on) == 2:
        # the residue identity lets two near-imaginary eigenvalues force the
        # third only up to cancellation; accept it when within that bound
        j3 = ({0, 1, 2} - set(on)).pop()
        inv = [abs(1 / lams[j]) for j in range(3)]
        bound = ax * (inv[on[0]] + inv[on[1]]) / inv[j3]
        if cert.axis_distances[j3] <= bound:
            on = [0, 1, 2]
        else:
            return Stratum("Unresolved", diagnostic="two eigenvalues on the axis")

    if unresolved:
        return Stratum("Unresolved", diagnostic=f"separatrices {unresolved} unresolved")

    if not on:
        w = _w_class(landing)
        if w is None:
            return Stratum("Unresolved", diagnostic="no W pattern in the connecting graph")
        n_rep = sum(l.real > 0 for l in lams)
        if (w == "W1") != (n_rep == 2):
            return Stratum("Unresolved", diagnostic=f"{w} pattern with {n_rep} repelling roots")
        return Stratum("Generic" + w)

    inner = on
    if len(on) == 3:
        # the two loop centres turn the same way, the outer centre the other way
        ccw = [lams[j].imag > 0 for j in on]
        major = sum(ccw) >= 2
        inner = [j for j, c in zip(on, ccw) if c == major]
    quads = []
    for j in on:
        loops = [e[3] for e in landing if e[0] == "homoclinic" and e[1] == j]
        if loops:
            quads.append(loops[0])
            continue
        if j not in inner:
            continue
        at = _landers(landing, j)
        if len(at) == 1:
            q = near_wall_quadrant(at[0], lams[j])
            if q is not None:
                quads.append(q)
    stray = [q for q in _loop_quadrants(landing)
             if not any(e[0] == "homoclinic" and e[3] == q and e[1] in on for e in landing)]
    if stray:
        return Stratum("Unresolved", diagnostic="homoclinic loop around an off-axis root")

    if len(on) == 1:
        if len(quads) != 1:
            return Stratum("Unresolved", diagnostic="quadrant of the loop not determined")
        return Stratum("Homoclinic", (quads[0],))

    parities = {q % 2 for q in quads}
    if len(parities) != 1:
        return Stratum("Unresolved", diagnostic=f"inconsistent loop quadrants {quads}")
    return Stratum("FigureEight", (1, 3) if parities.pop() == 1 else (2, 4))


def _landing_table(traces) -> list:
    out = []
    for t in traces:
        if t.outcome == "lands":
            out.append(["lands", t.root, None, None])
        elif t.outcome == "homoclinic":
            out.append(["homoclinic", t.root, t.partner, t.quadrant])
        else:
            out.append(["unresolved", None, None, t.diagnostic])
    return out


def classify(p: Params, tol: Tolerances = DEFAULT,
             cfg: flow.IntegratorConfig | None = None, keep_traces: bool = False):
    """Stratum and certificate of ``p``.

    Returns ``(stratum, certificate)``, plus the separatrix traces when
    ``keep_traces`` is set.

    Examples
    --------
    >>> classify(Params(-1, 0))[0].tag
    'GenericW1'
    """
    if not isinstance(p, Params):
        p = Params(*p)
    roots = solve_cubic(p, tol)
    spec = spectrum(p, roots)
    ad = tuple(0.0 if lam == 0 else axis_distance(lam) for lam in spec)
    ev = {"norm": p.norm, "pattern": roots.pattern,
          "roots": [[z.real, z.imag] for z in roots],
          "lambdas": [[l.real, l.imag] for l in spec], "landing": []}
    traces = []
    if p.norm > tol.zero:
        if roots.pattern == "2+1":
            ev["double_root"] = roots.double_index()
            ev["simple_root"] = roots.simple_index()
        traces = flow.trace_separatrices(p, cfg, tol)
        ev["landing"] = _landing_table(traces)
    cert = Certificate(discriminant(p), ad, "", (), tol.as_dict(), ev)
    st = decide(cert)
    if roots.distinct and sum(d <= tol.axis for d in ad) == 2:
        # two imaginary eigenvalues force the third: never a single loop
        assert st.tag in ("FigureEight", "Unresolved"), st
    cert.tag, cert.indices = st.tag, st.indices
    return (st, cert, traces) if keep_traces else (st, cert)


# ---------------------------------------------------------------------------
# boundary location
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Target:
    """``kind`` is ``"homoclinic_axis"`` (track ``root``) or ``"delta_zero"``.

    ``root`` is a canonical root index of the starting point or a complex
    number near the root to follow.
    """

    kind: str
    root: int | complex | None = None


def homoclinic_axis(root) -> Target:
    return Target("homoclinic_axis", root)


DELTA_ZERO = Target("delta_zero")


def _lerp(a: Params, b: Params, s: float) -> Params:
    return Params(a.e1 + s * (b.e1 - a.e1), a.e0 + s * (b.e0 - a.e0))


def _track(a: Params, b: Params, z0: complex, n: int = 64):
    """Follow a simple root from ``a`` to ``b``; returns a callable ``s -> z``."""
    ss = np.linspace(0.0, 1.0, n + 1)
    zs = [complex(z0)]
    for s in ss[1:]:
        p = _lerp(a, b, s)
        r = solve_cubic(p)
        d = [abs(w - zs[-1]) for w in r.roots]
        order = np.argsort(d)
        if not r.distinct or d[order[1]] < 3 * d[order[0]]:
            raise TrackingError(f"root continuation ambiguous near s={s:.4g}")
        zs.append(r.roots[order[0]])

    def z_of(s: float) -> complex:
        k = min(int(s * n), n - 1)
        z = zs[k] + (s * n - k) * (zs[k + 1] - zs[k])
        p = _lerp(a, b, s)
        for _ in range(50):
            dz = eval_poly(p, z) / eval_deriv(p, z)
            z -= dz
            if abs(dz) <= 1e-16 * max(1.0, abs(z)):
                break
        return z

    return z_of


def locate_boundary(p_start: Params, p_end: Params, target: Target,
                    tol: Tolerances = DEFAULT) -> Params:
    """Point on the segment ``p_start -> p_end`` where ``target`` is crossed.

    For ``homoclinic_axis`` the indicator is ``Re P'(z(s))`` along the
    continued root; for ``delta_zero`` it is the component of ``Delta(s)``
    along ``Delta(p_start)``.  The sign change is refined with Brent's method
    until the indicator is at most ``tol.locate``.
    """
    a, b = Params(*p_start), Params(*p_end)
    if target.kind == "homoclinic_axis":
        r0 = solve_cubic(a, tol).roots
        z0 = r0[target.root] if isinstance(target.root, (int, np.integer)) else \
            min(r0, key=lambda z: abs(z - complex(target.root)))
        z_of = _track(a, b, z0)

        def f(s):
            p = _lerp(a, b, s)
            return eval_deriv(p, z_of(s)).real
    elif target.kind == "delta_zero":
        d0 = discriminant(a)
        if d0 == 0:
            return a
        u = d0 / abs(d0)

        def f(s):
            return (discriminant(_lerp(a, b, s)) * u.conjugate()).real
    else:
        raise ValueError(f"unknown target {target.kind!r}")

    fa, fb = f(0.0), f(1.0)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise NotBracketedError("indicator has the same sign at both ends of the segment")
    s = optimize.brentq(f, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    p = _lerp(a, b, s)
    val = abs(f(s))
    if target.kind == "delta_zero":
        val = abs(discriminant(p)) / max(1.0, abs(4 * p.e1 ** 3) + abs(27 * p.e0 ** 2))
        if val > tol.locate:
            raise NotBracketedError("the segment does not meet the discriminant locus")
    elif val > tol.locate * max(1.0, p.scale ** 2):
        raise TrackingError(f"indicator {val:.3g} above tolerance at the located point")
    return p


def rotate_stratum(st: Stratum) -> Stratum:
    """Stratum of ``rotate_params(p)`` given the stratum of ``p``.

    The rotation turns the separatrix picture by a quarter turn, so every
    quadrant index moves up by one and the two generic classes swap.
    """
    shift = lambda i: _wrap_q(i + 1)  # noqa: E731
    if st.tag == "GenericW1":
        return Stratum("GenericW2")
    if st.tag == "GenericW2":
        return Stratum("GenericW1")
    if st.tag == "FigureEight":
        return Stratum("FigureEight", (2, 4) if tuple(st.indices) == (1, 3) else (1, 3))
    if st.tag == "ParabolicRegular":
        a, b = (shift(i) for i in st.indices)
        return Stratum("ParabolicRegular", (a, b))
    if st.tag in ("Homoclinic", "ParabolicCenter"):
        return Stratum(st.tag, tuple(shift(i) for i in st.indices))
    return Stratum(st.tag)
