"""Algebra of the monic depressed cubic family ``P(z) = z**3 + e1*z + e0``.

Roots are obtained in closed form (Cardano with the numerically stable
branch choice) and then polished with Newton steps.  Everything here is a
pure function of immutable values.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances

_EPS = np.finfo(float).eps
_OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)
_OMEGA2 = _OMEGA.conjugate()


class ChartError(ValueError):
    """Raised when a parameter point cannot be normalized to the requested chart."""


@dataclass(frozen=True)
class Params:
    """Parameter point ``(e1, e0)`` of ``z**3 + e1*z + e0``."""

    e1: complex
    e0: complex

    def __post_init__(self):
        e1, e0 = complex(self.e1), complex(self.e0)
        if not (cmath.isfinite(e1) and cmath.isfinite(e0)):
            raise ValueError(f"parameters must be finite, got ({e1}, {e0})")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e0", e0)

    @property
    def norm(self) -> float:
        return math.hypot(abs(self.e1), abs(self.e0))

    @property
    def scale(self) -> float:
        """Natural length scale of the roots, at least 1."""
        return max(1.0, abs(self.e1) ** 0.5, abs(self.e0) ** (1.0 / 3.0))

    def __iter__(self):
        yield self.e1
        yield self.e0


@dataclass(frozen=True)
class CubicRoots:
    roots: tuple[complex, complex, complex]
    pattern: str  # "1+1+1", "2+1" or "3"

    @property
    def distinct(self) -> bool:
        return self.pattern == "1+1+1"

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, i):
        return self.roots[i]

    def double_index(self) -> int | None:
        """Index of the first entry of the double root, if any."""
        if self.pattern != "2+1":
            return None
        r = self.roots
        for i in range(3):
            for j in range(i + 1, 3):
                if r[i] == r[j]:
                    return i
        return None

    def simple_index(self) -> int | None:
        if self.pattern != "2+1":
            return None
        r = self.roots
        for i in range(3):
            if sum(r[i] == r[k] for k in range(3)) == 1:
                return i
        return None


@dataclass(frozen=True)
class Spectrum:
    lambdas: tuple[complex, complex, complex]

    def __iter__(self):
        return iter(self.lambdas)

    def __getitem__(self, i):
        return self.lambdas[i]

    def residue_sum(self) -> complex:
        return sum(1.0 / lam for lam in self.lambdas)


def eval_poly(p: Params, z: complex) -> complex:
    return z * z * z + p.e1 * z + p.e0


def eval_deriv(p: Params, z: complex) -> complex:
    return 3.0 * z * z + p.e1


def discriminant(p: Params) -> complex:
    return -4.0 * p.e1**3 - 27.0 * p.e0**2


def _cardano(e1: complex, e0: complex) -> list[complex]:
    if e1 == 0 and e0 == 0:
        return [0j, 0j, 0j]
    half_q = e0 / 2.0
    third_p = e1 / 3.0
    sq = cmath.sqrt(half_q * half_q + third_p**3)
    # pick the branch that avoids cancellation
    a = -half_q + sq
    b = -half_q - sq
    u3 = a if abs(a) >= abs(b) else b
    if u3 == 0:
        # e1 == 0 as well as e0 == 0 is handled above; here e1**3 == -27/4 e0**2 == 0
        return [0j, 0j, 0j]
    u = u3 ** (1.0 / 3.0)
    v = -third_p / u
    return [u + v, _OMEGA * u + _OMEGA2 * v, _OMEGA2 * u + _OMEGA * v]


def _polish(p: Params, z: complex, steps: int) -> complex:
    best, fbest = z, abs(eval_poly(p, z))
    for _ in range(steps):
        d = eval_deriv(p, best)
        if d == 0:
            break
        cand = best - eval_poly(p, best) / d
        fc = abs(eval_poly(p, cand))
        if not fc < fbest:
            break
        best, fbest = cand, fc
    return best


def _round_key(z: complex, step: float):
    return (round(z.real / step) * step, round(z.imag / step) * step)


def _is_numerically_double(p: Params, zi: complex, zj: complex, tol: Tolerances) -> bool:
    """Backward-error test: is the midpoint a double root up to rounding of the coefficients?"""
    mid = 0.5 * (zi + zj)
    size = abs(mid) ** 3 + abs(p.e1) * abs(mid) + abs(p.e0)
    dsize = 3 * abs(mid) ** 2 + abs(p.e1)
    return (abs(eval_poly(p, mid)) <= tol.merge_backward * _EPS * size
            and abs(eval_deriv(p, mid)) <= math.sqrt(tol.merge_backward * _EPS) * max(dsize, 1e-300))


def solve_cubic(p: Params, tol: Tolerances = DEFAULT) -> CubicRoots:
    """Three roots with multiplicity, in canonical (Re, Im) order.

    Closed form followed by ``tol.newton_steps`` Newton corrections per root.
    Two roots are merged into a double root when they are closer than
    ``tol.merge_rel * max(1, |zi|, |zj|)`` or when their midpoint passes a
    backward-error test for a double root.

    Examples
    --------
    >>> solve_cubic(Params(-1, 0)).roots
    ((-1+0j), 0j, (1+0j))
    """
    if p.e1 == 0 and p.e0 == 0:
        return CubicRoots((0j, 0j, 0j), "3")
    zs = [_polish(p, z, tol.newton_steps) for z in _cardano(p.e1, p.e0)]

    pairs = []
    for i in range(3):
        for j in range(i + 1, 3):
            d = abs(zs[i] - zs[j])
            close = d <= tol.merge_rel * max(1.0, abs(zs[i]), abs(zs[j]))
            if close or _is_numerically_double(p, zs[i], zs[j], tol):
                pairs.append((d, i, j))
    pattern = "1+1+1"
    if pairs:
        # with e != 0 the roots cannot all coincide; merge only the closest pair
        _, i, j = min(pairs)
        mid = 0.5 * (zs[i] + zs[j])
        # a double root is a critical point; snap to the nearer root of P'
        crit = cmath.sqrt(-p.e1 / 3.0)
        dbl = crit if abs(crit - mid) <= abs(crit + mid) else -crit
        if abs(dbl - mid) > 10 * tol.merge_rel * max(1.0, abs(mid)):
            dbl = mid
        zs = [dbl, dbl, -2.0 * dbl]
        pattern = "2+1"
    zs.sort(key=lambda z: _round_key(z, tol.order_round))
    return CubicRoots(tuple(zs), pattern)


def spectrum(p: Params, r: CubicRoots) -> Spectrum:
    """Eigenvalues ``P'(z_j)``, exactly zero on multiple roots."""
    lams = []
    for i, z in enumerate(r.roots):
        multiple = sum(z == w for w in r.roots) > 1
        lams.append(0j if multiple else eval_deriv(p, z))
    return Spectrum(tuple(lams))


def scale_params(p: Params, delta: float) -> Params:
    """Conic action ``(e1, e0) -> (delta**2 e1, delta**3 e0)``; roots scale by ``delta``."""
    if not (delta > 0 and math.isfinite(delta)):
        raise ValueError(f"scale factor must be a positive real, got {delta!r}")
    return Params(delta**2 * p.e1, delta**3 * p.e0)


def rotate_params(p: Params) -> Params:
    """Order-4 symmetry ``z -> i z`` with time reversal: ``(e1, e0) -> (-e1, -i e0)``."""
    return Params(-p.e1, -1j * p.e0)


def reflect_params(p: Params) -> Params:
    """Conjugation by ``z -> -z``: ``(e1, e0) -> (e1, -e0)``."""
    return Params(p.e1, -p.e0)


def sphere_delta(p: Params) -> float:
    """Positive ``delta`` with ``|delta**2 e1|**2 + |delta**3 e0|**2 == 1``."""
    a, b = abs(p.e1) ** 2, abs(p.e0) ** 2
    if a == 0 and b == 0:
        raise ChartError("the origin has no image on the unit sphere")
    if b == 0:
        return a ** -0.25
    if a == 0:
        return b ** (-1.0 / 6.0)
    # b x**3 + a x**2 - 1 = 0 in x = delta**2 has exactly one positive root
    x = min(a ** -0.5, b ** (-1.0 / 3.0))
    for _ in range(100):
        f = b * x**3 + a * x**2 - 1.0
        step = f / (3 * b * x**2 + 2 * a * x)
        x -= step
        if abs(step) <= 4 * _EPS * x:
            break
    return math.sqrt(x)


def normalize_chart(p: Params, chart: str = "sphere") -> tuple[Params, float]:
    """Rescale ``p`` onto the unit sphere (``"sphere"``) or onto ``|e1| = 1`` (``"e1_unit"``)."""
    if chart == "sphere":
        d = sphere_delta(p)
    elif chart == "e1_unit":
        if p.e1 == 0:
            raise ChartError("e1_unit chart is undefined when e1 == 0")
        d = abs(p.e1) ** -0.5
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return scale_params(p, d), d


def chart_radius(p: Params, factor: float = 10.0) -> float:
    return factor * p.scale
