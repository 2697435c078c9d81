"""Compiled stepping kernel for ``dz/ds = c * P(z)`` on the Riemann sphere.

One routine does all the work so that a whole separatrix trace runs
without returning to the interpreter:

* Dormand-Prince 5(4) with PI step control;
* the finite chart ``z`` for ``|z| <= R`` and the chart ``w = 1/z`` beyond,
  switching exactly on ``|z| = R`` (located by regula falsi on the step length);
* landing detection at simple roots (invariant disk and one-turn trapping
  region) and at double roots (parabolic petal);
* matching of outward crossings of ``|z| = R`` against given directions;
* an optional stop after one full turn about a chosen root (return time).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EV_LANDED = 0
EV_INFINITY = 1
EV_TIME = 2
EV_STEP_FAIL = 3
EV_MATCH = 4
EV_PERIOD = 5
EV_END = 6
EV_BUFFER = 7

EVENT_NAMES = {
    EV_LANDED: "landed",
    EV_INFINITY: "reached_infinity",
    EV_TIME: "time_exhausted",
    EV_STEP_FAIL: "step_failure",
    EV_MATCH: "matched",
    EV_PERIOD: "period",
    EV_END: "end",
    EV_BUFFER: "time_exhausted",
}

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _f(y, chart, c, e1, e0):
    if chart == 0:
        return c * (y * y * y + e1 * y + e0)
    return -c * (1.0 / y + e1 * y + e0 * y * y)


@njit(cache=True, nogil=True)
def _rk_step(y, k1, h, chart, c, e1, e0):
    k2 = _f(y + h * (_A21 * k1), chart, c, e1, e0)
    k3 = _f(y + h * (_A31 * k1 + _A32 * k2), chart, c, e1, e0)
    k4 = _f(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3), chart, c, e1, e0)
    k5 = _f(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), chart, c, e1, e0)
    k6 = _f(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), chart, c, e1, e0)
    y5 = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
    k7 = _f(y5, chart, c, e1, e0)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return y5, err, k7


@njit(cache=True, nogil=True)
def _wrap(a):
    while a > math.pi:
        a -= TWO_PI
    while a <= -math.pi:
        a += TWO_PI
    return a


@njit(cache=True, nogil=True)
def _angle_between(u_old, u_new):
    # signed angle from u_old to u_new, in (-pi, pi]
    q = u_new / u_old
    return math.atan2(q.imag, q.real)


@njit(cache=True, nogil=True)
def _to_z(y, chart):
    if chart == 0:
        return y
    return 1.0 / y


@njit(cache=True, nogil=True)
def _solve_modulus(y, k1, h, chart, c, e1, e0, target):
    """Step length ``hh`` in (0, h] with ``|y(hh)| == target`` (Illinois regula falsi)."""
    a, fa = 0.0, abs(y) - target
    b = h
    yb, _, _ = _rk_step(y, k1, b, chart, c, e1, e0)
    fb = abs(yb) - target
    if fa >= 0.0:
        return 0.0, y
    side = 0
    best_h, best_y = b, yb
    for _ in range(60):
        m = (a * fb - b * fa) / (fb - fa)
        ym, _, _ = _rk_step(y, k1, m, chart, c, e1, e0)
        fm = abs(ym) - target
        best_h, best_y = m, ym
        if abs(fm) <= 1e-14 * target or abs(b - a) <= 1e-16 * abs(h):
            break
        if fm * fb > 0:
            b, fb = m, fm
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = m, fm
            if side == 1:
                fb *= 0.5
            side = 1
    return best_h, best_y


@njit(cache=True, nogil=True)
def _solve_turn(y, k1, h, chart, c, e1, e0, zr, u_start, theta_start, target):
    """Step length at which the unwrapped angle about ``zr`` reaches ``target``."""
    a, fa = 0.0, theta_start - target
    b = h
    yb, _, _ = _rk_step(y, k1, b, chart, c, e1, e0)
    fb = theta_start + _angle_between(u_start, _to_z(yb, chart) - zr) - target
    side = 0
    best_h, best_y = b, yb
    for _ in range(80):
        m = (a * fb - b * fa) / (fb - fa)
        ym, _, _ = _rk_step(y, k1, m, chart, c, e1, e0)
        fm = theta_start + _angle_between(u_start, _to_z(ym, chart) - zr) - target
        best_h, best_y = m, ym
        if abs(fm) <= 1e-15 or abs(b - a) <= 1e-16 * abs(h):
            break
        if fm * fb > 0:
            b, fb = m, fm
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = m, fm
            if side == 1:
                fb *= 0.5
            side = 1
    return best_h, best_y


@njit(cache=True, nogil=True)
def _ray_hit(z_old, z_new, zr, d):
    """Intersection of the chord ``z_old -> z_new`` with the ray ``zr + r d``; returns r."""
    # solve z_old + s (z_new - z_old) = zr + r d for real s, r
    v = z_new - z_old
    w0 = z_old - zr
    det = v.real * (-d.imag) - v.imag * (-d.real)
    if det == 0.0:
        return abs(z_new - zr)
    s = (w0.real * d.imag - w0.imag * d.real) / det
    r = (v.real * w0.imag - v.imag * w0.real) / det
    r = -r
    if s < 0.0 or s > 1.0 or r <= 0.0:
        return abs(z_old + min(max(s, 0.0), 1.0) * v - zr)
    return r


@njit(cache=True, nogil=True)
def _transversal(zr, lam, d, r_lo, r_hi, sgn):
    """Does the flow cross the segment ``zr + r d`` (r in [r_lo, r_hi]) with constant sign?"""
    # Im(conj(d) P(zr + r d)) / r = Im(lam) + r Im(3 zr d) + r^2 Im(d^2), times the time sign
    a0 = lam.imag
    a1 = (3.0 * zr * d).imag
    a2 = (d * d).imag
    vals = np.empty(3)
    vals[0] = a0 + a1 * r_lo + a2 * r_lo * r_lo
    vals[1] = a0 + a1 * r_hi + a2 * r_hi * r_hi
    n = 2
    if a2 != 0.0:
        rv = -a1 / (2.0 * a2)
        if r_lo < rv < r_hi:
            vals[2] = a0 + a1 * rv + a2 * rv * rv
            n = 3
    pos = True
    neg = True
    for i in range(n):
        v = vals[i] * sgn
        if not v > 0.0:
            pos = False
        if not v < 0.0:
            neg = False
    return pos or neg


@njit(cache=True, nogil=True)
def _winding(zs, i0, i1, z_first, z_last, zr):
    """Winding number about ``zr`` of the closed polygon z_first, zs[i0:i1], z_last, z_first."""
    tot = 0.0
    prev = z_first - zr
    for i in range(i0, i1):
        cur = zs[i] - zr
        tot += _angle_between(prev, cur)
        prev = cur
    cur = z_last - zr
    tot += _angle_between(prev, cur)
    tot += _angle_between(cur, z_first - zr)
    return tot / TWO_PI


@njit(cache=True, nogil=True)
def integrate_kernel(e1, e0, c, z0, R, roots, lams, nroots,
                     s_end, rel_tol, abs_tol, max_time, max_steps,
                     landing_radius, detect_landing,
                     match_angles, match_tol, inf_radius,
                     period_root,
                     out_s, out_z, out_chart):
    """Integrate from ``z0`` and return ``(event, arg, n_samples, s, z_end, extra)``.

    ``roots``/``lams`` hold the ``nroots`` distinct roots and their eigenvalues
    (zero marks a double root).  ``c`` is the complex time direction; landing
    is only meaningful for real ``c``.  ``s_end <= 0`` means no fixed end time.
    ``extra`` carries the crossing angle for matches and the hit direction for
    ``EV_INFINITY``.
    """
    cap = out_s.shape[0]
    sgn = 1.0 if c.real >= 0.0 else -1.0
    Rinv = 1.0 / R
    chart = 0
    y = z0
    if abs(z0) > R:
        chart = 1
        y = 1.0 / z0
    s = 0.0
    n = 0
    out_s[0] = 0.0
    out_z[0] = z0
    out_chart[0] = chart
    n = 1

    # per-root bookkeeping for the trapping test
    theta = np.zeros(3)
    ref_idx = np.zeros(3, dtype=np.int64)
    ref_z = np.empty(3, dtype=np.complex128)
    r_disk = np.zeros(3)
    compatible = np.zeros(3, dtype=np.bool_)
    for j in range(nroots):
        ref_z[j] = z0
        lam = lams[j]
        if lam != 0:
            rel = (c * lam).real
            compatible[j] = rel < 0.0
            al = abs(lam)
            ad = abs(lam.real) / al
            a = abs(3.0 * roots[j] / lam)
            b = 1.0 / al
            r_disk[j] = (-a + math.sqrt(a * a + 2.0 * b * ad)) / (2.0 * b)

    z_prev = z0
    # period bookkeeping
    p_theta = 0.0
    p_u0 = 0j
    if period_root >= 0:
        p_u0 = z0 - roots[period_root]

    k1 = _f(y, chart, c, e1, e0)
    # initial step from the local time scale
    fy = abs(k1)
    h = 1e-2 * max(abs(y), 1e-6) / max(fy, 1e-300)
    if s_end > 0.0:
        h = min(h, s_end)
    err_prev = 1e-4
    steps = 0
    # smallest step, relative to the local time scale |y| / |f(y)|
    h_min_rel = 1e-13

    while True:
        if steps >= max_steps:
            return EV_TIME, -1, n, s, _to_z(y, chart), 0.0
        steps += 1
        if s_end > 0.0 and s + h > s_end:
            h = s_end - s
        y_new, err, k7 = _rk_step(y, k1, h, chart, c, e1, e0)
        scale = abs_tol + rel_tol * max(abs(y), abs(y_new))
        errn = abs(err) / scale
        if not (errn == errn) or errn > 1.0 or not (abs(y_new) < 1e300):
            if not (errn == errn) or errn > 1e300:
                fac = 0.2
            else:
                fac = max(0.2, 0.9 * errn ** -0.2)
            h *= fac
            if h < h_min_rel * abs(y) / max(abs(k1), 1e-300) or h < 1e-300:
                return EV_STEP_FAIL, -1, n, s, _to_z(y, chart), 0.0
            continue

        z_new = _to_z(y_new, chart)
        # keep steps from sweeping large angles about nearby roots
        too_big = False
        for j in range(nroots):
            dth = _angle_between(z_prev - roots[j], z_new - roots[j])
            if abs(dth) > 1.0:
                too_big = True
        if too_big:
            h *= 0.5
            continue

        h_acc = h
        switched = False
        match_hit = -1
        cross_angle = 0.0
        # chart exits are located exactly on |z| = R
        if chart == 0 and abs(y_new) > R:
            h_acc, y_new = _solve_modulus(y, k1, h, chart, c, e1, e0, R)
            z_new = y_new
            switched = True
            cross_angle = math.atan2(z_new.imag, z_new.real)
            for m in range(match_angles.shape[0]):
                if abs(_wrap(cross_angle - match_angles[m])) <= match_tol:
                    match_hit = m
        elif chart == 1 and abs(y_new) > Rinv:
            h_acc, y_new = _solve_modulus(y, k1, h, chart, c, e1, e0, Rinv)
            z_new = 1.0 / y_new
            switched = True

        # one turn about the period root
        if period_root >= 0:
            zr = roots[period_root]
            dth = _angle_between(z_prev - zr, z_new - zr)
            if abs(p_theta + dth) >= TWO_PI:
                target = TWO_PI if p_theta + dth > 0 else -TWO_PI
                hh, yy = _solve_turn(y, k1, h_acc, chart, c, e1, e0, zr, z_prev - zr, p_theta, target)
                s += hh
                zz = _to_z(yy, chart)
                if n < cap:
                    out_s[n] = s
                    out_z[n] = zz
                    out_chart[n] = chart
                    n += 1
                return EV_PERIOD, period_root, n, s, zz, abs(zz - zr) / abs(p_u0)
            p_theta += dth

        s += h_acc
        if switched:
            if chart == 0:
                chart = 1
                y = 1.0 / y_new
            else:
                chart = 0
                y = 1.0 / y_new
            k1 = _f(y, chart, c, e1, e0)
        else:
            y = y_new
            k1 = k7

        if n >= cap:
            return EV_BUFFER, -1, n, s, z_new, 0.0
        out_s[n] = s
        out_z[n] = z_new
        out_chart[n] = chart
        n += 1

        if match_hit >= 0:
            return EV_MATCH, match_hit, n, s, z_new, cross_angle

        if chart == 1 and abs(y) < inf_radius:
            ang = math.atan2(-y.imag, y.real)
            return EV_INFINITY, -1, n, s, z_new, ang

        if detect_landing and chart == 0:
            for j in range(nroots):
                zr = roots[j]
                u = z_new - zr
                r = abs(u)
                lam = lams[j]
                if lam == 0:
                    # double root: P = u^2 (3 zr + u); petal where Re(-1/(3 zr u)) has the time sign
                    a3 = 3.0 * zr
                    if r <= landing_radius or (r <= 0.05 * abs(zr) and
                                               (-sgn / (a3 * u)).real >= 0.5 * abs(1.0 / (a3 * u))):
                        return EV_LANDED, j, n, s, z_new, 0.0
                    continue
                if compatible[j] and (r <= landing_radius or r <= r_disk[j]):
                    return EV_LANDED, j, n, s, z_new, 0.0
                dth = _angle_between(z_prev - zr, u)
                t_old = theta[j]
                t_new = t_old + dth
                if t_old != 0.0 and t_old * t_new <= 0.0:
                    # back across the reference ray: restart the window here
                    theta[j] = 0.0
                    ref_idx[j] = n - 1
                    ref_z[j] = z_new
                    continue
                if abs(t_new) >= TWO_PI:
                    zref = ref_z[j]
                    dref = (zref - zr) / abs(zref - zr)
                    r_ref = abs(zref - zr)
                    r_c = _ray_hit(z_prev, z_new, zr, dref)
                    ok = compatible[j] and r_c < r_ref
                    if ok:
                        zc = zr + r_c * dref
                        for k in range(nroots):
                            if k == j:
                                continue
                            wnd = _winding(out_z, ref_idx[j] + 1, n - 1, zref, zc, roots[k])
                            if abs(wnd) > 0.5:
                                ok = False
                        if ok:
                            wj = _winding(out_z, ref_idx[j] + 1, n - 1, zref, zc, zr)
                            if abs(abs(wj) - 1.0) > 0.5:
                                ok = False
                        if ok:
                            ok = _transversal(zr, lam, dref, r_c, r_ref, 1.0)
                    if ok:
                        return EV_LANDED, j, n, s, z_new, 0.0
                    theta[j] = 0.0
                    ref_idx[j] = n - 1
                    ref_z[j] = z_new
                else:
                    theta[j] = t_new
        z_prev = z_new

        if s_end > 0.0 and s >= s_end * (1.0 - 1e-15):
            return EV_END, -1, n, s, z_new, 0.0
        if s >= max_time:
            return EV_TIME, -1, n, s, z_new, 0.0

        # PI controller
        errn = max(errn, 1e-10)
        fac = 0.9 * errn ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
        fac = min(5.0, max(0.2, fac))
        err_prev = errn
        h = h_acc * fac if not switched else h * fac
        if h < h_min_rel * abs(y) / max(abs(k1), 1e-300):
            return EV_STEP_FAIL, -1, n, s, z_new, 0.0
