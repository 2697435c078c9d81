"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line and the session
summary repeats them.  Tolerances are the stated ones.
"""

import math
import time

import numpy as np
import pytest

from cubic_strata import flow
from cubic_strata.atlas import SliceSpec, adjacency_report, knot_closed_under_rotation, \
    sample_slice, trace_delta_knot
from cubic_strata.classify import Stratum, classify, rotate_stratum
from cubic_strata.core import Params, eval_poly, rotate_params, scale_params, solve_cubic, spectrum
from cubic_strata.fixtures import FIXTURES
from cubic_strata.invariants import crossing_table, tau_pair, verify_limits

from conftest import random_params

PI = math.pi


def test_criterion_1_algebraic_core(criterion):
    with criterion(1, "algebraic core on 1000 random points") as c:
        rng = np.random.default_rng(1)
        t0 = time.perf_counter()
        worst_res = worst_sum = 0.0
        n = 0
        while n < 1000:
            p = random_params(rng, 1)[0]
            r = solve_cubic(p)
            if not r.distinct:
                continue
            n += 1
            for z in r:
                worst_res = max(worst_res, abs(eval_poly(p, z)) / max(1.0, abs(z)) ** 3)
            sp = spectrum(p, r)
            worst_sum = max(worst_sum, abs(sp.residue_sum()) / max(abs(1 / l) for l in sp))
        dt = time.perf_counter() - t0
        c.note(f"residual {worst_res:.1e}, residue sum {worst_sum:.1e}, {dt:.2f}s")
        assert worst_res <= 1e-10
        assert worst_sum <= 1e-10


def test_criterion_2_delta_knot(criterion):
    with criterion(2, "discriminant knot") as c:
        k = trace_delta_knot(256, "e1_unit")
        c.note(f"|Delta| {k.delta_residual:.1e}, torus {k.torus_residual:.1e}, "
               f"marks {len(k.marks)}, winding ({k.winding_e1},{k.winding_e0})")
        assert k.delta_residual <= 1e-12
        assert k.torus_residual <= 1e-12
        assert len(k.marks) == 4 and len(k.mark_params) == 4
        assert knot_closed_under_rotation(k)
        assert (k.winding_e1, k.winding_e0) == (2, 3)


def _sorted_imag(lams):
    return sorted(lams, key=lambda z: (z.imag, z.real))


def test_criterion_3_fixtures(criterion):
    with criterion(3, "fixture classifications") as c:
        got = {name: classify(p)[0] for name, (p, _, _) in FIXTURES.items()}
        c.note(", ".join(f"{n}={s}" for n, s in got.items()))
        assert got["zero"].tag == "EpsilonZero"
        assert got["w1"].tag == "GenericW1"
        assert got["w2"].tag == "GenericW2"
        assert got["homoclinic"].tag == "Homoclinic"
        assert got["figure_eight"].tag == "FigureEight"
        p = FIXTURES["figure_eight"][0]
        lam = _sorted_imag(spectrum(p, solve_cubic(p)))
        assert max(abs(a - b) for a, b in zip(lam, [-8j, 10j, 40j])) <= 1e-10
        assert got["figure_eight_sym"].tag == "FigureEight"
        assert got["parabolic"].tag == "ParabolicRegular"
        p = FIXTURES["parabolic"][0]
        r = solve_cubic(p)
        assert abs(spectrum(p, r)[r.simple_index()] - 9) <= 1e-10
        assert got["parabolic_center"].tag == "ParabolicCenter"
        p = FIXTURES["parabolic_center"][0]
        r = solve_cubic(p)
        assert abs(spectrum(p, r)[r.simple_index()] - 3j) <= 1e-10


def test_criterion_4_tracer(criterion):
    with criterion(4, "separatrix tracer") as c:
        p = Params(-1, 0)
        roots = solve_cubic(p).roots
        tr = flow.trace_separatrices(p)
        land = {t.index: (t.outcome, roots[t.root]) for t in tr}
        assert land[2] == ("lands", 0) and land[4] == ("lands", 0)
        assert {land[1][1], land[3][1]} == {-1, 1} and land[1][0] == land[3][0] == "lands"
        assert flow.connecting_graph(p).w_class == "W1"
        p = FIXTURES["homoclinic"][0]
        roots = solve_cubic(p).roots
        tr = flow.trace_separatrices(p)
        loops = [t for t in tr if t.outcome == "homoclinic"]
        c.note(f"(-1,0) landings {[(k, v[1]) for k, v in sorted(land.items())]}; "
               f"loop separatrices {[t.index for t in loops]}")
        assert len(loops) == 2 and loops[0].partner == loops[1].index
        assert all(abs(roots[t.root] - 1) < 1e-12 for t in loops)
        assert sum(t.outcome == "lands" for t in tr) == 2


def test_criterion_5_ds_invariants(criterion, circle):
    with criterion(5, "Douady-Sentenac invariants") as c:
        inv = tau_pair(Params(-1, 0))
        assert abs(inv.tau_a - PI * 1j) <= 1e-8 and abs(inv.tau_b - PI * 1j) <= 1e-8

        # residue against quadrature: every simple root of every fixture, and
        # the realised loops of the generic fixtures
        worst = 0.0
        for name, (p, _, _) in FIXTURES.items():
            r = solve_cubic(p)
            lam = spectrum(p, r)
            simple = [j for j in range(3) if lam[j] != 0]
            for j in simple:
                others = [abs(r[j] - r[k]) for k in range(3) if r[k] != r[j]]
                rad = 0.3 * min(others) if others else 0.3
                t = flow.path_time(p, circle(r[j], rad), closed=True)
                worst = max(worst, abs(t - 2j * PI / lam[j]) / abs(2 * PI / lam[j]))
            if FIXTURES[name][1].startswith("Generic"):
                inv = tau_pair(p)
                for poly, tau in zip(inv.loops, (inv.tau_a, inv.tau_b)):
                    worst = max(worst, abs(flow.path_time(p, poly, closed=True) - tau) / abs(tau))
        assert worst <= 1e-6

        rng = np.random.default_rng(5)
        pts = [Params(-1, 0), Params(1, 0)] + random_params(rng, 20)
        worst_scale = 0.0
        for p in pts:
            a = tau_pair(p, verify=False)
            for d in (0.5, 2.0):
                b = tau_pair(scale_params(p, d), verify=False)
                for x, y in ((a.tau_a, b.tau_a), (a.tau_b, b.tau_b)):
                    worst_scale = max(worst_scale, abs(y - x / d ** 2) / abs(x / d ** 2))
        assert worst_scale <= 1e-9

        n_pos = 0
        pts = random_params(np.random.default_rng(55), 200)
        for p in pts:
            inv = tau_pair(p, verify=False)
            n_pos += inv.tau_a.imag > 0 and inv.tau_b.imag > 0
        c.note(f"quadrature {worst:.1e}, scaling {worst_scale:.1e}, Im>0 {n_pos}/200")
        assert n_pos == 200


def test_criterion_6_center_periods(criterion):
    with criterion(6, "centre periods") as c:
        cases = [("figure_eight_sym", 1j, 2 * PI), ("homoclinic", 1j, 2 * PI),
                 ("figure_eight", -8j, PI / 4)]
        errs = []
        for name, lam_c, expected in cases:
            p = FIXTURES[name][0]
            lam = spectrum(p, solve_cubic(p))
            j = min(range(3), key=lambda i: abs(lam[i] - lam_c))
            errs.append(abs(flow.center_period(p, j) - expected) / expected)
        c.note("relative errors " + ", ".join(f"{e:.1e}" for e in errs))
        assert max(errs) <= 1e-6


def test_criterion_7_homoclinic_crossing(criterion):
    with criterion(7, "homoclinic crossing") as c:
        a, b = Params(-3.02 + 1j, 2 - 1j), Params(-2.98 + 1j, 2 - 1j)
        rep = crossing_table(a, b)
        lim = rep.limits
        tau1 = lim.tau1
        t12_w2 = lim.w2[(1, 2)]
        t14_w1 = lim.w1[(1, 4)]
        t34_w2 = lim.w2[(3, 4)]
        t23_w1 = lim.w1[(2, 3)]
        limit_rel = max(abs(t12_w2 - tau1), abs(-t14_w1 - tau1))
        shift_rel = abs(t23_w1 - (t34_w2 + tau1))
        c.note(f"tau1 {tau1:.9f}, lim W2 tau12 {t12_w2.real:+.9f}, lim W1 tau14 {t14_w1.real:+.9f}, "
               f"limit_rel {limit_rel:.2e}, shift_rel {shift_rel:.2e}, row {rep.row} residual {rep.residual:.1e}")
        assert abs(tau1 - 2 * PI) <= 1e-4
        assert rep.residual <= 1e-4
        assert limit_rel <= 1e-4, "limit relation with the stated signs"
        assert shift_rel <= 1e-4, "shift relation with the stated signs"


def test_criterion_8_slice(criterion):
    with criterion(8, "201x201 slice through the homoclinic wall") as c:
        spec = SliceSpec.around(-3 + 1j, 2 - 1j, 0.02, n=201)
        t0 = time.perf_counter()
        g1 = sample_slice(spec, threads=1)
        t1 = time.perf_counter() - t0
        g2 = sample_slice(spec, threads=4)
        counts = g1.counts()
        rep = adjacency_report(g1)
        c.note(f"counts {counts}, adjacency {rep.pairs}, {t1:.0f}s per run")
        assert counts.get("W1", 0) > 0 and counts.get("W2", 0) > 0
        assert rep.direct_w1_w2 == 0
        assert rep.pairs.get("H|W1", 0) > 0 and rep.pairs.get("H|W2", 0) > 0
        assert g1.csv_digest() == g2.csv_digest()
        assert sample_slice(SliceSpec.around(-3 + 1j, 2 - 1j, 0.02, n=21)).csv_digest() == \
            sample_slice(SliceSpec.around(-3 + 1j, 2 - 1j, 0.02, n=21)).csv_digest()
        assert t1 < 120


def test_criterion_9_symmetry(criterion):
    with criterion(9, "rotation symmetry") as c:
        for name, (p, _, _) in FIXTURES.items():
            assert classify(rotate_params(p))[0] == rotate_stratum(classify(p)[0]), name
            q = p
            for _ in range(4):
                q = rotate_params(q)
            assert abs(q.e1 - p.e1) <= 1e-15 and abs(q.e0 - p.e0) <= 1e-15
        c.note(f"{len(FIXTURES)} fixtures")
