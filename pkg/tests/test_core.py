import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubic_strata.config import Tolerances
from cubic_strata.core import (ChartError, Params, chart_radius, discriminant, eval_deriv,
                               eval_poly, normalize_chart, reflect_params, rotate_params,
                               scale_params, solve_cubic, spectrum, sphere_delta)

from conftest import random_params

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


class TestParams:
    def test_coerces_to_complex(self):
        p = Params(1, 2.5)
        assert isinstance(p.e1, complex) and p.e0 == 2.5 + 0j

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Params(float("nan"), 0)
        with pytest.raises(ValueError):
            Params(0, complex(0, float("inf")))

    def test_unpacks(self):
        e1, e0 = Params(1j, 2)
        assert (e1, e0) == (1j, 2)

    def test_scale_is_at_least_one(self):
        assert Params(0.01, 0.001).scale == 1.0
        assert Params(100, 0).scale == pytest.approx(10.0)
        assert Params(0, 1000).scale == pytest.approx(10.0)


class TestSolveCubic:
    def test_w1_fixture(self):
        r = solve_cubic(Params(-1, 0))
        assert r.pattern == "1+1+1"
        assert r.roots == (-1 + 0j, 0j, 1 + 0j)

    def test_w2_fixture(self):
        r = solve_cubic(Params(1, 0))
        assert np.allclose(r.roots, (-1j, 0, 1j), atol=1e-15)

    def test_triple_root(self):
        r = solve_cubic(Params(0, 0))
        assert r.pattern == "3" and r.roots == (0j, 0j, 0j)

    def test_double_root_is_exact(self):
        r = solve_cubic(Params(-3, 2))
        assert r.pattern == "2+1"
        assert r.roots[r.double_index()] == 1
        assert r.roots[r.simple_index()] == -2

    def test_double_root_from_knot(self):
        a = (1 + 1j) / math.sqrt(6)
        r = solve_cubic(Params(-3 * a * a, 2 * a ** 3))
        assert r.pattern == "2+1"
        assert abs(r.roots[r.double_index()] - a) < 1e-14
        assert abs(r.roots[r.simple_index()] + 2 * a) < 1e-14

    def test_near_double_stays_distinct(self):
        r = solve_cubic(Params(-3, 2 + 1e-6))
        assert r.distinct

    def test_homoclinic_fixture_has_root_one(self):
        r = solve_cubic(Params(-3 + 1j, 2 - 1j))
        assert min(abs(z - 1) for z in r) < 1e-15

    def test_order_is_canonical(self, rng):
        for p in random_params(rng, 50):
            r = solve_cubic(p).roots
            assert list(r) == sorted(r, key=lambda z: (round(z.real, 12), round(z.imag, 12)))

    def test_residuals_random(self, rng):
        for p in random_params(rng, 1000, scale=3.0):
            for z in solve_cubic(p):
                assert abs(eval_poly(p, z)) <= 1e-10 * max(1.0, abs(z)) ** 3

    @settings(max_examples=300, deadline=None)
    @given(cplx, cplx)
    def test_vieta(self, e1, e0):
        p = Params(e1, e0)
        a, b, c = solve_cubic(p).roots
        s = max(1.0, abs(a), abs(b), abs(c))
        assert abs(a + b + c) <= 1e-10 * s
        assert abs(a * b + b * c + c * a - e1) <= 1e-10 * s ** 2
        assert abs(a * b * c + e0) <= 1e-10 * s ** 3

    def test_merge_threshold_is_configurable(self):
        p = Params(-3, 2 + 1e-6)
        loose = Tolerances(merge_rel=1e-2)
        assert solve_cubic(p, loose).pattern == "2+1"


class TestSpectrum:
    def test_values(self):
        lam = spectrum(Params(-14j, -12 + 12j), solve_cubic(Params(-14j, -12 + 12j)))
        assert sorted(lam, key=lambda z: z.imag) == pytest.approx([-8j, 10j, 40j], abs=1e-10)

    def test_multiple_roots_have_zero_eigenvalue(self):
        p = Params(-3, 2)
        lam = spectrum(p, solve_cubic(p))
        assert sorted(abs(l) for l in lam) == [0, 0, 9]

    @settings(max_examples=200, deadline=None)
    @given(cplx, cplx)
    def test_residue_sum(self, e1, e0):
        p = Params(e1, e0)
        r = solve_cubic(p)
        if not r.distinct:
            return
        sp = spectrum(p, r)
        inv = [abs(1 / l) for l in sp]
        # the bound degrades like 1/|Delta| near the discriminant
        gap = min(abs(r[i] - r[j]) for i in range(3) for j in range(i + 1, 3))
        s = max(1.0, *(abs(z) for z in r))
        if gap < 1e-3 * s:
            return
        assert abs(sp.residue_sum()) <= 1e-10 * max(inv)

    def test_eigenvalue_sum_rule(self, rng):
        # sum P'(z_j) = 3 sum z_j^2 + 3 e1 = -6 e1 + 3 e1
        for p in random_params(rng, 100):
            assert sum(spectrum(p, solve_cubic(p))) == pytest.approx(-3 * p.e1, abs=1e-9)


class TestSymmetries:
    def test_discriminant(self):
        assert discriminant(Params(-3, 2)) == 0
        assert discriminant(Params(-1, 0)) == 4

    def test_rotation_has_order_four(self, rng):
        for p in random_params(rng, 100):
            q = p
            for _ in range(4):
                q = rotate_params(q)
            assert abs(q.e1 - p.e1) <= 1e-15 and abs(q.e0 - p.e0) <= 1e-15

    def test_rotation_maps_roots(self, rng):
        # if z is a root of p then i z is a root of the rotated field
        for p in random_params(rng, 50):
            q = rotate_params(p)
            for z in solve_cubic(p):
                assert abs(eval_poly(q, 1j * z)) < 1e-9 * max(1, abs(z)) ** 3

    def test_rotation_reverses_and_turns_eigenvalues(self, rng):
        for p in random_params(rng, 50):
            q = rotate_params(p)
            for z in solve_cubic(p):
                assert eval_deriv(q, 1j * z) == pytest.approx(-eval_deriv(p, z), abs=1e-9)

    def test_reflection_is_involution(self):
        p = Params(1 + 2j, 3 - 1j)
        assert reflect_params(reflect_params(p)) == p
        assert set(np.round(solve_cubic(reflect_params(p)).roots, 10)) == \
            set(np.round([-z for z in solve_cubic(p)], 10))

    @settings(max_examples=100, deadline=None)
    @given(cplx, cplx, st.floats(0.1, 10))
    def test_scaling_scales_roots(self, e1, e0, d):
        p = Params(e1, e0)
        a = solve_cubic(p)
        b = solve_cubic(scale_params(p, d))
        s = max(1.0, *(abs(z) for z in a.roots))
        for z in a:
            assert min(abs(d * z - w) for w in b) <= 1e-8 * d * s

    def test_scale_rejects_bad_delta(self):
        for d in (0, -1, float("inf")):
            with pytest.raises(ValueError):
                scale_params(Params(1, 1), d)


class TestCharts:
    def test_sphere(self, rng):
        for p in random_params(rng, 100):
            q, d = normalize_chart(p, "sphere")
            assert abs(q.e1) ** 2 + abs(q.e0) ** 2 == pytest.approx(1.0, rel=1e-14)
            assert q == scale_params(p, d)

    def test_sphere_axes(self):
        assert sphere_delta(Params(4, 0)) == pytest.approx(0.5)
        assert sphere_delta(Params(0, 8)) == pytest.approx(0.5)

    def test_e1_unit(self):
        q, d = normalize_chart(Params(-3 + 4j, 1), "e1_unit")
        assert abs(q.e1) == pytest.approx(1.0) and d == pytest.approx(1 / math.sqrt(5))

    def test_errors(self):
        with pytest.raises(ChartError):
            normalize_chart(Params(0, 0), "sphere")
        with pytest.raises(ChartError):
            normalize_chart(Params(0, 1), "e1_unit")
        with pytest.raises(ValueError):
            normalize_chart(Params(1, 1), "torus")

    def test_chart_radius(self):
        assert chart_radius(Params(-1, 0)) == 10.0
        assert chart_radius(Params(100, 0), 5.0) == pytest.approx(50.0)
