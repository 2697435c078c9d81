import math

import numpy as np
import pytest

from cubic_strata import flow
from cubic_strata.classify import classify
from cubic_strata.core import Params, rotate_params, scale_params, solve_cubic, spectrum
from cubic_strata.fixtures import FIXTURES
from cubic_strata.invariants import (DsInvariant, InvariantError, crossing_table,
                                     homoclinic_period, loop_windings, pullback_loop, residue_tau,
                                     richardson, table_residual, tau_pair, verify_limits)

from conftest import random_params

PI = math.pi
H_PATH = (Params(-3.02 + 1j, 2 - 1j), Params(-2.98 + 1j, 2 - 1j))


class TestResidueTau:
    def test_upper_half_plane(self):
        for lam in (1, -1, 1 + 5j, -2 - 1j, 0.001 + 1j):
            assert residue_tau(lam).imag > 0

    def test_value(self):
        assert residue_tau(2) == pytest.approx(PI * 1j)
        assert residue_tau(-1) == pytest.approx(2j * PI)

    def test_axis_rejected(self):
        for lam in (0, 3j):
            with pytest.raises(InvariantError):
                residue_tau(lam)


class TestTauPair:
    def test_w1_fixture(self):
        inv = tau_pair(Params(-1, 0))
        assert inv.tau_a == pytest.approx(PI * 1j, abs=1e-12)
        assert inv.tau_b == pytest.approx(PI * 1j, abs=1e-12)
        assert inv.w_class == "W1" and inv.quadrant_pairs == ((2, 3), (1, 4))

    def test_w2_fixture(self):
        inv = tau_pair(Params(1, 0))
        assert inv.tau_a == pytest.approx(PI * 1j) and inv.tau_b == pytest.approx(PI * 1j)
        assert inv.quadrant_pairs == ((1, 2), (3, 4))
        # the loops go around the two roots +-i with eigenvalue -2
        roots = solve_cubic(Params(1, 0)).roots
        assert sorted(roots[j].imag for j in inv.enclosed_roots) == pytest.approx([-1, 1])

    def test_as_dict_format(self):
        d = tau_pair(Params(-1, 0)).as_dict()
        assert d["tau_a"] == "0.0+3.141592653589793i"
        assert set(d) == {"tau_a", "tau_b", "quadrant_pairs", "enclosed_roots", "w_class"}

    def test_by_label(self):
        inv = tau_pair(Params(-1, 0))
        assert set(inv.by_label()) == {(2, 3), (1, 4)}

    def test_not_generic(self):
        with pytest.raises(InvariantError):
            tau_pair(FIXTURES["homoclinic"][0])

    def test_upper_half_plane_random(self, rng):
        for p in random_params(rng, 200):
            inv = tau_pair(p, verify=False)
            assert inv.tau_a.imag > 0 and inv.tau_b.imag > 0

    def test_windings_single_out_enclosed_root(self, rng):
        for p in random_params(rng, 30):
            inv = tau_pair(p)
            for w, j in zip(inv.windings, inv.enclosed_roots):
                assert abs(w[j]) == 1 and sum(abs(x) for x in w) == 1

    def test_quadrature_oracle(self, rng):
        pts = [Params(-1, 0), Params(1, 0)] + random_params(rng, 20)
        for p in pts:
            inv = tau_pair(p)
            for poly, tau in zip(inv.loops, (inv.tau_a, inv.tau_b)):
                assert flow.path_time(p, poly, closed=True) == pytest.approx(tau, rel=1e-6)

    @pytest.mark.parametrize("delta", [0.5, 2.0])
    def test_scaling_law(self, rng, delta):
        for p in random_params(rng, 20):
            a = tau_pair(p, verify=False)
            b = tau_pair(scale_params(p, delta), verify=False)
            assert b.quadrant_pairs == a.quadrant_pairs
            assert b.tau_a == pytest.approx(a.tau_a / delta ** 2, rel=1e-9)
            assert b.tau_b == pytest.approx(a.tau_b / delta ** 2, rel=1e-9)

    def test_rotation_swaps_labels(self, rng):
        for p in random_params(rng, 10):
            a = tau_pair(p, verify=False)
            b = tau_pair(rotate_params(p), verify=False)
            assert {a.w_class, b.w_class} == {"W1", "W2"}
            # time reversal with the quarter turn keeps the set of loop times
            assert sorted([a.tau_a, a.tau_b], key=abs) == \
                pytest.approx(sorted([b.tau_a, b.tau_b], key=abs), rel=1e-12)


class TestPullback:
    def test_wrong_time_misses(self):
        p = Params(-1, 0)
        _, miss_ok = pullback_loop(p, 3, PI * 1j)
        _, miss_bad = pullback_loop(p, 3, 0.8 * PI * 1j)
        assert miss_ok < 1e-8 and miss_bad > 1e-3

    def test_loop_windings(self, circle):
        c = circle(0, 1.0)
        w = loop_windings(np.append(c, c[0]), [0, 5])
        assert w == pytest.approx((1.0, 0.0), abs=1e-12)


class TestHomoclinicPeriod:
    def test_fixture(self):
        p = FIXTURES["homoclinic"][0]
        r = solve_cubic(p).roots
        j = min(range(3), key=lambda i: abs(r[i] - 1))
        assert homoclinic_period(p, j) == pytest.approx(2 * PI, rel=1e-12)

    def test_figure_eight(self):
        p = FIXTURES["figure_eight"][0]
        lam = spectrum(p, solve_cubic(p))
        j = min(range(3), key=lambda i: abs(lam[i] + 8j))
        assert homoclinic_period(p, j) == pytest.approx(PI / 4, rel=1e-12)

    def test_generic_rejected(self):
        with pytest.raises(InvariantError):
            homoclinic_period(Params(-1, 0), 1)

    def test_off_axis_root_rejected(self):
        p = FIXTURES["homoclinic"][0]
        r = solve_cubic(p).roots
        j = max(range(3), key=lambda i: abs(r[i] - 1))
        with pytest.raises(InvariantError):
            homoclinic_period(p, j)


class TestRichardson:
    def test_quadratic_is_exact(self):
        vals = [3 + 2 * d + 5 * d * d for d in (0.1 / 2 ** k for k in range(6))]
        est, err = richardson(vals, 2.0, 2)
        assert est == pytest.approx(3, abs=1e-12)
        # the indicator is the change from the first-order estimate, of size 5 d^2
        assert 0 < err < 5 * (0.1 / 2 ** 4) ** 2

    def test_needs_levels(self):
        with pytest.raises(ValueError):
            richardson([1, 2], 2.0, 2)


class TestTable:
    def test_rows(self):
        t12, t34 = 1 + 1j, 2 + 3j
        s = t12 + t34
        assert table_residual("I", t12, t34, -t12, s) == 0
        assert table_residual("II", t12, t34, s, -t12) == 0
        assert table_residual("III", t12, t34, s, -t34) == 0
        assert table_residual("IV", t12, t34, -t34, s) == 0
        with pytest.raises(ValueError):
            table_residual("V", 0, 0, 0, 0)


class TestCrossing:
    def test_row_one(self):
        rep = crossing_table(*H_PATH)
        assert rep.crossed == 1 and rep.row == "I"
        assert rep.residual <= 1e-4 and rep.passed
        assert rep.as_dict()["crossed"] == "H1"

    def test_rotated_path_gives_next_row(self):
        a, b = (rotate_params(q) for q in H_PATH)
        rep = crossing_table(a, b)
        assert rep.crossed == 2 and rep.row == "II" and rep.passed

    def test_signed_limits(self):
        rep = verify_limits(*H_PATH)
        assert rep.quadrant == 1 and rep.tau1 == pytest.approx(2 * PI, rel=1e-9)
        signed = rep.signed_residuals()
        # both one-sided limits are real, opposite, of modulus tau1; the other loop
        # times pick up the centre limit
        assert all(v <= 1e-6 for v in signed.values()), signed
        # the W2-side limit of the shrinking loop is -tau1 here (Im tau > 0 convention)
        assert rep.center_w2 == pytest.approx(-2 * PI, abs=1e-6)
        assert rep.center_w1 == pytest.approx(2 * PI, abs=1e-6)

    def test_limit_samples_approach(self):
        rep = verify_limits(*H_PATH)
        near = rep.w2_samples[-1].by_label()[(1, 2)]
        far = rep.w2_samples[0].by_label()[(1, 2)]
        assert abs(near - rep.center_w2) < abs(far - rep.center_w2)

    def test_no_crossing(self):
        with pytest.raises(InvariantError):
            verify_limits(Params(-1, 0), Params(-1.1, 0))

    def test_same_sign_path(self):
        # a path along the wall (Re e0 direction) stays in one class
        with pytest.raises(InvariantError):
            verify_limits(Params(-3 + 1j, 1.98 - 1j), Params(-3 + 1j, 2.02 - 1j))
