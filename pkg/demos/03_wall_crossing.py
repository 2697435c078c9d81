"""Follow the loop times across the homoclinic wall through (-3+i, 2-i).

On either side of the wall the field is structurally stable and carries two
loop times in the upper half-plane.  Approaching the wall, the loop that
shrinks onto the centre tends to a real number whose modulus is the period
of the centre; the other loop time jumps by that amount.

Run:  python3 demos/03_wall_crossing.py
"""

import math

from cubic_strata.core import Params
from cubic_strata.invariants import crossing_table, tau_pair


def main():
    print("loop times along e1 = -3+i + s, e0 = 2-i")
    for s in (-0.02, -0.005, -0.001, 0.001, 0.005, 0.02):
        inv = tau_pair(Params(-3 + 1j + s, 2 - 1j))
        pairs = ", ".join(f"tau{a}{b} = {t:.6f}" for (a, b), t in inv.by_label().items())
        print(f"  s = {s:+.3f}  {inv.w_class}:  {pairs}")

    rep = crossing_table(Params(-3.02 + 1j, 2 - 1j), Params(-2.98 + 1j, 2 - 1j))
    lim = rep.limits
    print(f"\nwall crossed: H{rep.crossed}, centre period 2 pi / |lambda| = {lim.tau1:.12f}"
          f" (2 pi = {2 * math.pi:.12f})")
    for side, d in (("W2", lim.w2), ("W1", lim.w1)):
        for (a, b), v in d.items():
            print(f"  limit on the {side} side of tau{a}{b}: {v:.10f}")
    print(f"crossing row {rep.row}: residual {rep.residual:.2e} ({'ok' if rep.passed else 'FAILED'})")
    for k, v in lim.signed_residuals().items():
        print(f"  {k:16s} {v:.2e}")


if __name__ == "__main__":
    main()
