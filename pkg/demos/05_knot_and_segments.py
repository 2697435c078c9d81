"""The double-root locus and the figure-eight segments in the |e1| = 1 chart.

Run:  python3 demos/05_knot_and_segments.py
"""

from cubic_strata.atlas import figure_eight_segments, trace_delta_knot
from cubic_strata.classify import classify
from cubic_strata.core import Params


def main():
    k = trace_delta_knot(256, "e1_unit")
    print(f"knot: {len(k.a)} samples, max |Delta| {k.delta_residual:.1e}, "
          f"windings e1={k.winding_e1} e0={k.winding_e0}")
    for p in k.mark_params:
        print(f"  centre-type point e1={p.e1:.4f} e0={p.e0:.4f}: {classify(p)[0]}")
    for s in figure_eight_segments(100):
        lo, hi = s.endpoints
        print(f"segment at e1={s.e1}: e0 from {lo:.6f} to {hi:.6f} "
              f"(closed form error {s.endpoint_error:.1e})")
        mid = Params(s.e1, s.e0[len(s.e0) // 3])
        print(f"  interior sample {mid.e0:.4f}: {classify(mid)[0]}")


if __name__ == "__main__":
    main()
