"""Sample a slice of parameter space around the homoclinic fixture.

With a coarse axis band the codimension-one walls show up as thin bands of
cells separating the two generic classes.

Run:  python3 demos/04_slice_map.py [n] [out_dir]
"""

import os
import sys
import time

from cubic_strata.atlas import SliceSpec, adjacency_report, sample_slice
from cubic_strata.render import slice_svg


def main(n="81", out_dir="demo_out"):
    n = int(n)
    os.makedirs(out_dir, exist_ok=True)
    spec = SliceSpec.around(-3 + 1j, 2 - 1j, 0.02, n=n)
    t0 = time.perf_counter()
    grid = sample_slice(spec)
    print(f"{n}x{n} cells in {time.perf_counter() - t0:.1f}s: {grid.counts()}")
    base = os.path.join(out_dir, spec.filename()[:-4])
    with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
        grid.to_csv(fh)
    with open(base + ".svg", "w", encoding="utf-8") as fh:
        fh.write(slice_svg(grid))
    print(adjacency_report(grid).to_json())
    print("wrote", base + ".csv", "and", base + ".svg")


if __name__ == "__main__":
    main(*sys.argv[1:])
