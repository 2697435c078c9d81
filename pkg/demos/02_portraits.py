"""Write phase portraits of a few fixtures as SVG files.

Run:  python3 demos/02_portraits.py [out_dir]
"""

import os
import sys

from cubic_strata.core import Params
from cubic_strata.render import PortraitStyle, portrait_svg

POINTS = {
    "w1": Params(-1, 0),
    "homoclinic": Params(-3 + 1j, 2 - 1j),
    "figure_eight": Params(-14j, -12 + 12j),
    "zero": Params(0, 0),
}


def main(out_dir="demo_out"):
    os.makedirs(out_dir, exist_ok=True)
    style = PortraitStyle(trajectory_seeds=8)
    for name, p in POINTS.items():
        path = os.path.join(out_dir, f"portrait_{name}.svg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(portrait_svg(p, style=style))
        print("wrote", path)


if __name__ == "__main__":
    main(*sys.argv[1:])
