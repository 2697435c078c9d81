"""Named parameter points with known strata.

Each entry maps a name to ``(Params, tag, indices)``; ``indices`` is None
where only the tag is fixed by construction.
"""

from __future__ import annotations

import math

from .core import Params

_A = (1 + 1j) / math.sqrt(6.0)

FIXTURES = {
    "zero": (Params(0, 0), "EpsilonZero", ()),
    "w1": (Params(-1, 0), "GenericW1", ()),
    "w2": (Params(1, 0), "GenericW2", ()),
    "homoclinic": (Params(-3 + 1j, 2 - 1j), "Homoclinic", (1,)),
    "figure_eight": (Params(-14j, -12 + 12j), "FigureEight", (1, 3)),
    "figure_eight_sym": (Params(1j, 0), "FigureEight", (2, 4)),
    "parabolic": (Params(-3, 2), "ParabolicRegular", (4, 1)),
    "parabolic_center": (Params(-3 * _A ** 2, 2 * _A ** 3), "ParabolicCenter", (1,)),
}
