import math

import numpy as np
import pytest

from cubic_strata.core import Params
from cubic_strata.fixtures import FIXTURES


def random_params(rng, n, scale=1.0):
    """``n`` parameter points with standard normal complex coordinates."""
    out = []
    for _ in range(n):
        x = rng.normal(size=4) * scale
        out.append(Params(complex(x[0], x[1]), complex(x[2], x[3])))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(FIXTURES))
def fixture_point(request):
    return (request.param,) + FIXTURES[request.param]


@pytest.fixture
def circle():
    def make(center, radius, n=64):
        t = 2 * math.pi * np.arange(n) / n
        return center + radius * np.exp(1j * t)
    return make


# --- one pass/fail line per acceptance criterion ---------------------------

def pytest_configure(config):
    config.acceptance_results = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    res = getattr(config, "acceptance_results", {})
    if not res:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(res):
        ok, title, detail = res[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")


class _Criterion:
    def __init__(self, config, number, title):
        self.config, self.number, self.title = config, number, title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = "; ".join(self.details)
        if not ok:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        self.config.acceptance_results[self.number] = (ok, self.title, detail)
        print(f"criterion {self.number}: {'PASS' if ok else 'FAIL'}  {self.title}  [{detail}]")
        return False


@pytest.fixture
def criterion(request):
    def make(number, title):
        return _Criterion(request.config, number, title)
    return make
