"""Single tolerance record shared by every module.

Defaults can be overridden from a JSON file whose path is given by the
``CUBIC_STRATA_CONFIG`` environment variable, or programmatically with
:meth:`Tolerances.replace`.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

ENV_VAR = "CUBIC_STRATA_CONFIG"


@dataclass(frozen=True)
class Tolerances:
    # cubic_core
    merge_rel: float = 1e-8
    merge_backward: float = 64.0  # multiples of machine eps for the double-root residual test
    order_round: float = 1e-12
    newton_steps: int = 2
    # classify
    axis: float = 1e-9
    band_axis: float = 1e-3
    zero: float = 1e-12
    locate: float = 1e-10
    # flow
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 1e4
    max_steps: int = 200_000
    chart_factor: float = 10.0
    landing_radius: float = 1e-6
    homoclinic_match: float = 1e-6
    infinity_hit: float = 1e-10
    near_parabolic_gap: float = 1e-4
    near_parabolic_factor: float = 100.0
    center_seed: float = 1e-3
    center_period_rel: float = 1e-6
    quad_rel: float = 1e-10
    # ds_invariants
    richardson_d0: float = 1e-2
    richardson_levels: int = 8
    limit_tol: float = 1e-4
    # atlas
    grid_n: int = 201

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def banded(self) -> "Tolerances":
        """Copy with the coarse axis band used for grid sampling."""
        return self.replace(axis=self.band_axis)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        base = cls()
        kw = {}
        for key, value in data.items():
            kw[key] = type(getattr(base, key))(value)
        return cls(**kw)


def load(path: str | os.PathLike | None = None) -> Tolerances:
    """Defaults, overridden by the JSON file at ``path`` or ``$CUBIC_STRATA_CONFIG``."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return Tolerances()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "tolerances" in data and isinstance(data["tolerances"], dict):
        data = data["tolerances"]
    return Tolerances.from_dict({k: v for k, v in data.items() if k not in _RUN_KEYS})


DEFAULT = Tolerances()
_RUN_KEYS = ("out_dir", "fmt", "seed", "threads")


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run depends on."""

    tolerances: Tolerances = field(default_factory=Tolerances)
    out_dir: str = "."
    fmt: str = "json"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.fmt not in ("csv", "json", "svg"):
            raise ValueError(f"unknown output format {self.fmt!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def load_run_config(path: str | os.PathLike | None = None, **overrides) -> RunConfig:
    """Run settings from the same JSON file as :func:`load`.

    Besides the tolerance keys (top level or under ``"tolerances"``) the file
    may hold ``out_dir``, ``fmt``, ``seed`` and ``threads``.  Keyword
    arguments that are not None win over the file.
    """
    if path is None:
        path = os.environ.get(ENV_VAR)
    data = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    run_keys = set(_RUN_KEYS)
    if isinstance(data.get("tolerances"), dict):
        tol = Tolerances.from_dict(data["tolerances"])
    else:
        tol = Tolerances.from_dict({k: v for k, v in data.items() if k not in run_keys})
    kw = {k: data[k] for k in run_keys if k in data}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(tolerances=tol, **kw)
