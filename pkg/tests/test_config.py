import json

import pytest

from cubic_strata.config import ENV_VAR, RunConfig, Tolerances, load, load_run_config


def test_defaults():
    t = Tolerances()
    assert t.axis == 1e-9 and t.band_axis == 1e-3 and t.grid_n == 201


def test_banded():
    assert Tolerances().banded().axis == 1e-3


def test_round_trip():
    t = Tolerances(axis=1e-7, max_steps=10)
    assert Tolerances.from_dict(t.as_dict()) == t


def test_unknown_key():
    with pytest.raises(ValueError, match="unknown"):
        Tolerances.from_dict({"bogus": 1})


def test_load_from_env(tmp_path, monkeypatch):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"tolerances": {"axis": 1e-6}, "threads": 3}))
    monkeypatch.setenv(ENV_VAR, str(f))
    assert load().axis == 1e-6
    rc = load_run_config()
    assert rc.threads == 3 and rc.tolerances.axis == 1e-6
    assert load_run_config(threads=2).threads == 2


def test_flat_file(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"rel_tol": 1e-9, "seed": 7}))
    assert load(str(f)).rel_tol == 1e-9
    assert load_run_config(str(f)).seed == 7


def test_no_file(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert load() == Tolerances()


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(fmt="xml")
    with pytest.raises(ValueError):
        RunConfig(threads=0)
