"""Command line interface.

Exit codes: 0 success, 2 usage error, 3 unresolved or not computable,
4 a checked property failed.

Examples
--------
::

    cubic-strata classify --e1=-1+0i --e0=0+0i
    cubic-strata tau --e1=-1+0i --e0=0+0i
    cubic-strata slice --e1=-3+1i --e0=2-1i --width 0.02 --grid 201 --out maps
    cubic-strata delta --chart=e1_unit --n=256
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import atlas, flow, invariants, render
from .classify import classify, rotate_stratum
from .config import RunConfig, load_run_config
from .core import ChartError, Params, rotate_params, scale_params, solve_cubic, spectrum
from .fixtures import FIXTURES

EXIT_OK, EXIT_USAGE, EXIT_UNRESOLVED, EXIT_PROPERTY = 0, 2, 3, 4

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^\s*([+-]?{_NUM})([+-])({_NUM})?i\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` / ``a-bi`` (sign between the parts is required)."""
    m = _COMPLEX.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected a complex number like 1.5-2i, got {text!r}")
    re_, sign, im = m.groups()
    im = float(im) if im is not None else 1.0
    return complex(float(re_), -im if sign == "-" else im)


def parse_bounds(text: str) -> tuple:
    try:
        b = tuple(float(x) for x in text.split(","))
    except ValueError:
        b = ()
    if len(b) != 4 or not all(math.isfinite(x) for x in b) or b[0] >= b[1] or b[2] >= b[3]:
        raise argparse.ArgumentTypeError("bounds must be re_min,re_max,im_min,im_max")
    return b


def _fmt(z: complex) -> str:
    return invariants._cfmt(z)


def _emit(obj, args, text: str | None = None):
    if args.json or text is None:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def _params(args) -> Params:
    return Params(args.e1, args.e0)


def _outfile(cfg: RunConfig, out: str | None, default_name: str) -> str:
    """``out`` is a file name, or a directory if it exists or ends in a separator."""
    path = out or os.path.join(cfg.out_dir, default_name)
    if os.path.isdir(path) or path.endswith(("/", os.sep)):
        path = os.path.join(path, default_name)
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args, cfg: RunConfig) -> int:
    st, cert = classify(_params(args), cfg.tolerances)
    doc = {"stratum": str(st), "tag": st.tag, "indices": list(st.indices),
           "diagnostic": st.diagnostic, "certificate": cert.to_dict(), "digest": cert.digest()}
    _emit(doc, args, f"{st}\n{cert.to_json(indent=2)}")
    return EXIT_UNRESOLVED if st.tag == "Unresolved" else EXIT_OK


def cmd_portrait(args, cfg: RunConfig) -> int:
    p = _params(args)
    style = render.PortraitStyle(trajectory_seeds=args.n or 0)
    traces = flow.trace_separatrices(p, tol=cfg.tolerances)
    svg = render.portrait_svg(p, traces, style=style, tol=cfg.tolerances)
    path = _outfile(cfg, args.out, f"portrait_e1={atlas._cstr(p.e1)}_e0={atlas._cstr(p.e0)}.svg")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
    doc = {"svg": path, "outcomes": [t.outcome for t in traces]}
    _emit(doc, args, path)
    return EXIT_UNRESOLVED if any(not t.resolved for t in traces) else EXIT_OK


def cmd_slice(args, cfg: RunConfig) -> int:
    n = args.grid or cfg.tolerances.grid_n
    band = args.tol_axis if args.tol_axis is not None else cfg.tolerances.band_axis
    if args.bounds is not None:
        spec = atlas.SliceSpec(args.e1, n, n, args.bounds, chart=args.chart, band=band)
    else:
        spec = atlas.SliceSpec.around(args.e1, args.e0, args.width, n, chart=args.chart, band=band)
    t0 = time.perf_counter()
    grid = atlas.sample_slice(spec, cfg.tolerances, threads=cfg.threads)
    elapsed = time.perf_counter() - t0
    out = args.out
    if out and not out.endswith(".csv"):
        out = os.path.join(out, "")
    csv_path = _outfile(cfg, out, spec.filename())
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        grid.to_csv(fh)
    base = csv_path[:-4]
    with open(base + ".svg", "w", encoding="utf-8") as fh:
        fh.write(render.slice_svg(grid))
    rep = atlas.adjacency_report(grid)
    with open(base + "_adjacency.json", "w", encoding="utf-8") as fh:
        fh.write(rep.to_json() + "\n")
    doc = {"csv": csv_path, "svg": base + ".svg", "adjacency": base + "_adjacency.json",
           "counts": grid.counts(), "csv_sha256": grid.csv_digest(),
           "seconds": round(elapsed, 3), "warnings": rep.warnings}
    _emit(doc, args)
    return EXIT_OK


def cmd_delta(args, cfg: RunConfig) -> int:
    chart = args.chart if args.chart != "e1_fixed" else "e1_unit"
    knot = atlas.trace_delta_knot(args.n or 256, chart)
    text = knot.to_csv()
    if args.out:
        path = _outfile(cfg, args.out, f"delta_{chart}_{len(knot.a)}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(json.dumps({"csv": path, "marks": knot.marks,
                          "delta_residual": knot.delta_residual,
                          "torus_residual": knot.torus_residual,
                          "winding": [knot.winding_e1, knot.winding_e0]}, indent=2))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_tau(args, cfg: RunConfig) -> int:
    p = _params(args)
    try:
        inv = invariants.tau_pair(p, tol=cfg.tolerances, verify=not args.no_verify)
    except (invariants.InvariantError, flow.FlowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    _emit(inv.as_dict(), args)
    return EXIT_OK


def cmd_cross(args, cfg: RunConfig) -> int:
    a = Params(args.e1, args.e0)
    b = Params(args.to_e1 if args.to_e1 is not None else args.e1,
               args.to_e0 if args.to_e0 is not None else args.e0)
    try:
        rep = invariants.crossing_table(a, b, cfg.tolerances)
    except (invariants.InvariantError, flow.FlowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    doc = rep.as_dict()
    doc["limits"] = rep.limits.as_dict()
    _emit(doc, args)
    return EXIT_OK if rep.passed else EXIT_PROPERTY


def _verify_checks(cfg: RunConfig):
    tol = cfg.tolerances
    rng = np.random.default_rng(cfg.seed)

    def residue_sums():
        worst = 0.0
        for _ in range(200):
            p = Params(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
            r = solve_cubic(p, tol)
            inv = [1 / l for l in spectrum(p, r)]
            worst = max(worst, abs(sum(inv)) / max(abs(x) for x in inv))
        return worst <= 1e-10, f"max relative |sum 1/lambda| = {worst:.2e}"

    def root_residuals():
        worst = 0.0
        for _ in range(200):
            p = Params(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
            for z in solve_cubic(p, tol).roots:
                worst = max(worst, abs(z ** 3 + p.e1 * z + p.e0) / max(1.0, abs(z)) ** 3)
        return worst <= 1e-10, f"max scaled residual = {worst:.2e}"

    def fixtures():
        bad = [n for n, (p, tag, idx) in FIXTURES.items()
               if (lambda s: s.tag != tag or (idx and tuple(s.indices) != idx))(classify(p, tol)[0])]
        return not bad, "all fixtures" if not bad else f"mismatch: {bad}"

    def rotation():
        bad = []
        for n, (p, _, _) in FIXTURES.items():
            q = p
            for _ in range(4):
                q = rotate_params(q)
            if abs(q.e1 - p.e1) > 1e-15 or abs(q.e0 - p.e0) > 1e-15:
                bad.append(n + " (4 turns)")
            if classify(rotate_params(p), tol)[0] != rotate_stratum(classify(p, tol)[0]):
                bad.append(n)
        return not bad, "equivariant" if not bad else f"failures: {bad}"

    def scaling():
        bad = []
        for n, (p, _, _) in FIXTURES.items():
            s0 = classify(p, tol)[0]
            for d in (0.5, 2.0):
                if classify(scale_params(p, d), tol)[0] != s0:
                    bad.append(f"{n}@{d}")
        return not bad, "invariant" if not bad else f"failures: {bad}"

    def tau_oracle():
        worst = 0.0
        pts = [FIXTURES["w1"][0], FIXTURES["w2"][0]]
        pts += [Params(complex(*rng.normal(size=2)), complex(*rng.normal(size=2))) for _ in range(6)]
        for p in pts:
            inv = invariants.tau_pair(p, tol=tol, verify=True)
            for lp, t in zip(inv.loops, (inv.tau_a, inv.tau_b)):
                worst = max(worst, abs(flow.path_time(p, lp, closed=True, tol=tol) - t) / abs(t))
        return worst <= 1e-6, f"max relative loop-time mismatch = {worst:.2e}"

    def crossing():
        rep = invariants.crossing_table(Params(-3.02 + 1j, 2 - 1j), Params(-2.98 + 1j, 2 - 1j), tol)
        return rep.passed, f"row {rep.row} residual = {rep.residual:.2e}"

    return [("root residuals", root_residuals), ("residue sums", residue_sums),
            ("fixture strata", fixtures), ("rotation", rotation), ("scaling", scaling),
            ("loop times vs quadrature", tau_oracle), ("crossing table", crossing)]


def cmd_verify(args, cfg: RunConfig) -> int:
    results = []
    for name, check in _verify_checks(cfg):
        try:
            ok, msg = check()
        except Exception as exc:  # any crash is a failed property
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        results.append({"check": name, "passed": bool(ok), "detail": msg})
    if args.json:
        print(json.dumps(results, indent=2))
    else:
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']}: {r['detail']}")
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--e1", type=parse_complex, default=0j, help="e1 as a+bi")
    common.add_argument("--e0", type=parse_complex, default=0j, help="e0 as a+bi")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--tol-axis", type=float, default=None, help="imaginary-axis tolerance")
    common.add_argument("--threads", type=int, default=None, help="worker threads for slices")
    common.add_argument("--config", default=None, help="JSON config (default $CUBIC_STRATA_CONFIG)")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled checks")

    ap = argparse.ArgumentParser(prog="cubic-strata",
                                 description="Strata of the cubic field z' = z^3 + e1 z + e0.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="stratum and certificate of a point")
    sp = sub.add_parser("portrait", parents=[common], help="SVG phase portrait")
    sp.add_argument("--n", type=int, default=0, help="number of extra sample orbits")
    sp = sub.add_parser("slice", parents=[common], help="stratum map of an e0 slice")
    sp.add_argument("--chart", choices=("e1_fixed", "e1_unit", "sphere"), default="e1_fixed")
    sp.add_argument("--grid", type=int, default=None, help="cells per side")
    sp.add_argument("--bounds", type=parse_bounds, default=None, help="re_min,re_max,im_min,im_max of e0")
    sp.add_argument("--width", type=float, default=1.0, help="half-width around --e0 when no bounds")
    sp = sub.add_parser("delta", parents=[common], help="double-root knot as CSV")
    sp.add_argument("--chart", choices=("e1_unit", "sphere", "e1_fixed"), default="e1_unit")
    sp.add_argument("--n", type=int, default=256)
    sp = sub.add_parser("tau", parents=[common], help="loop-time invariant of a generic point")
    sp.add_argument("--no-verify", action="store_true", help="skip the pull-back loop check")
    sp = sub.add_parser("cross", parents=[common], help="limits across a homoclinic wall")
    sp.add_argument("--to-e1", type=parse_complex, default=None, help="end point e1")
    sp.add_argument("--to-e0", type=parse_complex, default=None, help="end point e0")
    sub.add_parser("verify", parents=[common], help="run the property checks")
    return ap


COMMANDS = {"classify": cmd_classify, "portrait": cmd_portrait, "slice": cmd_slice,
            "delta": cmd_delta, "tau": cmd_tau, "cross": cmd_cross, "verify": cmd_verify}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_run_config(args.config, threads=args.threads, seed=args.seed)
        if args.tol_axis is not None and args.command != "slice":
            cfg = RunConfig(cfg.tolerances.replace(axis=args.tol_axis), cfg.out_dir, cfg.fmt,
                            cfg.seed, cfg.threads)
    except (OSError, ValueError) as exc:
        ap.print_usage(sys.stderr)
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg)
    except (ValueError, ChartError) as exc:
        ap.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (flow.FlowError, invariants.InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED


if __name__ == "__main__":
    sys.exit(main())
