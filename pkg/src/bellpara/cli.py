"""Command-line entry points and JSON/CSV reports.

Every subcommand writes a report whose ``config`` block is enough to rerun
it (``bellpara replay report.json``).  Thread count, output path and wall
time are kept out of the numeric content so reports are byte-identical
across runs and thread counts.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core_bellman import (
    Coefficients,
    Exponents,
    Region,
    c_constant,
    classify_region,
    coefficients_default,
    eval_A,
    eval_B,
    grad_A,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# options that never influence numeric output
_NOT_ECHOED = {"out", "threads", "timing", "command", "report", "func"}


# ---------------------------------------------------------------------------
# serialization


def _clean(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, Region):
        return region_label(obj)
    return obj


def region_label(region: Region) -> str:
    return "Boundary" if region is Region.BOUNDARY else region.name


def witness_path(path: Path) -> Path:
    return path.with_name(path.stem + ".witnesses.csv")


def write_report(report: dict, path, witnesses: list | None = None) -> None:
    """JSON report (insertion-ordered keys, shortest round-trip floats) plus a
    sibling CSV with one row per violation witness."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_clean(report), fh, indent=2)
        fh.write("\n")
    rows = witnesses or []
    width = max((len(r[1]) for r in rows), default=0)
    with open(witness_path(path), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["check"] + [f"v{i}" for i in range(width)])
        for name, vals in rows:
            wr.writerow([name] + [repr(float(v)) for v in vals])


# ---------------------------------------------------------------------------
# result conversion


def _property_entry(res) -> dict:
    return {
        "name": res.name,
        "samples": res.samples,
        "seed": res.seed,
        "tol": res.tol,
        "worst_margin": res.worst_margin,
        "violations": int(res.violations.shape[0]),
        "skipped": res.skipped,
        "passed": res.passed,
    }


def _property_witnesses(results) -> list:
    rows = []
    for res in results:
        for row in np.atleast_2d(res.violations):
            if row.size:
                rows.append((res.name, row.ravel()))
    return rows


def _scan_entry(rep) -> dict:
    return {
        "region": region_label(rep.region),
        "sign": rep.sign,
        "samples": rep.samples,
        "seed": rep.seed,
        "min_minor_scaled": rep.min_minor_scaled,
        "min_eig_scaled": rep.min_eig_scaled,
        "violations": rep.violation_count,
        "disagreements": rep.disagreements,
        "passed": rep.passed,
    }


# ---------------------------------------------------------------------------
# commands; each returns (results, witnesses, passed)


def _setup(args):
    e = Exponents(args.p, args.q, args.r)
    given = [v is not None for v in (args.A, args.B, args.C)]
    if any(given) and not all(given):
        raise ValueError("give all of --A --B --C or none")
    c = Coefficients(args.A, args.B, args.C) if all(given) else coefficients_default(e)
    return e, c


def cmd_eval(args):
    e, c = _setup(args)
    pt = [float(v) for v in args.point.split(",")]
    if len(pt) not in (3, 6):
        raise ValueError("--point needs 3 values (u,v,w) or 6 (u,v,w,U,V,W)")
    x = np.array(pt[:3])
    entry = {"point": pt, "A": float(eval_A(c, e, x)), "region": region_label(classify_region(x, e)),
             "grad_A": grad_A(c, e, x)}
    if len(pt) == 6:
        entry["B"] = float(eval_B(c, e, np.array(pt)))
    entry["constant"] = c_constant(c, e)
    print(f"A = {entry['A']:.17g}")
    print(f"region = {entry['region']}")
    if "B" in entry:
        print(f"B = {entry['B']:.17g}")
    return [entry], [], True


def cmd_verify_psd(args):
    from .psd_verifier import scan_regions

    e, c = _setup(args)
    reports = scan_regions(c, e, args.samples, args.seed, args.tol_abs, args.tol_rel,
                           args.threads, log_range=(args.log_lo, args.log_hi))
    wit = []
    for rep in reports:
        name = f"{region_label(rep.region)}[{'+' if rep.sign > 0 else '-'}]"
        wit.extend((name, row) for row in rep.violations)
    ok = all(r.passed for r in reports)
    print(f"psd scan: {sum(r.violation_count for r in reports)} violations, "
          f"min scaled minor {min(r.min_minor_scaled for r in reports):.6g}")
    return [_scan_entry(r) for r in reports], wit, ok


def _print_results(results):
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{status}  {r.name:<24} n={r.samples:<7} worst={r.worst_margin:.3e}")


def cmd_verify_properties(args):
    from .property_suite import SUITE, SuiteConfig, run_suite

    e, c = _setup(args)
    names = SUITE if not args.only else tuple(args.only.split(","))
    unknown = set(names) - set(SUITE)
    if unknown:
        raise ValueError(f"unknown properties: {sorted(unknown)}")
    cfg = SuiteConfig(args.samples, args.c1_samples, args.mollified_samples, args.seed,
                      args.tol, args.threads)
    results = run_suite(c, e, cfg, names)
    _print_results(results)
    return [_property_entry(r) for r in results], _property_witnesses(results), \
        all(r.passed for r in results)


def cmd_dyadic(args):
    from .dyadic_model import DyadicConfig, run_battery

    e, c = _setup(args)
    cfg = DyadicConfig(args.trials, args.max_depth, args.induction_depth, args.bellman_points,
                       args.bellman_depth, args.bellman_iters, args.seed)
    results = run_battery(c, e, cfg)
    _print_results(results)
    return [_property_entry(r) for r in results], _property_witnesses(results), \
        all(r.passed for r in results)


def cmd_martingale(args):
    from .martingale_sim import MartingaleConfig, run_battery

    e, c = _setup(args)
    parts = tuple(int(v) for v in args.partitions.split(","))
    cfg = MartingaleConfig(args.trials, args.depth, args.paths, parts, args.seed,
                           threads=args.threads)
    results = run_battery(c, e, cfg)
    _print_results(results)
    return [_property_entry(r) for r in results], _property_witnesses(results), \
        all(r.passed for r in results)


def cmd_heat(args):
    from .heat_model import HeatConfig, run_battery

    e, c = _setup(args)
    cfg = HeatConfig(triples=args.triples, seed=args.seed, eps=args.eps,
                     lambda_triples=args.lambda_triples)
    results = run_battery(c, e, cfg)
    _print_results(results)
    return [_property_entry(r) for r in results], _property_witnesses(results), \
        all(r.passed for r in results)


def cmd_search(args):
    from .coeff_search import FeasibilitySpec, search_coefficients

    e, _ = _setup(args)
    spec = FeasibilitySpec(e, args.samples, args.seed, threads=args.threads)
    rep = search_coefficients(e, spec, args.budget, args.c_grid)
    c = rep.coefficients
    entry = {
        "A": c.A, "B": c.B, "C": c.C,
        "constant": rep.constant,
        "default_constant": rep.default_constant,
        "evaluations": rep.evaluations,
        "validated": rep.validated,
        "validation_seed": rep.validation_seed,
        "samples_per_region": rep.samples_per_region,
        "label": rep.label,
    }
    ok = rep.validated and rep.constant <= rep.default_constant
    print(f"A = {c.A:.17g}  B = {c.B:.17g}  C = {c.C:.17g}")
    print(f"constant = {rep.constant:.17g} (defaults {rep.default_constant:.17g}), {rep.label}")
    return [entry], [], ok


COMMANDS = {
    "eval": cmd_eval,
    "verify-psd": cmd_verify_psd,
    "verify-properties": cmd_verify_properties,
    "dyadic-test": cmd_dyadic,
    "martingale-sim": cmd_martingale,
    "heat-test": cmd_heat,
    "search-coeffs": cmd_search,
}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellpara", description="Bellman-function paraproduct checks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--q", type=float, default=6.0)
        sp.add_argument("--r", type=float, default=3.0)
        sp.add_argument("--A", type=float)
        sp.add_argument("--B", type=float)
        sp.add_argument("--C", type=float)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, help="JSON report path (CSV witnesses written alongside)")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--timing", action="store_true", help="include wall time in the report")
        return sp

    sp = common(sub.add_parser("eval", help="evaluate A (and B) at a point"))
    sp.add_argument("--point", required=True, help="u,v,w or u,v,w,U,V,W")

    sp = common(sub.add_parser("verify-psd", help="sampled PSD scan of the reduced matrices"))
    sp.add_argument("--samples", type=int, default=100_000, help="per region and sign")
    sp.add_argument("--tol-abs", type=float, default=1e-12)
    sp.add_argument("--tol-rel", type=float, default=1e-9)
    sp.add_argument("--log-lo", type=float, default=1e-3)
    sp.add_argument("--log-hi", type=float, default=1e3)

    sp = common(sub.add_parser("verify-properties", help="randomized inequality scans"))
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--c1-samples", type=int, default=1_000)
    sp.add_argument("--mollified-samples", type=int, default=1_000)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--only", default="", help="comma-separated property names")

    sp = common(sub.add_parser("dyadic-test", help="dyadic identities and estimates"))
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--max-depth", type=int, default=10)
    sp.add_argument("--induction-depth", type=int, default=8)
    sp.add_argument("--bellman-points", type=int, default=0)
    sp.add_argument("--bellman-depth", type=int, default=6)
    sp.add_argument("--bellman-iters", type=int, default=20)

    sp = common(sub.add_parser("martingale-sim", help="martingale paraproduct checks"))
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.add_argument("--partitions", default="16,64,256,1024")

    sp = common(sub.add_parser("heat-test", help="heat-flow paraproduct checks"))
    sp.add_argument("--triples", type=int, default=10)
    sp.add_argument("--lambda-triples", type=int, default=3)
    sp.add_argument("--eps", type=float, default=1e-4)

    sp = common(sub.add_parser("search-coeffs", help="search for a smaller constant"))
    sp.add_argument("--samples", type=int, default=10_000, help="per region and sign")
    sp.add_argument("--budget", type=int, default=80)
    sp.add_argument("--c-grid", type=int, default=5)

    sp = sub.add_parser("replay", help="rerun the config embedded in a report")
    sp.add_argument("report", type=Path)
    sp.add_argument("--out", type=Path)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--timing", action="store_true")
    return parser


def _config(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in vars(args).items() if k not in _NOT_ECHOED}


def run(args) -> tuple[dict, list, bool]:
    start = time.perf_counter()
    results, wit, ok = COMMANDS[args.command](args)
    report = {
        "tool": "bellpara",
        "version": __version__,
        "command": args.command,
        "config": _config(args),
        "results": results,
        "summary": {
            "verdict": "pass" if ok else "fail",
            "checks": len(results),
            "witnesses": len(wit),
        },
    }
    if getattr(args, "timing", False):
        report["wall_time"] = time.perf_counter() - start
    return report, wit, ok


def _replay(args) -> int:
    stored = json.loads(Path(args.report).read_text())
    parser = build_parser()
    base = parser.parse_args([stored["command"]] + (["--point", "0,0,0"] if stored["command"] == "eval" else []))
    for k, v in stored["config"].items():
        setattr(base, k, v)
    base.threads, base.timing, base.out = args.threads, args.timing, args.out
    report, wit, ok = run(base)
    if args.out:
        write_report(report, args.out, wit)
    same = report["summary"]["verdict"] == stored["summary"]["verdict"]
    identical = _clean(report["results"]) == stored["results"]
    print(f"replay: verdict {report['summary']['verdict']} "
          f"({'matches' if same else 'differs from'} stored), results "
          f"{'identical' if identical else 'differ'}")
    if not same:
        return EXIT_FAIL
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        if args.command == "replay":
            return _replay(args)
        report, wit, ok = run(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.out:
        write_report(report, args.out, wit)
    print(f"verdict: {report['summary']['verdict']}")
    return EXIT_PASS if ok else EXIT_FAIL


cli_dispatch = main

if __name__ == "__main__":
    sys.exit(main())
