"""Command line interface: ``drlambda run|estimate|verify|sweep|scenario list``.

Exit codes are 0 when the verdict is Pass, 2 when it is Fail and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..regularity import DEFAULT_RADIUS, DEFAULT_SAMPLES, DEFAULT_SEED, predicted_rate
from .runner import (DEFAULT_MAX_ITER, DEFAULT_TOL, PASS, _json_default, estimate_quantity,
                     run_scenario, sweep_lambda, verify)
from .scenarios import builtin_scenarios, get_scenario

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _csv_floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drlambda", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="iterate a scenario from its seeds and write a report")
    r.add_argument("--scenario", required=True, help="built-in name or path to a JSON file")
    r.add_argument("--lambda", dest="lam", type=float, required=True)
    r.add_argument("--x0", type=_csv_floats, help="single start point, comma separated")
    r.add_argument("--tol", type=float, default=DEFAULT_TOL)
    r.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    r.add_argument("--out", help="directory for trace.csv and report.json")

    e = sub.add_parser("estimate", help="sample one regularity constant")
    e.add_argument("--scenario", required=True)
    e.add_argument("--lambda", dest="lam", type=float, required=True)
    e.add_argument("--quantity", required=True,
                   choices=["epsilon", "alpha", "kappa", "kappa-prime", "sigma", "rate"])
    e.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    e.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    e.add_argument("--seed", type=int, default=DEFAULT_SEED)

    v = sub.add_parser("verify", help="run a named verification check")
    v.add_argument("--scenario", required=True)
    v.add_argument("--lambda", dest="lam", type=float, required=True)
    v.add_argument("--check", required=True,
                   choices=["fixedpoint", "w0", "monotonicity", "shift-subtransversality"])

    s = sub.add_parser("sweep", help="run a scenario over several lambdas")
    s.add_argument("--scenario", required=True)
    s.add_argument("--lambdas", type=_csv_floats, required=True)

    sc = sub.add_parser("scenario", help="scenario catalog")
    sc.add_argument("action", choices=["list"])
    return p


def _print_json(obj):
    print(json.dumps(obj, indent=2, default=_json_default))


def _cmd_run(args):
    overrides = {"tol": args.tol, "max_iter": args.max_iter}
    if args.x0 is not None:
        overrides["seeds"] = [args.x0]
    rep = run_scenario(args.scenario, args.lam, overrides)
    if args.out:
        rep.write(args.out)
    for t in rep.traces:
        print(f"seed={t['seed']} status={t['status']} steps={t['steps']} final={t['final']}")
    for k, v in rep.verdicts.items():
        print(f"{k}: {v}")
    print(f"verdict: {rep.verdict}")
    return EXIT_PASS if rep.verdict == PASS else EXIT_FAIL


def _cmd_estimate(args):
    scn = get_scenario(args.scenario)
    if args.quantity == "rate":
        kappa = estimate_quantity(scn, args.lam, "kappa", args.radius, args.samples, args.seed)
        alpha = estimate_quantity(scn, args.lam, "alpha", args.radius, args.samples, args.seed)
        pred = predicted_rate(alpha.estimate, 0.5, kappa.estimate)
        _print_json({"quantity": "PredictedRate", "estimate": pred.c,
                     "conditionOk": pred.condition_ok, "epsilon": alpha.estimate,
                     "kappa": kappa.estimate, "samples": args.samples, "seed": args.seed})
        return EXIT_PASS
    rep = estimate_quantity(scn, args.lam, args.quantity, args.radius, args.samples, args.seed)
    print(rep.to_json())
    return EXIT_PASS


def _cmd_verify(args):
    scn = get_scenario(args.scenario)
    ok, details = verify(scn, args.lam, args.check)
    _print_json({"check": args.check, "passed": bool(ok), "details": details})
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_sweep(args):
    sw = sweep_lambda(args.scenario, args.lambdas)
    for r in sw.reports:
        print(f"lambda={r.lam}: {r.verdict}")
    print(f"monotonicity: {sw.monotonicity if sw.monotonicity else 'skipped'}")
    _print_json(sw.shadows)
    print(f"verdict: {sw.verdict}")
    return EXIT_PASS if sw.verdict == PASS else EXIT_FAIL


def _cmd_scenario(args):
    for s in builtin_scenarios():
        print(f"{s.name:28s} {s.description}")
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "estimate": _cmd_estimate, "verify": _cmd_verify,
               "sweep": _cmd_sweep, "scenario": _cmd_scenario}[args.command]
    try:
        return handler(args)
    except (KeyError, ValueError, FileNotFoundError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
