"""``alpha-lab`` command line.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
errors and violated preconditions.  Reports are JSON; ``--csv`` adds a flat
table and ``--figures DIR`` renders PNGs with matplotlib.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance, cusp, forms, green, lct, toric

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "ALPHA_LAB_SEED"
TIMING_KEYS = {"seconds", "search_seconds", "generated_at"}


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _parse_tol(items: list[str]) -> dict:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects name=value, got {item!r}")
        try:
            v = float(value)
        except ValueError:
            raise UsageError(f"tolerance {name} is not a number: {value!r}") from None
        if name not in acceptance.TOLERANCES:
            raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(acceptance.TOLERANCES)}")
        if not v > 0 or not math.isfinite(v):
            raise UsageError(f"tolerance {name} must be positive and finite, got {value}")
        out[name] = v
    return out


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _emit(args, report: dict, rows: list[dict] | None = None, write_json: bool = True) -> None:
    report = acceptance._jsonable(report)
    if args.no_timestamp:
        report = _strip_timing(report)
    else:
        report = {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"), **report}
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    elif write_json:
        sys.stdout.write(text)
    if args.csv and rows:
        rows = [_strip_timing(acceptance._jsonable(r)) if args.no_timestamp else acceptance._jsonable(r)
                for r in rows]
        fields = list(dict.fromkeys(k for r in rows for k in r))
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(rows)


def _figures_dir(args) -> Path | None:
    return Path(args.figures) if args.figures else None


# subcommands -----------------------------------------------------------------

def _lct_spec(args) -> lct.QuasiHomogSpec:
    if args.preset and args.weights:
        raise UsageError("give either --preset or --weights/--degree, not both")
    if args.weights:
        if args.degree is None:
            raise UsageError("--weights needs --degree")
        try:
            weights = [int(w) for w in args.weights.split(",")]
        except ValueError:
            raise UsageError(f"bad --weights {args.weights!r}") from None
        return lct.brieskorn_spec(weights, args.degree)
    return lct.preset(args.preset or "cusp23")


def cmd_lct(args) -> int:
    spec = _lct_spec(args)
    tol = acceptance.tolerances(args.tol)
    fig_dir = _figures_dir(args)
    if args.estimate_threshold:
        est = lct.estimate_threshold(spec, samples=args.samples, seed=args.seed, kind=args.kind)
        report = lct.lct_report(spec, None, threshold=est)
        predicted = report["threshold_predicted"]
        report["threshold_error"] = abs(est.beta_hat - predicted)
        report["pass"] = report["threshold_error"] <= tol["threshold"]
        _emit(args, report, report["threshold_search"]["evaluations"])
        if fig_dir:
            from . import figures
            figures.lct_threshold(acceptance._jsonable(report), fig_dir)
        return EXIT_PASS if report["pass"] else EXIT_FAIL

    betas = _betas(args)
    reports = []
    rows = []
    ok = True
    for beta in betas:
        sums = lct.partial_sums(spec, beta, R=args.R, samples=args.samples, seed=args.seed, kind=args.kind)
        rep = lct.lct_report(spec, beta, sums=sums)
        expected = 2.0 ** float(lct.scaling_exponent(spec, beta))
        zs = [lct.ratio_zscore(a, b, expected) for a, b in zip(sums.annuli, sums.annuli[1:])]
        rep["ratio_expected"] = expected
        rep["ratio_zscores"] = zs
        scaling_ok = all(z <= tol["ratio_sigmas"] for z in zs)
        predicted_divergent = beta >= rep["threshold_predicted"]
        rep["predicted_divergent"] = predicted_divergent
        if sums.converged:
            rep["status"] = "converged"
        elif sums.divergence_evidence:
            rep["status"] = "divergent"
        else:
            rep["status"] = "inconclusive"
        rep["expected_divergent"] = bool(args.expect_divergent and rep["status"] == "divergent")
        rep["pass"] = bool(scaling_ok and rep["status"] == "converged")
        ok &= rep["pass"]
        reports.append(rep)
        for a, z in zip(sums.annuli, [None] + zs):
            rows.append({"beta": beta, "r": a.r, "mean": a.mean, "stderr": a.stderr, "ratio_z": z})
        if fig_dir:
            from . import figures
            sub = fig_dir if len(betas) == 1 else fig_dir / f"beta_{beta:g}"
            figures.lct_annuli(acceptance._jsonable(rep), sub)
    report = reports[0] if len(reports) == 1 else {"spec": spec.to_json(), "sweep": reports, "pass": ok}
    _emit(args, report, rows)
    return EXIT_PASS if ok else EXIT_FAIL


def _betas(args) -> list[float]:
    if args.sweep:
        try:
            return [float(b) for b in args.sweep.split(",")]
        except ValueError:
            raise UsageError(f"bad --sweep {args.sweep!r}") from None
    if args.beta is None:
        raise UsageError("lct needs --beta, --sweep or --estimate-threshold")
    return [args.beta]


def cmd_cusp(args) -> int:
    if args.N < cusp.MIN_ORDER:
        raise UsageError(f"-N must be at least {cusp.MIN_ORDER}")
    cert = cusp.cusp_certificate(args.N)
    cert["pass"] = bool(cert["pass"] and cert["orders"] == [2, 3]
                        and cert["lead2"] == "-66" and cert["lead3"] == "-440")
    _emit(args, cert, [{"coordinate": k, "order": o, "lead": lead}
                       for k, o, lead in ((2, cert["orders"][0], cert["lead2"]),
                                          (3, cert["orders"][1], cert["lead3"]))])
    if args.figures:
        from . import figures
        figures.cusp_slice(_figures_dir(args))
    return EXIT_PASS if cert["pass"] else EXIT_FAIL


def cmd_orbit(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be nonnegative")
    tol = acceptance.tolerances(args.tol)
    ico = acceptance.check_icosahedral(args.seed, tol)
    eq = acceptance.check_equivariance(args.seed, tol, trials=args.trials)
    probe = forms.stabilizer_probe(forms.icosahedral_form(), args.trials, seed=args.seed)
    report = {
        "invariance": {"fixed": probe["fixed"], "group_order": probe["group_order"],
                       "max_error": ico.details["max_invariance_error"]},
        "perfectness": {"commutator_closure_order": ico.details["commutator_closure_order"]},
        "element_orders": ico.details["element_orders"],
        "equivariance": {"trials": args.trials, "max_projective_error": eq.details["max_projective_error"]},
        "stabilizer_probe": {k: probe[k] for k in ("trials", "moved", "min_move", "minus_identity_fixes")},
    }
    report["pass"] = bool(ico.passed and eq.passed and probe["pass"])
    _emit(args, report, [{"check": "invariance", "value": probe["fixed"]},
                         {"check": "equivariance_max_error", "value": eq.details["max_projective_error"]},
                         {"check": "probe_moved", "value": probe["moved"]}])
    if args.figures:
        from . import figures
        figures.icosahedral_roots(_figures_dir(args))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_hyperbolic(args) -> int:
    if args.functions < 1 or args.points < 1:
        raise UsageError("--functions and --points must be positive")
    tol = acceptance.tolerances(args.tol)
    fp = acceptance.check_fixed_point(args.seed, tol, functions=args.functions)
    ch = acceptance.check_chord(args.seed, tol, functions=args.functions, points=args.points)
    report = {"fixed_point": fp.details, "chord": ch.details, "pass": bool(fp.passed and ch.passed)}
    _emit(args, report, [{"check": "fixed_point_minima", "passed": fp.details["passed"],
                          "of": args.functions},
                         {"check": "chord_bound", "passed": ch.details["passed"], "of": args.functions}])
    if args.figures:
        from . import figures
        figures.hyperbolic_chord(_figures_dir(args), seed=args.seed)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_green(args) -> int:
    if args.resolution < 8 or args.c < 0 or args.trials < 0:
        raise UsageError("need --resolution >= 8, --c >= 0 and --trials >= 0")
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        phi = green.random_admissible(rng, args.resolution, args.c)
        rep = green.check_lower_bound(phi, args.c)
        rows.append({"trial": t, "integral": rep["integral"], "margin": rep["margin"],
                     "chain_holds": rep["chain_holds"], "pass": rep["pass"]})
    kernel = green.GreenKernel.build(args.resolution)
    held = sum(r["pass"] for r in rows)
    report = {
        "resolution": args.resolution,
        "c": args.c,
        "M": green.lemma1_constant(args.c, args.resolution),
        "kernel_shift": kernel.shift,
        "kernel_symmetry_error": kernel.symmetry_error(),
        "trials": args.trials,
        "held": held,
        "chain_held": sum(r["chain_holds"] for r in rows),
        "worst_margin": min((r["margin"] for r in rows), default=None),
    }
    report["pass"] = held == args.trials and report["chain_held"] == args.trials
    _emit(args, report, rows)
    if args.figures:
        from . import figures
        figures.green_kernel(_figures_dir(args), args.resolution)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def _load_polytope(arg: str) -> toric.LatticePolytope:
    named = {"hexagon": toric.HEXAGON, "diamond": toric.DIAMOND}
    if arg in named:
        return named[arg]
    try:
        return toric.LatticePolytope.from_json(arg)
    except FileNotFoundError:
        raise UsageError(f"no such polytope file {arg!r}") from None
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed polytope JSON in {arg!r}: {exc}") from None


def cmd_toric(args) -> int:
    poly = _load_polytope(args.polytope)
    tol = acceptance.tolerances(args.tol)
    sym = toric.symmetry_report(poly)
    grad = toric.gradient_image_check(poly, samples=args.samples, approach_tol=tol["vertex_approach"],
                                      seed=args.seed)
    dual = toric.invariant_min_on_dual(poly, trials=args.trials, seed=args.seed, argmin_tol=tol["argmin"])
    report = {"polytope": poly.to_json(), "symmetry": sym, "gradient_image": grad, "dual_minimum": dual}
    if not dual["precondition"]:
        report["pass"] = False
        _emit(args, report)
        print(f"precondition failed: fixed locus of the symmetry group has dimension {dual['fixed_dimension']}",
              file=sys.stderr)
        return EXIT_USAGE
    report["pass"] = bool(grad["pass"] and dual["pass"])
    _emit(args, report, [{"order": sym["order"], "fixed_point_unique": sym["fixed_point_unique"],
                          "inside_fraction": grad["inside_fraction"], "dual_failures": dual["failures"]}])
    if args.figures:
        from . import figures
        figures.toric_gradient(_figures_dir(args), seed=args.seed)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_reproduce(args) -> int:
    overrides = args.tol
    acceptance.tolerances(overrides)
    quiet = args.json or not args.table

    def progress(res):
        if not quiet:
            print(res.line(), flush=True)

    results = acceptance.run_all(seed=args.seed, overrides=overrides, progress=progress)
    summary = [r.to_json() for r in results]
    failing = [r for r in results if not r.passed]
    report = {"seed": args.seed, "checks": summary, "pass": not failing,
              "first_failure": failing[0].name if failing else None}
    _emit(args, report, [{k: v for k, v in s.items() if k != "details"} for s in summary],
          write_json=args.json)
    if args.figures:
        from . import figures
        d = _figures_dir(args)
        figures.reproduce_summary(summary, d)
        figures.cusp_slice(d)
        figures.icosahedral_roots(d)
        figures.hyperbolic_chord(d, seed=args.seed)
        figures.green_kernel(d)
        figures.toric_gradient(d, seed=args.seed)
    if failing:
        print(f"FAILED: check {failing[0].number} ({failing[0].name})", file=sys.stderr)
        return EXIT_FAIL
    if not quiet:
        print(f"all {len(results)} checks passed")
    return EXIT_PASS


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="also write a flat CSV table")
    common.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR (needs matplotlib)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps and timings so identical runs give identical bytes")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override a named tolerance; repeatable")

    p = argparse.ArgumentParser(prog="alpha-lab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lct", parents=[common], help="dyadic integrability of |f|^(-2 beta)")
    s.add_argument("--preset", help="cusp23, cusp25 or monomial:p,n")
    s.add_argument("--weights", help="comma-separated weights for z1^(d/w1) - z2^(d/w2) - ...")
    s.add_argument("--degree", type=int)
    s.add_argument("--beta", type=float)
    s.add_argument("--sweep", help="comma-separated beta values")
    s.add_argument("-R", type=int, default=4, help="number of regions (default 4)")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--kind", choices=("product", "shell"), default="product")
    s.add_argument("--estimate-threshold", action="store_true")
    s.add_argument("--expect-divergent", action="store_true",
                   help="flag divergence evidence as the expected outcome in the report")
    s.set_defaults(func=cmd_lct)

    s = sub.add_parser("cusp", parents=[common], help="cusp certificate for the orbit-closure slice")
    s.add_argument("-N", type=int, default=cusp.DEFAULT_ORDER, help="truncation order (>= 3)")
    s.set_defaults(func=cmd_cusp)

    s = sub.add_parser("orbit", parents=[common], help="icosahedral invariance and equivariance")
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=cmd_orbit)

    s = sub.add_parser("hyperbolic", parents=[common], help="fixed point and chord bound on H")
    s.add_argument("--functions", type=int, default=50)
    s.add_argument("--points", type=int, default=1000)
    s.set_defaults(func=cmd_hyperbolic)

    s = sub.add_parser("green", parents=[common], help="torus Green's-function lower bound")
    s.add_argument("--resolution", type=int, default=128)
    s.add_argument("--c", type=float, default=6.0)
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=cmd_green)

    s = sub.add_parser("toric", parents=[common], help="symmetric lattice polytope checks")
    s.add_argument("--polytope", default="hexagon", help="JSON file or 'hexagon' / 'diamond'")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_toric)

    s = sub.add_parser("reproduce", parents=[common], help="run every acceptance check in order")
    s.add_argument("--json", action="store_true", help="machine-readable summary on stdout")
    s.add_argument("--no-table", dest="table", action="store_false", help="suppress the progress table")
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        args.tol = _parse_tol(args.tol)
        return args.func(args)
    except UsageError as exc:
        print(f"alpha-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, green.PreconditionError, toric.PolytopeError, cusp.SeriesError,
            lct.BudgetExhausted) as exc:
        print(f"alpha-lab: precondition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
