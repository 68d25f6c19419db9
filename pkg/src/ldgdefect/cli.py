"""Command-line entry point: ``ldgdefect {run,verify,analyze,radial}``.

Exit codes: 0 success, 1 verification failure, 2 invalid config or report,
3 non-finite energy in the solver.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import criteria
from .config import ConfigError, load_config
from .field import load_snapshot
from .material import MaterialParams
from .pipeline import analyze_stage, boundary_function, run_experiment
from .radial import NewtonFailure, solve_profile

log = logging.getLogger("ldgdefect")


def _limit_threads(n):
    if n is None:
        return None
    import numba
    from threadpoolctl import threadpool_limits

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return threadpool_limits(limits=n)


def _summary(report):
    cols = ["eps", "iters", "energy", "competitor", "core_diam", "annulus_sup", "max_beta"]
    lines = ["\t".join(cols)]
    for s in report["stages"]:
        half = criteria._half_row(s["core_diameter"])
        sup = s["annulus"]["sup"]
        lines.append("\t".join([
            f"{s['eps']:g}",
            str(s["solve"]["iterations"]),
            f"{s['energy']['minimizer']['total']:.6f}",
            f"{s['energy']['competitor']['total']:.6f}",
            f"{half['diameter']:.4f}" if half else "nan",
            "nan" if sup is None else f"{sup:.5f}",
            f"{s['max_biaxiality']:.3g}",
        ]))
    return "\n".join(lines)


def cmd_run(args):
    try:
        cfg, text = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    if args.dry_run:
        print(json.dumps(cfg.plan(), indent=1))
        return 0
    figures = False if args.no_figures else None
    report, code = run_experiment(cfg, text, args.out, figures=figures)
    out = Path(args.out or cfg.output.directory)
    if code:
        print(json.dumps(report.get("failure", {})), file=sys.stderr)
        return code
    print(_summary(report))
    print(f"# report: {out / 'report.json'}")
    return 0


def cmd_verify(args):
    try:
        with open(args.report) as fh:
            text = fh.read()
        report = json.loads(text) if text.strip() else {}
        results = criteria.evaluate(report)
    except (OSError, json.JSONDecodeError, criteria.SchemaError) as exc:
        print(json.dumps({"error": "schema", "message": str(exc)}), file=sys.stderr)
        return 2
    for r in results:
        print(r.line())
    n_ok = sum(r.passed for r in results)
    print(f"# {n_ok}/{len(results)} criteria passed")
    return 0 if n_ok == len(results) else 1


def cmd_analyze(args):
    try:
        cfg, _ = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    fld = load_snapshot(args.snapshot)
    eps = args.eps if args.eps is not None else cfg.eps_ladder[-1]
    p = MaterialParams(cfg.a2, cfg.b2, cfg.c2, eps)
    stage = analyze_stage(fld, p, cfg, boundary_function(cfg, p.s_plus))
    text = json.dumps(stage, indent=1, default=float)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_radial(args):
    try:
        p = MaterialParams(args.a2, args.b2, args.c2, args.eps)
        prof = solve_profile(p, args.rmax, n_nodes=args.nodes, far_field=not args.ball)
    except (ValueError, NewtonFailure) as exc:
        print(json.dumps({"error": "radial", "message": str(exc)}), file=sys.stderr)
        return 2
    if args.out:
        prof.to_csv(args.out)
    else:
        print("r,h")
        for r, h in zip(prof.r, prof.h):
            print(f"{r:.17g},{h:.17g}")
    print(f"# newton_iters={prof.newton_iters} residual={prof.residual:.3e} "
          f"h(eps)={float(prof(args.eps)):.12g}", file=sys.stderr)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="ldgdefect", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="cap BLAS and numba threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve the eps ladder and write the report")
    r.add_argument("config")
    r.add_argument("--dry-run", action="store_true", help="validate and print the resolved plan")
    r.add_argument("--out", default=None, help="output directory (overrides the config)")
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="judge an existing report")
    v.add_argument("report")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="measurements on a saved snapshot")
    a.add_argument("snapshot")
    a.add_argument("--config", required=True)
    a.add_argument("--eps", type=float, default=None, help="default: last ladder value")
    a.add_argument("--out", default=None, help="write JSON here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("radial", help="radial hedgehog profile as r,h CSV")
    d.add_argument("--a2", type=float, default=1.0)
    d.add_argument("--b2", type=float, default=1.0)
    d.add_argument("--c2", type=float, default=1.0)
    d.add_argument("--eps", type=float, required=True)
    d.add_argument("--rmax", type=float, default=None, help="default: 20 eps")
    d.add_argument("--nodes", type=int, default=2001)
    d.add_argument("--ball", action="store_true", help="allow rmax < 20 eps (ball problem)")
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_radial)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "rmax", 0) is None:
        args.rmax = 20.0 * args.eps
    np.seterr(all="ignore")
    limiter = _limit_threads(args.threads)
    try:
        return args.func(args)
    finally:
        if limiter is not None:
            limiter.unregister()
