"""``angledim`` command line.

Exit status: 0 on success, 1 on data or domain errors, 2 on usage errors.
Results go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys

from . import __version__
from .baseline_lb import LBConfig, lb_global
from .bench import ESTIMATORS, BenchConfig, render_report, run_bench
from .calibration import DEFAULT_SAMPLES, CalibrationCache, build_cache, qq_data
from .errors import AngleDimError
from .global_estimator import GlobalConfig, estimate_global, pick_centers
from .io import parse_cloud, write_cloud, write_text
from .local_estimator import LocalConfig, estimate_local
from .manifolds import MANIFOLDS, generate
from .moments import moment_table

log = logging.getLogger("angledim")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_cache(path):
    return CalibrationCache.load(path) if path else None


def cmd_moments(args):
    table = moment_table(args.dmax)
    if args.format == "json":
        rows = [{"d": d, "beta": b, "sigma_sq": s} for d, b, s in table.rows()]
        return _dump(rows)
    lines = ["d,beta,sigma_sq"]
    lines += [f"{d},{b:.15g},{s:.15g}" for d, b, s in table.rows()]
    return "\n".join(lines) + "\n"


def _method(name):
    return {"disc": "discriminant"}.get(name, name)


def cmd_estimate(args):
    cloud = parse_cloud(args.input)
    if args.method == "lb":
        result = lb_global(cloud, LBConfig(args.k1, args.k2))
        return _dump({"method": "lb", "seed": args.seed, **result.to_dict()})
    cfg = LocalConfig(k=args.k, d_max=args.dmax, method=_method(args.method))
    if args.center_row is not None:
        if not 0 <= args.center_row < cloud.n:
            raise AngleDimError(f"--center-row {args.center_row} outside 0..{cloud.n - 1}")
        idx = args.center_row
    else:
        idx = pick_centers(cloud, 1)[0]
    est = estimate_local(cloud, cloud.points[idx], cfg, cache=_load_cache(args.cache), center_index=idx)
    return _dump({"method": cfg.method, "seed": args.seed, **est.to_dict()})


def cmd_global(args):
    cloud = parse_cloud(args.input)
    cfg = GlobalConfig(
        c=args.c,
        discard_fraction=args.discard_frac,
        local=LocalConfig(k=args.k, d_max=args.dmax, method=_method(args.method)),
        weight=args.weight,
    )
    est = estimate_global(cloud, cfg, cache=_load_cache(args.cache), seed=args.seed, threads=args.threads)
    return _dump({"method": cfg.local.method, **est.to_dict()})


def cmd_calibrate(args):
    cache = build_cache(args.dmax, args.k, args.samples, args.seed, threads=args.threads)
    return cache.to_json()


def cmd_qq(args):
    normal, sample = qq_data(args.d, args.k, args.samples, args.seed)
    buf = io.StringIO()
    buf.write("normal_quantile,sample_quantile\n")
    for a, b in zip(normal.tolist(), sample.tolist()):
        buf.write(f"{a!r},{b!r}\n")
    return buf.getvalue()


def cmd_gen(args):
    cloud = generate(args.manifold, args.n, args.seed)
    write_cloud(cloud, args.out, args.format)
    return None


def cmd_bench(args):
    cfg = BenchConfig(
        manifolds=tuple(m.strip() for m in args.manifolds.split(",") if m.strip()),
        trials=args.trials,
        n=args.n,
        estimators=tuple(e.strip() for e in args.estimators.split(",") if e.strip()),
        seed=args.seed,
        k=args.k,
        c=args.c,
        heuristic_fraction=args.heuristic_frac,
        lb=LBConfig(args.k1, args.k2),
    )
    report = run_bench(cfg, cache=_load_cache(args.cache), threads=args.threads)
    if args.markdown:
        write_text(args.markdown, render_report(report, "markdown", with_reported=args.with_reported))
    return render_report(report, args.format)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="maximum worker threads")
    common.add_argument("--out", default="-", help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="angledim", description="Angle-variance intrinsic dimension estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("moments", parents=[common], help="print the beta / sigma^2 table")
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_moments)

    def estimator_args(p, methods):
        p.add_argument("--input", required=True, help="point cloud file, or - for stdin")
        p.add_argument("--method", choices=methods, default="basic")
        p.add_argument("--k", type=int, default=None, help="neighbours (default round(10 log10 n))")
        p.add_argument("--dmax", type=int, default=None, help="largest candidate dimension (default m)")
        p.add_argument("--cache", default=None, help="calibration cache for --method kernel")

    p = sub.add_parser("estimate", parents=[common], help="local estimate at one center, or Levina-Bickel")
    estimator_args(p, ["basic", "disc", "kernel", "lb"])
    where = p.add_mutually_exclusive_group()
    where.add_argument("--center-row", type=int, default=None, help="use sample row I as the center")
    where.add_argument("--center", choices=["auto"], default="auto", help="pick the most central point")
    p.add_argument("--k1", type=int, default=10)
    p.add_argument("--k2", type=int, default=20)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("global", parents=[common], help="median of local estimates over c centers")
    estimator_args(p, ["basic", "disc", "kernel"])
    p.add_argument("--c", type=int, default=None, help="number of centers (default round(2 ln n))")
    p.add_argument("--discard-frac", type=float, default=0.0)
    p.add_argument("--weight", choices=["central", "printed"], default="central")
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("calibrate", parents=[common], help="simulate the kernel-estimator cache")
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("qq", parents=[common], help="normal QQ data for k(E_n - beta_d)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(func=cmd_qq)

    p = sub.add_parser("gen", parents=[common], help="sample a benchmark manifold")
    p.add_argument("--manifold", required=True, type=str.upper, choices=list(MANIFOLDS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", parents=[common], help="MSE / MPE over manifolds and trials")
    p.add_argument("--manifolds", default=",".join(MANIFOLDS))
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n", type=int, default=2500)
    p.add_argument("--estimators", default=",".join(ESTIMATORS))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--heuristic-frac", type=float, default=0.25, help="discard fraction for B+H and K+H")
    p.add_argument("--k1", type=int, default=10)
    p.add_argument("--k2", type=int, default=20)
    p.add_argument("--cache", default=None)
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    p.add_argument("--markdown", default=None, help="also write markdown tables here")
    p.add_argument("--with-reported", action="store_true", help="append published reference rows to markdown")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.threads < 1:
        print("angledim: error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        text = args.func(args)
        if text is not None:
            write_text(args.out, text)
    except (AngleDimError, OSError) as exc:
        print(f"angledim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
