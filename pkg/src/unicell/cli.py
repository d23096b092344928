"""Command line interface: ``unicell {sample,run,theory,validate,oracle}``.

Exit codes: 0 ok, 1 a validation or acceptance check failed, 2 bad usage.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import oracle, stats
from .cycles import enumerate_short_cycles
from .experiment import ExperimentConfig, derive_seed, run_experiment, save_summary, summary_report
from .maps import kernelize, sample_map
from .validation import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, default=_default)
    sys.stdout.write("\n")


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def cmd_sample(args) -> int:
    seed = derive_seed(args.seed, args.index)
    dec, G = sample_map(args.n, args.g, np.random.default_rng(seed))
    out = {
        "n": args.n,
        "g": args.g,
        "seed": seed,
        "tree": dec.tree.to_dyck(),
        "sigma": [list(c) for c in dec.sigma.nontrivial],
        "graph": G.to_json() if args.graph else None,
    }
    if args.g > 0:
        K = kernelize(G)
        cap = args.cap or stats.ScalingParams(args.n, args.g).cap(args.x_max)
        cl = enumerate_short_cycles(K, cap, include_loops=args.include_loops)
        out["kernel"] = K.to_json()
        out["cap"] = cap
        out["cycles"] = cl.to_json()
        out["truncated"] = cl.truncated
    else:
        out["cycles"] = []
    if not args.graph:
        del out["graph"]
    _dump(out)
    return EXIT_OK


def cmd_run(args) -> int:
    windows = stats.WindowSpec.parse(args.windows)
    cfg = ExperimentConfig(
        n=args.n,
        g=args.g,
        samples=args.samples,
        windows=windows,
        x_max=args.x_max,
        master_seed=args.seed,
        workers=args.workers,
        include_loops=args.include_loops,
        output=args.output,
        format=args.format,
    )
    summary = run_experiment(cfg, progress=args.progress)
    if args.output:
        save_summary(summary, Path(args.output).with_suffix(".summary.json"))
    _dump(summary_report(summary))
    return EXIT_OK


def cmd_theory(args) -> int:
    out: dict = {}
    lam = args.lam or ([] if _any_theory(args) else [[0.0, 1.0], [1.0, 2.0]])
    for x, y in lam:
        if not 0 <= x <= y:
            raise UsageError(f"--lambda needs 0 <= x <= y, got {x} {y}")
    if lam:
        out["lambda"] = [{"x": x, "y": y, "value": stats.intensity(x, y)} for x, y in lam]
    if args.lambda_k:
        rows = []
        for x, y, k in args.lambda_k:
            if not 0 <= x <= y or k < 1 or k != int(k):
                raise UsageError("--lambda-k needs 0 <= x <= y and an integer k >= 1")
            rows.append({"x": x, "y": y, "k": int(k), "value": stats.intensity_k(x, y, int(k))})
        out["lambda_k"] = rows
    if args.Lambda:
        rows = []
        for m, k, M in args.Lambda:
            if m < 0 or k < 1 or M < 1:
                raise UsageError("--Lambda needs m >= 0, k >= 1, M >= 1")
            exact = stats.lambda_k_m_exact(m, k, M)
            rows.append({"m": m, "k": k, "M": M, "value": float(exact), "exact": str(exact)})
        out["Lambda_k_m"] = rows
    grid = args.systole if args.systole is not None else ([] if _any_theory(args) else [0.5, 1.0, 1.5, 2.0])
    if any(z < 0 for z in grid):
        raise UsageError("--systole values must be >= 0")
    if grid:
        out["systole_cdf"] = [{"z": z, "value": stats.systole_cdf(z)} for z in grid]
    ks = args.pk if args.pk is not None else ([] if _any_theory(args) else [1, 2, 3])
    if any(k < 1 for k in ks):
        raise UsageError("--pk needs k >= 1")
    if ks:
        out["pk"] = [{"k": k, "value": stats.pk(k)} for k in ks]
    _dump(out)
    return EXIT_OK


def _any_theory(args) -> bool:
    return bool(args.lam or args.lambda_k or args.Lambda or args.systole is not None or args.pk is not None)


def cmd_validate(args) -> int:
    checks = run_suite(args.suite)
    ok = all(c.passed for c in checks)
    _dump({"suite": args.suite, "pass": ok, "checks": [c.to_json() for c in checks]})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    if args.what == "trees":
        trees = oracle.enumerate_plane_trees(args.n)
        _dump({"n": args.n, "count": len(trees), "trees": [t.to_dyck() for t in trees]})
    elif args.what == "cperms":
        perms = oracle.enumerate_cperms(args.n, args.g)
        _dump({"n": args.n, "g": args.g, "count": len(perms), "perms": [p.to_json() for p in perms]})
    elif args.what == "maps":
        dist = oracle.exact_map_statistics(args.n, args.g, include_loops=args.include_loops)
        _dump({
            "n": args.n,
            "g": args.g,
            "distribution": [
                {"profile": [list(p) for p in key], "probability": str(prob)}
                for key, prob in zip(dist.support, dist.probability)
            ],
        })
    else:
        rep = oracle.enumerate_path_pairs_and_unions(args.n, args.l1, args.l2)
        _dump({**rep.__dict__, "ok": rep.ok})
        return EXIT_OK if rep.ok else EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unicell", description="Random unicellular maps and their short cycles.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample one map and list its short cycles")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0, help="sample index within the seed's stream family")
    s.add_argument("--cap", type=int, default=None, help="length cap (default ceil(x_max L))")
    s.add_argument("--x-max", type=float, default=2.0)
    s.add_argument("--include-loops", action="store_true")
    s.add_argument("--graph", action="store_true", help="also print the underlying graph")
    s.set_defaults(func=cmd_sample)

    r = sub.add_parser("run", help="Monte Carlo run with window counts and limit-law comparisons")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--g", type=int, required=True)
    r.add_argument("--samples", type=int, required=True)
    r.add_argument("--windows", default="0:1,1:2", help="rescaled windows as a:b,c:d (half-open)")
    r.add_argument("--x-max", type=float, default=None, help="cap = ceil(x_max L); default top window edge")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--workers", type=int, default=None, help="default: $UNICELL_WORKERS or CPU count")
    r.add_argument(
        "--include-loops",
        action="store_true",
        help="count single-edge loops as cycles (the path-list decomposition admits them)",
    )
    r.add_argument("--output", default=None)
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--progress", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("theory", help="limit intensities and laws as JSON")
    t.add_argument("--lambda", dest="lam", nargs=2, type=float, action="append", metavar=("X", "Y"))
    t.add_argument("--lambda-k", nargs=3, type=float, action="append", metavar=("X", "Y", "K"))
    t.add_argument("--Lambda", nargs=3, type=int, action="append", metavar=("M_INDEX", "K", "M"))
    t.add_argument("--systole", nargs="*", type=float, default=None, metavar="Z")
    t.add_argument("--pk", nargs="*", type=int, default=None, metavar="K")
    t.set_defaults(func=cmd_theory)

    v = sub.add_parser("validate", help="run a self-check suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="exhaustive small-case enumeration")
    o.add_argument("what", choices=("trees", "cperms", "maps", "pairs"))
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--g", type=int, default=0)
    o.add_argument("--l1", type=int, default=1)
    o.add_argument("--l2", type=int, default=1)
    o.add_argument("--include-loops", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"unicell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"unicell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
