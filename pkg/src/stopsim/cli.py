"""Command line entry point: gen, run, check and report."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import instances as gens
from .harness.checks import SUITES, check_invariants, random_secretary_01
from .harness.evaluate import ALGORITHMS, EvalConfig, competitive_report
from .harness.io import (
    load_instance,
    merge_reports,
    save_instance,
    write_report_csv,
    write_report_json,
    write_report_rows,
)
from .valuemodel import DEFAULT_GUARD, ItemDistribution, ProphetInstance, SecretaryInstance

log = logging.getLogger("stopsim")

GENERATORS = (
    "partition-lb", "nm-prophet-lb", "hadamard", "random-prophet",
    "random-secretary", "uniform-matroid",
)


def _generate(args: argparse.Namespace):
    rng = np.random.default_rng(args.seed)
    g, n = args.generator, args.n
    if g == "partition-lb":
        return gens.gen_partition_lb(n)
    if g == "nm-prophet-lb":
        return gens.gen_nm_prophet_lb(n)
    if g == "hadamard":
        return gens.gen_hadamard_secretary_lb(n, args.i_star)
    if g == "random-prophet":
        return gens.random_prophet_01(rng, n)
    if g == "random-secretary":
        return random_secretary_01(rng, n)
    ss = gens.gen_uniform_matroid(n, args.k)
    if args.p is not None:
        return ProphetInstance(ss, tuple(ItemDistribution.bernoulli(args.p) for _ in range(n)))
    return SecretaryInstance(ss, tuple(float(v) for v in rng.integers(0, 2, n)))


def cmd_gen(args: argparse.Namespace) -> int:
    inst = _generate(args)
    meta = {"generator": args.generator, "n": args.n, "seed": args.seed}
    save_instance(inst, args.out, meta)
    log.info("wrote %s (n=%d)", args.out, inst.n)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    cfg = EvalConfig(
        oracle=args.oracle, c_scale=args.c_scale, policy=args.policy,
        knowledge=args.knowledge, guard=args.guard,
        opt_mode="exact" if args.opt == "exact" else "mc",
    )
    rows = competitive_report(
        inst, args.alg, args.mode, args.trials, args.seed,
        instance_id=args.instance_id or Path(args.instance).stem, cfg=cfg,
    )
    if args.out:
        write_report_csv(rows, args.out)
        write_report_json(rows, Path(args.out).with_suffix(".report.json"))
    for r in rows:
        print(f"{r['algorithm']:>18}  mean={r['mean']:.6g} ±{r['halfwidth']:.3g}  "
              f"opt={r['opt']:.6g}  ratio={r['ratio']:.4g}  violations={r['violations']}")
    return 1 if any(r["violations"] for r in rows) else 0


def cmd_check(args: argparse.Namespace) -> int:
    params = json.loads(args.params) if args.params else {}
    rep = check_invariants(args.suite, params, args.seed)
    print(rep.summary())
    return 1 if rep.total_violations else 0


def cmd_report(args: argparse.Namespace) -> int:
    paths = sorted({p for pat in args.merge for p in (glob.glob(pat) or [pat])})
    rows = merge_reports(paths)
    if args.out:
        write_report_csv(rows, args.out)
    else:
        write_report_rows(rows, sys.stdout)
    bad = sum(int(r.get("violations") or 0) for r in rows)
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stopsim", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance to JSON")
    g.add_argument("generator", choices=GENERATORS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=2, help="rank for uniform-matroid")
    g.add_argument("--p", type=float, default=None, help="Bernoulli p for uniform-matroid")
    g.add_argument("--i-star", type=int, default=0, help="valuable item for hadamard")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="evaluate algorithms on an instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--alg", nargs="+", required=True, choices=ALGORITHMS)
    r.add_argument("--mode", choices=("mc", "exact"), default="mc")
    r.add_argument("--oracle", default="exact", help="exact, rational or mc:<samples>")
    r.add_argument("--opt", choices=("exact", "mc"), default="exact")
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--c-scale", type=float, default=500.0)
    r.add_argument("--policy", choices=("randomized_online", "better_of_reported"),
                   default="randomized_online")
    r.add_argument("--knowledge", choices=("full", "oracle"), default="full")
    r.add_argument("--guard", type=int, default=DEFAULT_GUARD)
    r.add_argument("--instance-id", default=None)
    r.add_argument("--out", default=None, help="CSV path; the JSON mirror goes to <stem>.report.json")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run an invariant suite")
    c.add_argument("--suite", choices=SUITES, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--params", default=None, help='JSON object, e.g. \'{"instances": 20}\'')
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("report", help="merge report CSVs")
    m.add_argument("--merge", nargs="+", required=True)
    m.add_argument("--out", default=None)
    m.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as a non-zero exit code
        log.error("%s: %s", type(exc).__name__, exc)
        if args.verbose:
            raise
        return 2


if __name__ == "__main__":
    sys.exit(main())
