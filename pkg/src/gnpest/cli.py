"""Command-line interface: graph generation/corruption, single-shot
estimation, the Monte Carlo benchmark, regularity/concentration audits,
the lower-bound demo, and rate-constant calibration.

Exit codes: 0 success, 1 configuration error, 2 partial failures
(some rows errored but the run completed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import rng as rngmod
from .adversaries import STRATEGY_NAMES, degree_rewiring_adversary
from .estimators import ESTIMATOR_NAMES, run_named_estimator
from .graphs import (
    DirectedAdjacencyMatrix,
    GraphFormatError,
    GraphParams,
    NodeSet,
    read_graph,
    sample_er,
    write_graph,
)
from .harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    apply_adversary,
    calibrate_constants,
    results_to_json,
    run_experiment,
    summarize,
    write_csv,
)
from .lowerbound import binomial_pmf, indistinguishable_pair, two_sample_chisquare
from .regularity import concentration_audit


class ConfigError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gnpest",
        description="Robust edge-probability estimation benchmark for "
        "corrupted random graphs.",
    )
    ap.add_argument("--seed", type=int, default=0, help="master seed")
    ap.add_argument("--threads", type=int, default=1, help="worker count")
    ap.add_argument("--out", default=None, help="output path (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample an Erdos-Renyi graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--binary", action="store_true", help="write the binary format")

    c = sub.add_parser("corrupt", help="apply an adversary to a stored graph")
    c.add_argument("--graph", required=True, dest="graph_in")
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--strategy", choices=STRATEGY_NAMES, required=True)
    c.add_argument("--c", type=float, default=1.0, help="five-set pruning multiplier")
    c.add_argument(
        "--pmf",
        default=None,
        help="degree-rewire pmf: binomial=<p>, point=<k>, or file=<path>",
    )
    c.add_argument("--binary", action="store_true")

    e = sub.add_parser("estimate", help="run one estimator on a stored graph")
    e.add_argument("--graph", required=True, dest="graph_in")
    e.add_argument("--estimator", choices=ESTIMATOR_NAMES, required=True)
    e.add_argument("--gamma", type=float, default=0.0)
    e.add_argument("--c", type=float, default=1.0)
    e.add_argument("--repeats", type=int, default=None)
    e.add_argument("--true-p", type=float, default=None, help="report |estimate - p|")

    b = sub.add_parser("bench", help="Monte Carlo sweep over a parameter grid")
    b.add_argument("--n", type=_ints, required=True, help="comma-separated")
    b.add_argument("--p", type=_floats, required=True)
    b.add_argument("--gamma", type=_floats, required=True)
    b.add_argument("--adversary", choices=STRATEGY_NAMES, default="none")
    b.add_argument("--estimators", required=True, help="comma-separated names")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--c", type=float, default=1.0)
    b.add_argument("--repeats", type=int, default=None)
    b.add_argument("--summary", action="store_true", help="emit the aggregate table")

    r = sub.add_parser("regularity-audit", help="block-sum concentration audit")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--p", type=_floats, required=True)
    r.add_argument("--alpha", type=_floats, default=[0.1, 0.25, 0.5])
    r.add_argument("--trials", type=int, default=50)

    l = sub.add_parser("lb-demo", help="indistinguishable corrupted pair demo")
    l.add_argument("--n", type=int, required=True)
    l.add_argument("--p", type=float, required=True)
    l.add_argument("--gamma", type=float, required=True)
    l.add_argument("--trials", type=int, default=1)

    k = sub.add_parser("calibrate", help="calibrate the eta/kappa rate constants")
    k.add_argument("--trials", type=int, default=500)
    k.add_argument("--target", type=float, default=0.99)
    k.add_argument("--n", type=_ints, default=[100, 400, 1600])
    k.add_argument("--p", type=_floats, default=[0.05, 0.5, 0.95])

    return ap


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_pmf(spec: str, n: int) -> np.ndarray:
    kind, _, value = spec.partition("=")
    if kind == "binomial":
        return binomial_pmf(n - 1, float(value)).mass
    if kind == "point":
        mass = np.zeros(n)
        mass[int(value)] = 1.0
        return mass
    if kind == "file":
        return np.loadtxt(value, dtype=np.float64)
    raise ConfigError(f"unknown pmf spec {spec!r}")


def cmd_gen(args) -> int:
    g = sample_er(
        GraphParams(n=args.n, p=args.p, gamma=0.0), rngmod.stream(args.seed, "gen")
    )
    if not args.out:
        raise ConfigError("gen requires --out")
    write_graph(g, args.out, binary=args.binary)
    return 0


def cmd_corrupt(args) -> int:
    g = read_graph(args.graph_in)
    rng = rngmod.stream(args.seed, "corrupt")
    if isinstance(g, DirectedAdjacencyMatrix):
        if args.strategy != "degree-rewire":
            raise ConfigError("directed graphs support only --strategy degree-rewire")
        if not args.pmf:
            raise ConfigError("degree-rewire requires --pmf")
        out = degree_rewiring_adversary(g, args.gamma, _parse_pmf(args.pmf, g.n), rng).graph
    else:
        if args.strategy == "degree-rewire":
            raise ConfigError("degree-rewire applies only to directed graphs")
        out = apply_adversary(g, args.strategy, args.gamma, rng, {"c": args.c})
    if not args.out:
        raise ConfigError("corrupt requires --out")
    write_graph(out, args.out, binary=args.binary)
    return 0


def cmd_estimate(args) -> int:
    g = read_graph(args.graph_in)
    if isinstance(g, DirectedAdjacencyMatrix):
        raise ConfigError("estimators operate on undirected graphs")
    rep = run_named_estimator(
        args.estimator,
        g,
        rngmod.stream(args.seed, "estimate"),
        gamma=args.gamma,
        c=args.c,
        repeats=args.repeats,
    )
    payload = {"estimator": args.estimator, "estimate": rep.estimate,
               "raw_estimate": rep.raw_estimate}
    if args.true_p is not None:
        payload["abs_error"] = abs(rep.estimate - args.true_p)
    _emit(args, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_bench(args) -> int:
    estimators = tuple(x for x in args.estimators.split(",") if x)
    cfg = ExperimentConfig(
        grid=tuple((n, p, g) for n in args.n for p in args.p for g in args.gamma),
        adversary=args.adversary,
        estimators=estimators,
        trials=args.trials,
        master_seed=args.seed,
        adversary_params={"c": args.c},
        estimator_params={"c": args.c, "repeats": args.repeats},
        parallelism=args.threads,
    )
    results = run_experiment(cfg)
    if args.summary:
        _emit(args, json.dumps(summarize(results), indent=2) + "\n")
    elif args.format == "json":
        _emit(args, results_to_json(results) + "\n")
    else:
        if args.out:
            write_csv(args.out, CSV_COLUMNS, [r.csv_row() for r in results])
        else:
            from .harness import CSV_HEADER, _cell

            lines = [CSV_HEADER, ",".join(CSV_COLUMNS)]
            lines += [",".join(_cell(v) for v in r.csv_row()) for r in results]
            sys.stdout.write("\n".join(lines) + "\n")
    return 2 if any(r.status != "ok" for r in results) else 0


def cmd_regularity_audit(args) -> int:
    rows = []
    for p in args.p:
        rows += concentration_audit(
            args.n,
            p,
            args.alpha,
            args.trials,
            rng_for_trial=lambda t, p=p: rngmod.stream(args.seed, "audit", p, t, "max"),
            sample_graph=lambda t, p=p: sample_er(
                GraphParams(n=args.n, p=p, gamma=0.0),
                rngmod.stream(args.seed, "audit", p, t, "gen"),
            ),
        )
    columns = ("n", "p", "alpha", "trial", "lhs", "bound", "holds")
    if args.format == "json":
        _emit(args, json.dumps(rows, indent=2) + "\n")
    else:
        table = [tuple(r[c] for c in columns) for r in rows]
        if args.out:
            write_csv(args.out, columns, table)
        else:
            from .harness import CSV_HEADER, _cell

            lines = [CSV_HEADER, ",".join(columns)]
            lines += [",".join(_cell(v) for v in row) for row in table]
            sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_lb_demo(args) -> int:
    reports = []
    coupling = None
    for t in range(args.trials):
        rng = rngmod.stream(args.seed, "lb", t)
        out1, out2, coupling = indistinguishable_pair(args.n, args.p, args.gamma, rng)
        deg1 = out1.graph.mat.sum(axis=1)
        deg2 = out2.graph.mat.sum(axis=1)
        test = two_sample_chisquare(deg1, deg2)
        reports.append(
            {
                "trial": t,
                "p2": coupling.p2,
                "mixture_error": coupling.mixture_error(),
                "chi_square": test,
            }
        )
    payload = {
        "n": args.n,
        "p1": args.p,
        "gamma": args.gamma,
        "epsilon": 0.15 * args.gamma,
        "coupling_pmf_1": coupling.dist1.mass.tolist(),
        "coupling_pmf_2": coupling.dist2.mass.tolist(),
        "trials": reports,
    }
    _emit(args, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_calibrate(args) -> int:
    constants, artifact = calibrate_constants(
        trials=args.trials,
        master_seed=args.seed,
        target=args.target,
        ns=tuple(args.n),
        ps=tuple(args.p),
    )
    _emit(args, json.dumps(artifact, indent=2) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    handlers = {
        "gen": cmd_gen,
        "corrupt": cmd_corrupt,
        "estimate": cmd_estimate,
        "bench": cmd_bench,
        "regularity-audit": cmd_regularity_audit,
        "lb-demo": cmd_lb_demo,
        "calibrate": cmd_calibrate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, GraphFormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
