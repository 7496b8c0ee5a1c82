"""Command-line entry point.

Each subcommand prints a human-readable table to stdout. ``--out PATH``
additionally writes the CSV form (``--out -`` sends CSV to stdout instead of
the table). Exit status: 0 on success, 1 when a verification fails, 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import continuous_lp as clp
from . import finite_lp, harness
from .events import DEFAULT_CAP, EnumerationCapError, lemma_corpus, lemma_suite, verify_boundary_injectivity
from .graph import (
    GraphError,
    bipartite_matching,
    complete_bipartite,
    complete_graph,
    consecutive_matching,
    cycle_graph,
    double_bomb,
    path_graph,
    random_planted_graph,
    read_edge_list,
)

WORKERS_ENV = "OBLIVIOUS_RANKING_WORKERS"
LP_BOUND = 0.5231664
LP_BOUND_SLACK = 1e-7
VALUE_TOL = 1e-6
FAMILIES = ("double-bomb", "complete", "path", "cycle", "complete-bipartite", "random")


class UsageError(Exception):
    pass


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def load_graph(args) -> tuple[str, object, object]:
    """(name, graph, matching or None) from ``--graph`` or ``--family``."""
    if args.graph:
        try:
            text = Path(args.graph).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.graph}: {exc.strerror}") from None
        g, m = read_edge_list(text)
        return Path(args.graph).name, g, m
    if args.family is None:
        raise UsageError("give --graph FILE or --family NAME")
    n = args.n
    if n is None:
        raise UsageError(f"--family {args.family} needs --n")
    fam = args.family
    if fam == "double-bomb":
        g, m = double_bomb(n, args.eps)
        return f"double_bomb({n},{args.eps})", g, m
    if fam == "complete":
        return f"K{n}", complete_graph(n), consecutive_matching(n)
    if fam == "path":
        return f"P{n}", path_graph(n), consecutive_matching(n)
    if fam == "cycle":
        return f"C{n}", cycle_graph(n), consecutive_matching(n)
    if fam == "complete-bipartite":
        return f"K{n},{n}", complete_bipartite(n), bipartite_matching(n)
    g, m = random_planted_graph(n, args.p, args.seed)
    return f"random({n},{args.p},{args.seed})", g, m


def _emit(args, table: str, csv_text: str) -> None:
    if args.out == "-":
        sys.stdout.write(csv_text)
        return
    sys.stdout.write(table)
    if args.out:
        Path(args.out).write_text(csv_text)


def cmd_simulate(args) -> int:
    name, g, m = load_graph(args)
    if m is None:
        raise UsageError("simulate needs a graph with a declared perfect matching")
    est = harness.monte_carlo_ratio(g, m, args.samples, args.seed, args.workers)
    row = (g.node_count, est.samples, est.seed, est.mean, est.stderr)
    meta = {"command": "simulate", "graph": name, "seed": args.seed, "samples": args.samples}
    _emit(args, harness.format_table(harness.ESTIMATE_HEADER, [row]),
          harness.write_csv(meta, harness.ESTIMATE_HEADER, [row]))
    return 0


def cmd_exact(args) -> int:
    name, g, m = load_graph(args)
    if m is None:
        raise UsageError("exact needs a graph with a declared perfect matching")
    r = harness.exact_ratio(g, m, args.cap, args.workers)
    header = ("nodes", "exact", "ratio")
    row = (g.node_count, f"{r.numerator}/{r.denominator}", float(r))
    meta = {"command": "exact", "graph": name}
    _emit(args, harness.format_table(header, [row]), harness.write_csv(meta, header, [row]))
    return 0


def cmd_verify(args) -> int:
    if args.graph or args.family:
        name, g, m = load_graph(args)
        if m is None:
            raise UsageError("verify needs a graph with a declared perfect matching")
        corpus = [(name, g, m)]
    else:
        corpus = lemma_corpus(args.random_count, args.corpus_seed)
    header = ("graph", "nodes", "checks", "violations", "bad_at_last_rank", "max_preimage", "status")
    rows = []
    ok = True
    for name, g, m in corpus:
        suite = lemma_suite(g, m, args.cap)
        rel = verify_boundary_injectivity(g, m, args.cap)
        good = suite.ok and rel.ok
        ok &= good
        rows.append((name, g.node_count, sum(suite.checks.values()), sum(suite.violations.values()),
                     rel.bad_count, rel.max_preimage, "pass" if good else "fail"))
        for check, count in sorted(suite.violations.items()):
            print(f"{name}: {count} violations of {check}", file=sys.stderr)
        if not rel.ok:
            print(f"{name}: boundary relation check failed", file=sys.stderr)
    meta = {"command": "verify", "graphs": len(corpus)}
    _emit(args, harness.format_table(header, rows), harness.write_csv(meta, header, rows))
    return 0 if ok else 1


def cmd_lp(args) -> int:
    ns = args.ns or ([args.n] if args.n else None)
    if not ns:
        raise UsageError("lp needs --n or --ns")
    if args.format == "lp":
        if len(ns) != 1:
            raise UsageError("--format lp exports a single model; pass --n")
        text = finite_lp.to_lp_format(finite_lp.build_lp(ns[0]))
        if args.out and args.out != "-":
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    header = ("n", "value", "exact", "bound", "status")
    rows = []
    ok = True
    for n in ns:
        sol = finite_lp.solve(finite_lp.build_lp(n), exact=args.exact)
        if sol.status != "optimal":
            rows.append((n, None, None, LP_BOUND, sol.status))
            ok = False
            continue
        value = float(sol.objective)
        exact = f"{sol.objective.numerator}/{sol.objective.denominator}" if args.exact else None
        good = value >= LP_BOUND - LP_BOUND_SLACK
        ok &= good
        rows.append((n, value, exact, LP_BOUND, "pass" if good else "fail"))
    meta = {"command": "lp", "exact": args.exact}
    _emit(args, harness.format_table(header, rows), harness.write_csv(meta, header, rows))
    return 0 if ok else 1


def cmd_continuous(args) -> int:
    start = time.perf_counter()
    spec = clp.lp_infinity_spec()
    z, dual, sol = clp.closed_form()
    pair = clp.verify_pair(spec, z, dual, args.grid, args.tol)
    value = clp.optimal_value()
    header = ("check", "family", "max_violation", "theta", "status")
    rows = []
    for report in (pair.primal, pair.dual, pair.slackness):
        for f in report.families:
            rows.append((report.kind, f.family, f.max_violation, f.theta, "pass" if f.passed else "fail"))
    gap_ok = abs(pair.gap) <= args.tol
    value_ok = abs(pair.primal_value - value) <= VALUE_TOL and abs(value - LP_BOUND) <= VALUE_TOL
    rows.append(("duality", "gap", pair.gap, None, "pass" if gap_ok else "fail"))
    rows.append(("objective", "primal_value", pair.primal_value, None, "pass" if value_ok else "fail"))
    ok = pair.primal.ok and pair.dual.ok and pair.slackness.ok and gap_ok and value_ok
    for n in args.ns or ():
        lp = finite_lp.solve(finite_lp.build_lp(n))
        emb = clp.embed_step(lp.x)
        rep = clp.check_primal_feasibility(spec, emb, args.grid, args.tol)
        area_err = abs(float(emb.integral()) - lp.objective)
        good = rep.ok and area_err <= 1e-12
        ok &= good
        worst = max(rep.families, key=lambda f: f.max_violation)
        rows.append((f"embed_n{n}", worst.family, worst.max_violation, worst.theta, "pass" if good else "fail"))
    meta = {"command": "continuous", "grid": args.grid, "tol": args.tol, "mu": sol.mu, "value": value}
    table = harness.format_table(header, rows)
    table += f"optimal value {value:.7f}  mu {sol.mu:.7f}  ({time.perf_counter() - start:.2f} s)\n"
    _emit(args, table, harness.write_csv(meta, header, rows))
    return 0 if ok else 1


def cmd_hardness(args) -> int:
    rows = harness.hardness_table(args.eps, args.ns, args.samples, args.seed, args.workers)
    table_rows = harness.hardness_rows(rows)
    _emit(args, harness.format_table(harness.HARDNESS_HEADER, table_rows),
          harness.hardness_csv(args.eps, rows, args.seed, args.samples))
    return 0


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--family", choices=FAMILIES, help="built-in graph family")
    p.add_argument("--n", type=_positive, help="size parameter of the family")
    p.add_argument("--eps", type=float, default=0.63, help="double-bomb middle-block fraction")
    p.add_argument("--p", type=float, default=0.4, help="edge probability for --family random")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oblivious-ranking",
        description="Ranking on oblivious matching: simulation, exact enumeration and LP bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, workers=True):
        p.add_argument("--out", help="CSV output path ('-' for stdout)")
        if seed:
            p.add_argument("--seed", type=_seed, default=0)
        if workers:
            p.add_argument("--workers", type=_positive, default=None)

    p = sub.add_parser("simulate", help="Monte Carlo ratio estimate")
    _graph_args(p)
    p.add_argument("--samples", type=_positive, default=10_000)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact ratio by enumerating all permutations")
    _graph_args(p)
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify", help="exhaustive structural checks on the corpus or one graph")
    _graph_args(p)
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    p.add_argument("--random-count", type=int, default=20)
    p.add_argument("--corpus-seed", type=int, default=20130000)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lp", help="solve the finite LP")
    p.add_argument("--n", type=_positive)
    p.add_argument("--ns", type=_int_list)
    p.add_argument("--exact", action="store_true", help="solve over the rationals")
    p.add_argument("--format", choices=("table", "lp"), default="table",
                   help="'lp' writes the model in CPLEX LP format")
    common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("continuous", help="verify the closed-form continuous optimum")
    p.add_argument("--grid", type=_positive, default=clp.DEFAULT_GRID)
    p.add_argument("--tol", type=float, default=clp.DEFAULT_TOL)
    p.add_argument("--ns", type=_int_list, help="also check step embeddings of these LP(n) optima")
    common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_continuous)

    p = sub.add_parser("hardness-table", help="Monte Carlo ratios on double-bomb graphs")
    p.add_argument("--eps", type=float, default=0.63)
    p.add_argument("--ns", type=_int_list, default=[20, 50, 100, 200, 500])
    p.add_argument("--samples", type=_positive, default=100_000)
    common(p)
    p.set_defaults(func=cmd_hardness)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "workers", 1) is None:
            args.workers = default_workers()
        if getattr(args, "grid", 2) < 2:
            raise UsageError("--grid must be at least 2")
        if hasattr(args, "tol") and not (args.tol >= 0 and math.isfinite(args.tol)):
            raise UsageError("--tol must be a finite non-negative number")
        return args.func(args)
    except (UsageError, GraphError, EnumerationCapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
