"""Exhaustive event tables and machine checks of the counting lemmas.

Everything here enumerates all n! permutations, so sizes are guarded by an
enumeration cap. Counts are exact Python integers.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice, permutations
from typing import Iterator, Literal, NamedTuple, Optional

from .graph import (
    Graph,
    PerfectMatchingMap,
    bipartite_matching,
    complete_bipartite,
    complete_graph,
    consecutive_matching,
    cycle_graph,
    double_bomb,
    path_graph,
    random_planted_graph,
    validate_perfect_matching,
)
from .ranking import (
    UNMATCHED,
    MatchingOutcome,
    Permutation,
    StructureError,
    alternating_path,
    greedy_fact_holds,
    greedy_partners,
    is_maximal,
    lex_probe_list,
    removal_path,
    run_probe,
    run_ranking,
)

DEFAULT_CAP = 8


class EnumerationCapError(ValueError):
    pass


class Instance(NamedTuple):
    sigma: Permutation
    u: int


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise EnumerationCapError(
            f"n = {n} exceeds the enumeration cap {cap} ({math.factorial(n)} permutations)"
        )


def classify(g: Graph, inst: Instance) -> Literal["good", "bad"]:
    return "good" if run_ranking(g, inst.sigma).matched(inst.u) else "bad"


def remove_and_insert(sigma: Permutation, u: int, i: int) -> Permutation:
    return sigma.insert_at(u, i)


def _insertion_status(g: Graph, order: tuple[int, ...], u: int) -> list[bool]:
    """``status[i-1]`` is True iff u is matched after moving it to rank i."""
    rest = tuple(v for v in order if v != u)
    return [
        greedy_partners(g.adjacency, rest[:i] + (u,) + rest[i:])[u] != UNMATCHED
        for i in range(len(order))
    ]


def _marginal_from_status(status: list[bool]) -> Optional[int]:
    drops = [t for t in range(2, len(status) + 1) if status[t - 2] and not status[t - 1]]
    if not drops:
        return None
    t = drops[0]
    if len(drops) > 1 or not all(status[: t - 1]) or any(status[t - 1 :]):
        raise StructureError(f"matched status is not a prefix of insertion ranks: {status}")
    return t


def marginal_position(g: Graph, inst: Instance) -> Optional[int]:
    """Rank t with u bad when inserted at t and good at t-1; None if never bad."""
    return _marginal_from_status(_insertion_status(g, inst.sigma.node_at, inst.u))


# -- event tables ---------------------------------------------------------------


@dataclass(frozen=True)
class EventTables:
    """Exact counts indexed by rank: entry ``t-1`` holds |Q_t|, |R_t|, |S_t|."""

    n: int
    q_count: tuple[int, ...]
    r_count: tuple[int, ...]
    s_count: tuple[int, ...]

    @property
    def total(self) -> int:
        return math.factorial(self.n)

    @property
    def x(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(q, self.total) for q in self.q_count)

    @property
    def alpha(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(s, self.total) for s in self.s_count)

    @property
    def good_total(self) -> int:
        return sum(self.q_count)

    def ratio(self) -> Fraction:
        return Fraction(self.good_total, self.n * self.total)

    def partition_holds(self) -> bool:
        return all(q + r == self.total for q, r in zip(self.q_count, self.r_count))

    def monotone_holds(self) -> bool:
        return all(a >= b for a, b in zip(self.q_count, self.q_count[1:]))

    def __add__(self, other: "EventTables") -> "EventTables":
        if self.n != other.n:
            raise ValueError("cannot merge tables of different sizes")
        add = lambda a, b: tuple(x + y for x, y in zip(a, b))  # noqa: E731
        return EventTables(
            self.n,
            add(self.q_count, other.q_count),
            add(self.r_count, other.r_count),
            add(self.s_count, other.s_count),
        )


def _permutation_range(n: int, start: int, stop: int) -> Iterator[tuple[int, ...]]:
    return islice(permutations(range(n)), start, stop)


def _tables_chunk(g: Graph, start: int, stop: int) -> EventTables:
    n = g.node_count
    q = [0] * n
    r = [0] * n
    s = [0] * n
    adj = g.adjacency
    for order in _permutation_range(n, start, stop):
        partner = greedy_partners(adj, order)
        for t, u in enumerate(order):
            if partner[u] != UNMATCHED:
                q[t] += 1
                continue
            r[t] += 1
            if t == 0:
                continue
            rest = order[:t] + order[t + 1 :]
            moved = rest[: t - 1] + (u,) + rest[t - 1 :]
            if greedy_partners(adj, moved)[u] != UNMATCHED:
                s[t] += 1
    return EventTables(n, tuple(q), tuple(r), tuple(s))


def enumerate_tables(g: Graph, cap: int = DEFAULT_CAP, workers: int = 1) -> EventTables:
    """Count Q_t, R_t, S_t over all n! permutations.

    With ``workers > 1`` the permutation index range is split across processes
    and partial tables are summed; the result does not depend on the split.
    """
    n = g.node_count
    _check_cap(n, cap)
    total = math.factorial(n)
    if workers <= 1 or total < 1000:
        return _tables_chunk(g, 0, total)
    bounds = [total * i // workers for i in range(workers + 1)]
    with ProcessPoolExecutor(workers) as pool:
        parts = pool.map(_tables_chunk, [g] * workers, bounds[:-1], bounds[1:])
        tables = list(parts)
    out = tables[0]
    for t in tables[1:]:
        out = out + t
    return out


def verify_bad_count_identity(tables: EventTables) -> bool:
    """|R_t| equals the running sum of |S_i| for i <= t, exactly."""
    running = 0
    for r, s in zip(tables.r_count, tables.s_count):
        running += s
        if r != running:
            return False
    return True


def verify_evolving_inequality(tables: EventTables) -> bool:
    """sum_{i<=t} (n-i+1)|S_i| <= sum_{i<t} |Q_i| for every t in 2..n."""
    n = tables.n
    lhs = 0
    rhs = 0
    for t in range(1, n + 1):
        lhs += (n - t + 1) * tables.s_count[t - 1]
        if t >= 2 and lhs > rhs:
            return False
        rhs += tables.q_count[t - 1]
    return True


# -- boundary relation ----------------------------------------------------------


def boundary_image(
    g: Graph, m: PerfectMatchingMap, inst: Instance
) -> list[tuple[int, Instance]]:
    """The 2n (rule, good instance) pairs produced by a bad instance at rank n."""
    sigma, u = inst
    n = len(sigma)
    base = run_ranking(g, sigma)
    if sigma.rank(u) != n or base.matched(u):
        raise ValueError("boundary_image needs u at rank n and unmatched")
    ustar = m[u]
    v_orig = base.partner[ustar]
    out: list[tuple[int, Instance]] = []
    for i in range(1, n + 1):
        rho = sigma.insert_at(u, i)
        mr = run_ranking(g, rho)
        p = mr.partner
        if p[u] == UNMATCHED:
            if p[ustar] == UNMATCHED:
                raise StructureError(f"u and u* both unmatched at insertion rank {i}")
            out.append((1, Instance(rho, ustar)))
            out.append((2, Instance(rho, p[ustar])))
        else:
            out.append((3, Instance(rho, u)))
            if p[ustar] == u:
                out.append((4, Instance(rho, ustar)))
            elif p[ustar] != UNMATCHED:
                out.append((5, Instance(rho, p[ustar])))
            else:
                if v_orig == UNMATCHED:
                    raise StructureError("u* unmatched in sigma although u is unmatched")
                out.append((6, Instance(rho, v_orig)))
        for rule, produced in out[-2:]:
            if not mr.matched(produced.u):
                raise StructureError(f"R({rule}) produced a bad instance at rank {i}")
    return out


@dataclass
class RelationReport:
    n: int
    bad_count: int = 0
    good_total: int = 0
    image_sizes: Counter = field(default_factory=Counter)
    preimage_histogram: Counter = field(default_factory=Counter)
    max_preimage: int = 0
    rule_disjoint: bool = True
    images_distinct: bool = True

    @property
    def count_inequality_holds(self) -> bool:
        return 2 * self.n * self.bad_count <= 3 * self.good_total

    @property
    def ok(self) -> bool:
        return (
            set(self.image_sizes) <= {2 * self.n}
            and self.max_preimage <= 3
            and self.rule_disjoint
            and self.images_distinct
            and self.count_inequality_holds
        )


def verify_boundary_injectivity(
    g: Graph, m: PerfectMatchingMap, cap: int = DEFAULT_CAP
) -> RelationReport:
    n = g.node_count
    _check_cap(n, cap)
    report = RelationReport(n)
    preimages: Counter = Counter()
    by_rule: Counter = Counter()
    for order in permutations(range(n)):
        partner = greedy_partners(g.adjacency, order)
        report.good_total += sum(1 for p in partner if p != UNMATCHED)
        u = order[-1]
        if partner[u] != UNMATCHED:
            continue
        report.bad_count += 1
        image = boundary_image(g, m, Instance(Permutation.from_order(order), u))
        report.image_sizes[len(image)] += 1
        produced = [inst for _, inst in image]
        if len(set(produced)) != len(produced):
            report.images_distinct = False
        for inst in set(produced):
            preimages[inst] += 1
        for rule, inst in image:
            by_rule[rule, inst] += 1
    report.rule_disjoint = all(c == 1 for c in by_rule.values())
    report.preimage_histogram = Counter(preimages.values())
    report.max_preimage = max(preimages.values(), default=0)
    return report


# -- structural lemma suite -----------------------------------------------------


@dataclass
class LemmaSuiteReport:
    n: int
    tables: EventTables
    violations: Counter = field(default_factory=Counter)
    checks: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def record(self, name: str, passed: bool) -> None:
        self.checks[name] += 1
        if not passed:
            self.violations[name] += 1


CHECK_NAMES = (
    "bad_count_identity",
    "evolving_inequality",
    "partition",
    "s1_empty",
    "monotone",
    "maximal",
    "min_rank_choice",
    "reinsertion_path",
    "removal_path",
    "marginal_position",
    "engine_equivalence",
)


def _path_status_ok(a: MatchingOutcome, b: MatchingOutcome, u: int) -> bool:
    try:
        path = alternating_path(a, b, u)
    except StructureError:
        return False
    if not path:
        return False
    ends = {path[0], path[-1]}
    flips = {w for w in range(len(a.partner)) if a.matched(w) != b.matched(w)}
    return flips <= ends


def lemma_suite(
    g: Graph,
    m: Optional[PerfectMatchingMap] = None,
    cap: int = DEFAULT_CAP,
    check_engines: bool = True,
) -> LemmaSuiteReport:
    """Run every per-permutation check plus the table identities on one graph."""
    n = g.node_count
    _check_cap(n, cap)
    if m is not None and not validate_perfect_matching(g, m):
        raise ValueError("supplied matching is not a perfect matching of g")
    tables = enumerate_tables(g, cap)
    rep = LemmaSuiteReport(n, tables)
    rep.record("bad_count_identity", verify_bad_count_identity(tables))
    rep.record("evolving_inequality", verify_evolving_inequality(tables))
    rep.record("partition", tables.partition_holds())
    rep.record("s1_empty", tables.s_count[0] == 0)
    rep.record("monotone", tables.monotone_holds())

    for order in permutations(range(n)):
        sigma = Permutation.from_order(order)
        out = run_ranking(g, sigma)
        rep.record("maximal", is_maximal(g, out))
        rep.record("min_rank_choice", greedy_fact_holds(g, sigma, out))
        probes = lex_probe_list(sigma)
        if check_engines:
            rep.record("engine_equivalence", run_probe(g, probes) == out)
        for u in range(n):
            try:
                removal_path(g, probes, u)
                rep.record("removal_path", True)
            except StructureError:
                rep.record("removal_path", False)
            if out.matched(u):
                continue
            status = _insertion_status(g, order, u)
            try:
                t = _marginal_from_status(status)
                rep.record("marginal_position", t is not None and t <= sigma.rank(u))
            except StructureError:
                rep.record("marginal_position", False)
            for i in range(1, n + 1):
                if status[i - 1]:
                    moved = run_ranking(g, sigma.insert_at(u, i))
                    rep.record("reinsertion_path", _path_status_ok(out, moved, u))
    return rep


# -- verification corpus --------------------------------------------------------


def lemma_corpus(
    random_count: int = 20, seed: int = 20130000
) -> list[tuple[str, Graph, PerfectMatchingMap]]:
    """Fixed small corpus: even paths/cycles, K4, K6, K33, the n=1 double bomb,
    and seeded random graphs with planted perfect matchings on 4 or 6 nodes."""
    corpus: list[tuple[str, Graph, PerfectMatchingMap]] = []
    for n in (2, 4, 6):
        corpus.append((f"P{n}", path_graph(n), consecutive_matching(n)))
    for n in (4, 6):
        corpus.append((f"C{n}", cycle_graph(n), consecutive_matching(n)))
    for n in (4, 6):
        corpus.append((f"K{n}", complete_graph(n), consecutive_matching(n)))
    corpus.append(("K3,3", complete_bipartite(3), bipartite_matching(3)))
    g, mm = double_bomb(1, 1.0)
    corpus.append(("double_bomb(1,1.0)", g, mm))
    for i in range(random_count):
        n = 4 if i % 2 == 0 else 6
        g, mm = random_planted_graph(n, 0.4, seed + i)
        corpus.append((f"random{i}(n={n})", g, mm))
    return corpus
