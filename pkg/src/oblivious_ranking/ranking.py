"""The greedy matching game: probe lists, Ranking, and single-node removal.

Two engines compute the same matching. ``run_probe`` scans an explicit list of
node pairs and is the oracle. ``run_ranking`` walks the ranks and lets each
unmatched node take its best-ranked free neighbor. On the lexicographic list
both engines agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .graph import Graph

UNMATCHED = -1


class StructureError(RuntimeError):
    """An alternating-path invariant failed; this indicates a bug, not bad input."""


@dataclass(frozen=True)
class Permutation:
    """Bijection between nodes and ranks ``1..n``.

    ``node_at[r - 1]`` is the node holding rank ``r``; ``rank_of[u]`` is 1-based.
    """

    node_at: tuple[int, ...]
    rank_of: tuple[int, ...]

    @classmethod
    def from_order(cls, order: Iterable[int]) -> "Permutation":
        node_at = tuple(int(u) for u in order)
        n = len(node_at)
        rank_of = [0] * n
        for r, u in enumerate(node_at, start=1):
            if not 0 <= u < n or rank_of[u]:
                raise ValueError(f"{node_at} is not a permutation of 0..{n - 1}")
            rank_of[u] = r
        return cls(node_at, tuple(rank_of))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls.from_order(range(n))

    def __len__(self) -> int:
        return len(self.node_at)

    def node(self, rank: int) -> int:
        return self.node_at[rank - 1]

    def rank(self, u: int) -> int:
        return self.rank_of[u]

    def removed(self, u: int) -> tuple[int, ...]:
        """The order of sigma_u: every node but ``u``, relative order kept."""
        return tuple(v for v in self.node_at if v != u)

    def insert_at(self, u: int, rank: int) -> "Permutation":
        """sigma_u^i: remove ``u`` then reinsert it at ``rank``."""
        n = len(self.node_at)
        if not 1 <= rank <= n:
            raise ValueError(f"rank {rank} outside [1, {n}]")
        rest = self.removed(u)
        return Permutation.from_order(rest[: rank - 1] + (u,) + rest[rank - 1 :])


@dataclass(frozen=True)
class MatchingOutcome:
    partner: tuple[int, ...]

    def matched(self, u: int) -> bool:
        return self.partner[u] != UNMATCHED

    def pairs(self) -> frozenset[frozenset[int]]:
        return frozenset(
            frozenset((u, v)) for u, v in enumerate(self.partner) if v != UNMATCHED and u < v
        )

    @property
    def size(self) -> int:
        return sum(1 for v in self.partner if v != UNMATCHED) // 2

    @property
    def matched_count(self) -> int:
        return sum(1 for v in self.partner if v != UNMATCHED)


ProbeList = tuple[tuple[int, int], ...]


def lex_probe_list(sigma: Permutation) -> ProbeList:
    """All pairs ordered by (rank of the better node, rank of the other)."""
    return tuple(combinations(sigma.node_at, 2))


def run_probe(g: Graph, probes: Sequence[tuple[int, int]]) -> MatchingOutcome:
    partner = [UNMATCHED] * g.node_count
    for u, v in probes:
        if partner[u] == UNMATCHED and partner[v] == UNMATCHED and g.has_edge(u, v):
            partner[u], partner[v] = v, u
    return MatchingOutcome(tuple(partner))


def run_ranking(
    g: Graph, sigma: Permutation, unavailable: Optional[int] = None
) -> MatchingOutcome:
    """Rank-sequential Ranking; ``unavailable`` is a node that never matches."""
    return MatchingOutcome(tuple(greedy_partners(g.adjacency, sigma.node_at, unavailable)))


def greedy_partners(
    adjacency: Sequence[Sequence[int]],
    order: Sequence[int],
    unavailable: Optional[int] = None,
) -> list[int]:
    """Partner list of Ranking run on ``order`` (node at rank 1 first)."""
    n = len(order)
    rank_of = [0] * n
    for r, u in enumerate(order):
        rank_of[u] = r
    partner = [UNMATCHED] * n
    if unavailable is not None:
        # a self-partner blocks the node; cleared before returning
        partner[unavailable] = unavailable
    for u in order:
        if partner[u] != UNMATCHED:
            continue
        best = UNMATCHED
        best_rank = n
        for v in adjacency[u]:
            if partner[v] == UNMATCHED and rank_of[v] < best_rank:
                best, best_rank = v, rank_of[v]
        if best != UNMATCHED:
            partner[u] = best
            partner[best] = u
    if unavailable is not None:
        partner[unavailable] = UNMATCHED
    return partner


def remove_node(probes: Sequence[tuple[int, int]], u: int) -> ProbeList:
    return tuple(p for p in probes if u not in p)


def is_maximal(g: Graph, outcome: MatchingOutcome) -> bool:
    p = outcome.partner
    return all(
        p[u] != UNMATCHED or p[v] != UNMATCHED for u, v in g.edges()
    )


def is_valid_matching(g: Graph, outcome: MatchingOutcome) -> bool:
    p = outcome.partner
    for u, v in enumerate(p):
        if v == UNMATCHED:
            continue
        if v == u or p[v] != u or not g.has_edge(u, v):
            return False
    return True


def greedy_fact_holds(g: Graph, sigma: Permutation, outcome: MatchingOutcome) -> bool:
    """Every neighbor of an unmatched node is matched to a better-ranked node."""
    p, r = outcome.partner, sigma.rank_of
    for u in range(g.node_count):
        if p[u] != UNMATCHED:
            continue
        for w in g.adjacency[u]:
            if p[w] == UNMATCHED or r[p[w]] >= r[u]:
                return False
    return True


@dataclass(frozen=True)
class AlternatingPathReport:
    path: tuple[int, ...]
    u_matched: bool


def alternating_path(m1: MatchingOutcome, m2: MatchingOutcome, start: int) -> tuple[int, ...]:
    """Nodes of ``m1 (+) m2`` walked from ``start``.

    Raises StructureError unless the symmetric difference is empty or is a single
    simple path with ``start`` as an endpoint. Returns ``()`` when empty.
    """
    diff = m1.pairs() ^ m2.pairs()
    if not diff:
        return ()
    incident: dict[int, list[int]] = {}
    for e in diff:
        a, b = tuple(e)
        incident.setdefault(a, []).append(b)
        incident.setdefault(b, []).append(a)
    if len(incident.get(start, ())) != 1:
        raise StructureError(f"node {start} is not an endpoint of the symmetric difference")
    path = [start]
    prev, cur = None, start
    while True:
        nxt = [w for w in incident[cur] if w != prev]
        if not nxt:
            break
        if len(nxt) > 1:
            raise StructureError(f"branching at node {cur}")
        prev, cur = cur, nxt[0]
        if cur in path:
            raise StructureError("symmetric difference contains a cycle")
        path.append(cur)
    if len(path) - 1 != len(diff):
        raise StructureError("symmetric difference has more than one component")
    first = m1.pairs()
    sides = [frozenset(e) in first for e in zip(path, path[1:])]
    if any(a == b for a, b in zip(sides, sides[1:])):
        raise StructureError("path does not alternate between the matchings")
    return tuple(path)


def removal_path(g: Graph, probes: Sequence[tuple[int, int]], u: int) -> AlternatingPathReport:
    full = run_probe(g, probes)
    reduced = run_probe(g, remove_node(probes, u))
    path = alternating_path(full, reduced, u)
    matched = full.matched(u)
    if bool(path) != matched:
        raise StructureError(
            f"path {'present' if path else 'absent'} but u matched = {matched}"
        )
    return AlternatingPathReport(path, matched)
