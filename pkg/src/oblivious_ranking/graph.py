"""Undirected simple graphs, perfect matchings, generators and edge-list I/O.

Node ids are dense 0-based integers. A graph is immutable once built, so it
can be shared freely between worker processes and threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs, matchings or edge-list documents."""


@dataclass(frozen=True)
class Graph:
    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: Optional[tuple[str, ...]] = None
    _neighbor_sets: tuple[frozenset, ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(
            self, "_neighbor_sets", tuple(frozenset(a) for a in self.adjacency)
        )

    @property
    def n(self) -> int:
        return self.node_count

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def edges(self) -> list[tuple[int, int]]:
        """All edges as ``(u, v)`` with ``u < v``, in sorted order."""
        return [(u, v) for u in range(self.node_count) for v in self.adjacency[u] if u < v]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Compressed adjacency ``(indptr, indices)`` as int32 arrays."""
        indptr = np.zeros(self.node_count + 1, dtype=np.int32)
        indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
        indices = np.fromiter(
            (v for a in self.adjacency for v in a), dtype=np.int32, count=int(indptr[-1])
        )
        return indptr, indices

    def check_invariants(self) -> None:
        """Full scan of symmetry, range, self-loop and duplicate invariants."""
        n = self.node_count
        for u, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"adjacency of {u} not sorted/deduplicated")
            for v in nbrs:
                if not 0 <= v < n:
                    raise GraphError(f"neighbor {v} of {u} out of range")
                if v == u:
                    raise GraphError(f"self-loop at {u}")
                if u not in self._neighbor_sets[v]:
                    raise GraphError(f"asymmetric edge {u}->{v}")


@dataclass(frozen=True)
class PerfectMatchingMap:
    """Total map ``u -> u*`` onto the perfect partner of each node."""

    partner: tuple[int, ...]

    def __getitem__(self, u: int) -> int:
        return self.partner[u]

    def __len__(self) -> int:
        return len(self.partner)

    def pairs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v in enumerate(self.partner) if u < v]

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "PerfectMatchingMap":
        partner = [-1] * n
        for u, v in pairs:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"matching pair ({u}, {v}) out of range")
            if u == v or partner[u] != -1 or partner[v] != -1:
                raise GraphError(f"matching pair ({u}, {v}) conflicts with another pair")
            partner[u], partner[v] = v, u
        missing = [u for u in range(n) if partner[u] == -1]
        if missing:
            raise GraphError(f"matching does not cover node {missing[0]}")
        return cls(tuple(partner))


def build_graph(
    n: int, edges: Iterable[Sequence[int]], labels: Optional[Sequence[str]] = None
) -> Graph:
    """Build a graph on nodes ``0..n-1``; duplicate edges are merged."""
    if n < 1:
        raise GraphError(f"node count must be positive, got {n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for pair in edges:
        u, v = (int(x) for x in pair)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has a node id outside [0, {n})")
        if u == v:
            raise GraphError(f"self-loop ({u}, {v}) is not allowed")
        nbrs[u].add(v)
        nbrs[v].add(u)
    if labels is not None:
        if len(labels) != n:
            raise GraphError("label count does not match node count")
        labels = tuple(labels)
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs), labels)


def validate_perfect_matching(g: Graph, m: PerfectMatchingMap) -> bool:
    if len(m) != g.node_count:
        return False
    for u in range(g.node_count):
        v = m[u]
        if not 0 <= v < g.node_count or v == u or m[v] != u:
            return False
        if not g.has_edge(u, v):
            return False
    return True


# -- generators ---------------------------------------------------------------


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(m: int) -> Graph:
    """K_{m,m} with left nodes ``0..m-1`` and right nodes ``m..2m-1``."""
    return build_graph(2 * m, [(i, m + j) for i in range(m) for j in range(m)])


def consecutive_matching(n: int) -> PerfectMatchingMap:
    """The matching ``{0,1}, {2,3}, ...`` used by even paths, cycles and K_n."""
    if n % 2:
        raise GraphError("consecutive matching needs an even node count")
    return PerfectMatchingMap.from_pairs(n, [(i, i + 1) for i in range(0, n, 2)])


def bipartite_matching(m: int) -> PerfectMatchingMap:
    return PerfectMatchingMap.from_pairs(2 * m, [(i, m + i) for i in range(m)])


def round_half_up(x: float) -> int:
    """Nearest integer with ties up, using the decimal repr of ``x``."""
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def double_bomb(n: int, eps: float) -> tuple[Graph, PerfectMatchingMap]:
    """Bipartite hard instance with blocks of size n, n+k, n and k = round(eps*n).

    Left node ``u_i`` is id ``i-1`` and right node ``v_j`` is id ``N + j-1``
    where ``N = 3n + k``. Edges: ``u_i v_i`` for every i, ``u_i v_j`` for
    ``i <= n < j <= 2n+k`` and for ``n < i <= 2n+k < j <= N``.
    """
    if n < 1:
        raise GraphError(f"block size must be >= 1, got {n}")
    if not 0.0 < eps <= 1.0:
        raise GraphError(f"eps must lie in (0, 1], got {eps}")
    k = round_half_up(float(Decimal(repr(eps)) * n))
    if k < 1:
        raise GraphError(f"eps*n = {eps * n} rounds to k = 0")
    side = 3 * n + k
    mid_end = 2 * n + k
    edges = [(i, side + i) for i in range(side)]
    edges += [(i, side + j) for i in range(n) for j in range(n, mid_end)]
    edges += [(i, side + j) for i in range(n, mid_end) for j in range(mid_end, side)]
    labels = [f"u{i + 1}" for i in range(side)] + [f"v{j + 1}" for j in range(side)]
    g = build_graph(2 * side, edges, labels)
    m = PerfectMatchingMap.from_pairs(2 * side, [(i, side + i) for i in range(side)])
    return g, m


def random_planted_graph(
    n: int, edge_prob: float, seed: int
) -> tuple[Graph, PerfectMatchingMap]:
    """Random graph containing a planted perfect matching on a shuffled pairing."""
    if n < 2 or n % 2:
        raise GraphError("planted perfect matching needs an even node count >= 2")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    pairs = [(order[i], order[i + 1]) for i in range(0, n, 2)]
    edges = list(pairs)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                edges.append((u, v))
    return build_graph(n, edges), PerfectMatchingMap.from_pairs(n, pairs)


# -- edge-list format ---------------------------------------------------------


def read_edge_list(text: str) -> tuple[Graph, Optional[PerfectMatchingMap]]:
    """Parse the ``n`` / ``e`` / ``m`` line format; ``#`` starts a comment."""
    n = None
    edges: list[tuple[int, int]] = []
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            args = [int(t) for t in tok[1:]]
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer field in {raw!r}") from None
        if kind == "n":
            if n is not None or len(args) != 1 or args[0] < 1:
                raise GraphError(f"line {lineno}: bad node-count record {raw!r}")
            n = args[0]
            continue
        if kind not in ("e", "m") or len(args) != 2:
            raise GraphError(f"line {lineno}: malformed record {raw!r}")
        if n is None:
            raise GraphError(f"line {lineno}: record before the 'n' line")
        u, v = args
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: id out of range in {raw!r} (n = {n})")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop {raw!r}")
        (edges if kind == "e" else pairs).append((u, v))
    if n is None:
        raise GraphError("missing 'n' line")
    g = build_graph(n, edges)
    if not pairs:
        return g, None
    m = PerfectMatchingMap.from_pairs(n, pairs)
    for u, v in m.pairs():
        if not g.has_edge(u, v):
            raise GraphError(f"matching pair ({u}, {v}) is not an edge")
    return g, m


def write_edge_list(g: Graph, m: Optional[PerfectMatchingMap] = None) -> str:
    lines = [f"n {g.node_count}"]
    lines += [f"e {u} {v}" for u, v in g.edges()]
    if m is not None:
        lines += [f"m {u} {v}" for u, v in m.pairs()]
    return "\n".join(lines) + "\n"
