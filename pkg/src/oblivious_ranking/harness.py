"""Monte Carlo and exact estimates of the Ranking ratio, plus CSV emission.

The ratio is the expected number of matched nodes divided by the node count;
every graph passed here must carry a perfect matching, so the node count is
the maximum-matching size in nodes.

Monte Carlo samples are keyed by (seed, index) and their counts are summed as
Python integers, so any split of the index range across workers gives the
same estimate to the last bit.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import kernels
from .events import DEFAULT_CAP, enumerate_tables
from .graph import Graph, GraphError, PerfectMatchingMap, double_bomb, validate_perfect_matching
from .ranking import StructureError
from .sampling import permutation_block

CSV_SCHEMA = "oblivious-ranking-csv/1"
BLOCK = 2048


@dataclass(frozen=True)
class RatioEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


@dataclass(frozen=True)
class _Sums:
    total: int
    squares: int
    non_maximal: int


def _shard(kg: kernels.KernelGraph, seed: int, start: int, stop: int, check: bool) -> _Sums:
    total = squares = bad = 0
    for lo in range(start, stop, BLOCK):
        hi = min(stop, lo + BLOCK)
        counts, b = kernels.ranking_batch(kg, permutation_block(seed, lo, hi, kg.n), check)
        total += int(counts.sum())
        squares += int(counts @ counts)
        bad += b
    return _Sums(total, squares, bad)


def _require_matching(g: Graph, m: PerfectMatchingMap) -> None:
    if not validate_perfect_matching(g, m):
        raise GraphError("the supplied perfect matching is not valid for this graph")


def _estimate(sums: _Sums, n: int, samples: int, seed: int) -> RatioEstimate:
    mean = Fraction(sums.total, n * samples)
    if samples == 1:
        return RatioEstimate(float(mean), 0.0, 1, seed)
    # unbiased variance of the per-sample ratio, computed exactly
    var = Fraction(samples * sums.squares - sums.total**2, samples * (samples - 1) * n * n)
    return RatioEstimate(float(mean), math.sqrt(var / samples), samples, seed)


def monte_carlo_ratio(
    g: Graph,
    m: PerfectMatchingMap,
    samples: int,
    seed: int,
    workers: int = 1,
    check_maximal: bool = True,
) -> RatioEstimate:
    """Mean matched fraction over ``samples`` uniform permutations."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    _require_matching(g, m)
    kg = kernels.KernelGraph.from_graph(g)
    if workers <= 1 or samples < 2 * BLOCK:
        sums = _shard(kg, seed, 0, samples, check_maximal)
    else:
        bounds = [samples * i // workers for i in range(workers + 1)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_shard, [kg] * workers, [seed] * workers, bounds[:-1], bounds[1:],
                                  [check_maximal] * workers))
        sums = _Sums(sum(p.total for p in parts), sum(p.squares for p in parts),
                     sum(p.non_maximal for p in parts))
    if sums.non_maximal:
        raise StructureError(f"{sums.non_maximal} sampled runs produced a non-maximal matching")
    return _estimate(sums, g.node_count, samples, seed)


def exact_ratio(g: Graph, m: PerfectMatchingMap, cap: int = DEFAULT_CAP, workers: int = 1) -> Fraction:
    """Fraction of good instances over all n! permutations and n nodes."""
    _require_matching(g, m)
    return enumerate_tables(g, cap, workers).ratio()


@dataclass(frozen=True)
class HardnessRow:
    n: int
    k: int
    nodes: int
    estimate: RatioEstimate


def hardness_table(
    eps: float, ns: Iterable[int], samples: int, seed: int, workers: int = 1
) -> list[HardnessRow]:
    rows = []
    for n in ns:
        g, m = double_bomb(n, eps)
        k = g.node_count // 2 - 3 * n
        rows.append(HardnessRow(n, k, g.node_count, monte_carlo_ratio(g, m, samples, seed, workers)))
    return rows


# -- output -------------------------------------------------------------------


def fmt(x) -> str:
    """Seven significant digits; integers and strings pass through."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, (float, Fraction)):
        return f"{float(x):.7g}"
    return str(x)


def write_csv(meta: dict, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """One ``#`` metadata line, a header row, then data rows."""
    buf = io.StringIO()
    pairs = " ".join(f"{k}={fmt(v)}" for k, v in meta.items())
    buf.write(f"# schema={CSV_SCHEMA} {pairs}\n")
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([fmt(v) for v in row])
    return buf.getvalue()


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in header]] + [[fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


ESTIMATE_HEADER = ("nodes", "samples", "seed", "ratio", "stderr")
HARDNESS_HEADER = ("n", "k", "nodes", "samples", "seed", "ratio", "stderr")


def hardness_csv(eps: float, rows: Sequence[HardnessRow], seed: int, samples: int,
                 extra: Optional[dict] = None) -> str:
    meta = {"command": "hardness-table", "eps": eps, "seed": seed, "samples": samples,
            "k": ";".join(f"{r.n}:{r.k}" for r in rows)}
    meta.update(extra or {})
    return write_csv(meta, HARDNESS_HEADER, hardness_rows(rows))


def hardness_rows(rows: Sequence[HardnessRow]) -> list[tuple]:
    return [(r.n, r.k, r.nodes, r.estimate.samples, r.estimate.seed, r.estimate.mean, r.estimate.stderr)
            for r in rows]
