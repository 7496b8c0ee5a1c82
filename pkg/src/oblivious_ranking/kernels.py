"""Backend selection for the Ranking hot loop.

The Cython extension is used when it was built; otherwise the pure-Python
module with the same functions is loaded. Set ``OBLIVIOUS_RANKING_PURE=1`` to
force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _kernels_py
from .graph import Graph

# node count above which the adjacency bitset is skipped (it takes n^2/8 bytes)
BITSET_LIMIT = 16384


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("OBLIVIOUS_RANKING_PURE", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


backend, BACKEND = _load()


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out


@dataclass(frozen=True)
class KernelGraph:
    """Flat arrays consumed by the kernels."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    bits: np.ndarray

    @classmethod
    def from_csr(cls, indptr: np.ndarray, indices: np.ndarray) -> "KernelGraph":
        n = len(indptr) - 1
        indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        indices = np.ascontiguousarray(indices, dtype=np.int32)
        if n > BITSET_LIMIT:
            bits = np.zeros((0, 1), dtype=np.uint64)
        else:
            # bit v of row u is bit (v % 64) of word v // 64
            bits = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
            rows = np.repeat(np.arange(n), np.diff(indptr))
            np.bitwise_or.at(
                bits, (rows, indices >> 6), np.left_shift(np.uint64(1), (indices & 63).astype(np.uint64))
            )
        return cls(n, indptr, indices, bits)

    @classmethod
    def from_graph(cls, g: Graph) -> "KernelGraph":
        return cls.from_csr(*g.csr())


def ranking_partners(kg: KernelGraph, order, module: ModuleType = None) -> np.ndarray:
    mod = module or backend
    order = np.ascontiguousarray(order, dtype=np.int32)
    return mod.ranking_partners(kg.indptr, kg.indices, kg.bits, order)


def ranking_batch(
    kg: KernelGraph, orders: np.ndarray, check: bool = False, module: ModuleType = None
) -> tuple[np.ndarray, int]:
    """Matched-node counts for each row of ``orders`` plus the non-maximal tally."""
    mod = module or backend
    orders = np.ascontiguousarray(orders, dtype=np.int32)
    counts = np.zeros(orders.shape[0], dtype=np.int64)
    bad = mod.ranking_batch(kg.indptr, kg.indices, kg.bits, orders, counts, check)
    return counts, int(bad)
