"""Pure-Python versions of the compiled kernels; same signatures, same results."""

import numpy as np


def _run(indptr, indices, order, check):
    n = len(order)
    rank_of = [0] * n
    for r, u in enumerate(order):
        rank_of[u] = r
    partner = [-1] * n
    nbrs = [indices[indptr[u] : indptr[u + 1]] for u in range(n)]
    count = 0
    for u in order:
        if partner[u] >= 0:
            continue
        best = -1
        best_rank = n
        for v in nbrs[u]:
            if partner[v] < 0 and rank_of[v] < best_rank:
                best, best_rank = v, rank_of[v]
        if best >= 0:
            partner[u] = best
            partner[best] = u
            count += 2
    maximal = not check or all(
        partner[u] >= 0 or all(partner[v] >= 0 for v in nbrs[u]) for u in range(n)
    )
    return partner, count, maximal


def ranking_partners(indptr, indices, bits, order):
    partner, _, _ = _run(
        np.asarray(indptr).tolist(), np.asarray(indices).tolist(), np.asarray(order).tolist(), False
    )
    return np.asarray(partner, dtype=np.int32)


def ranking_batch(indptr, indices, bits, orders, counts, check=False):
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    bad = 0
    for i, order in enumerate(np.asarray(orders).tolist()):
        _, counts[i], maximal = _run(indptr, indices, order, check)
        bad += not maximal
    return bad
