# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Ranking kernels.

Each unmatched node must take its best-ranked free neighbor, and every free
neighbor ranks below the current node. A word-wise AND of the node's adjacency
row with the free-node bitset decides whether any free neighbor exists. If one
does, the next few free ranks are walked through a skip list, which usually
hits a neighbor early in a run; otherwise the set bits of the AND are
enumerated and the best rank among them is taken. Without a bitset (very large
graphs) the adjacency list is scanned.
"""

import numpy as np

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

cdef enum:
    WALK_LIMIT = 16


cdef inline int _find(int* nxt, int s) noexcept nogil:
    cdef int root = s
    cdef int tmp
    while nxt[root] != root:
        root = nxt[root]
    while nxt[s] != root:
        tmp = nxt[s]
        nxt[s] = root
        s = tmp
    return root


cdef int _run(
    const int* indptr,
    const int* indices,
    const u64* bits,
    Py_ssize_t words,
    const int* order,
    int n,
    int* rank_of,
    int* partner,
    int* nxt,
    u64* free,
) noexcept nogil:
    """Run Ranking on ``order``; return the matched-node count."""
    cdef int r, u, v, s, j, best, best_rank, deg, steps, count = 0
    cdef Py_ssize_t w
    cdef const u64* row
    cdef u64 x
    cdef bint any_free
    for r in range(n):
        rank_of[order[r]] = r
        partner[r] = -1
        nxt[r] = r
    nxt[n] = n
    if bits != NULL:
        for w in range(words):
            free[w] = <u64>0xFFFFFFFFFFFFFFFF
        if n & 63:
            free[words - 1] = ((<u64>1) << (n & 63)) - 1
    for r in range(n):
        u = order[r]
        if partner[u] >= 0:
            continue
        deg = indptr[u + 1] - indptr[u]
        if deg == 0:
            continue
        best = -1
        if bits != NULL:
            row = bits + u * words
            any_free = False
            for w in range(words):
                if row[w] & free[w]:
                    any_free = True
                    break
            if not any_free:
                continue
            steps = 0
            s = _find(nxt, r + 1)
            while s < n and steps < WALK_LIMIT:
                v = order[s]
                if (row[v >> 6] >> (v & 63)) & 1:
                    best = v
                    break
                steps += 1
                s = _find(nxt, s + 1)
            if best < 0:
                best_rank = n
                for w in range(words):
                    x = row[w] & free[w]
                    while x:
                        v = <int>(w * 64 + __builtin_ctzll(x))
                        if rank_of[v] < best_rank:
                            best_rank = rank_of[v]
                            best = v
                        x &= x - 1
        else:
            best_rank = n
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if partner[v] < 0 and rank_of[v] < best_rank:
                    best_rank = rank_of[v]
                    best = v
        if best >= 0:
            partner[u] = best
            partner[best] = u
            nxt[r] = r + 1
            nxt[rank_of[best]] = rank_of[best] + 1
            if bits != NULL:
                free[u >> 6] &= ~((<u64>1) << (u & 63))
                free[best >> 6] &= ~((<u64>1) << (best & 63))
            count += 2
    return count


cdef bint _maximal(const int* indptr, const int* indices, const int* partner, int n) noexcept nogil:
    cdef int u, j
    for u in range(n):
        if partner[u] >= 0:
            continue
        for j in range(indptr[u], indptr[u + 1]):
            if partner[indices[j]] < 0:
                return False
    return True


def ranking_partners(
    const int[::1] indptr,
    const int[::1] indices,
    const u64[:, ::1] bits,
    const int[::1] order,
):
    """Partner array (``-1`` when unmatched) of one Ranking run."""
    cdef int n = order.shape[0]
    rank_of = np.empty(n, dtype=np.int32)
    partner = np.empty(n, dtype=np.int32)
    nxt = np.empty(n + 1, dtype=np.int32)
    cdef int[::1] rk = rank_of
    cdef int[::1] pt = partner
    cdef int[::1] nx = nxt
    cdef const u64* bp = NULL
    cdef Py_ssize_t words = 0
    free = np.empty(max(1, bits.shape[1]), dtype=np.uint64)
    cdef u64[::1] fr = free
    if bits.shape[0] == n and n > 0:
        bp = &bits[0, 0]
        words = bits.shape[1]
    _run(&indptr[0], &indices[0] if indices.shape[0] else NULL, bp, words,
         &order[0], n, &rk[0], &pt[0], &nx[0], &fr[0])
    return partner


def ranking_batch(
    const int[::1] indptr,
    const int[::1] indices,
    const u64[:, ::1] bits,
    const int[:, ::1] orders,
    long long[::1] counts,
    bint check=False,
):
    """Matched-node count of Ranking for every row of ``orders``.

    Returns the number of runs whose matching failed the maximality check
    (always 0 unless ``check`` is set and the kernel is broken).
    """
    cdef Py_ssize_t batch = orders.shape[0]
    cdef int n = orders.shape[1]
    cdef Py_ssize_t i
    cdef int bad = 0
    rank_of = np.empty(n, dtype=np.int32)
    partner = np.empty(n, dtype=np.int32)
    nxt = np.empty(n + 1, dtype=np.int32)
    cdef int[::1] rk = rank_of
    cdef int[::1] pt = partner
    cdef int[::1] nx = nxt
    cdef const u64* bp = NULL
    cdef Py_ssize_t words = 0
    free = np.empty(max(1, bits.shape[1]), dtype=np.uint64)
    cdef u64[::1] fr = free
    cdef const int* ind = NULL
    if bits.shape[0] == n and n > 0:
        bp = &bits[0, 0]
        words = bits.shape[1]
    if indices.shape[0]:
        ind = &indices[0]
    if batch == 0:
        return 0
    with nogil:
        for i in range(batch):
            counts[i] = _run(&indptr[0], ind, bp, words, &orders[i, 0], n,
                             &rk[0], &pt[0], &nx[0], &fr[0])
            if check and not _maximal(&indptr[0], ind, &pt[0], n):
                bad += 1
    return bad
