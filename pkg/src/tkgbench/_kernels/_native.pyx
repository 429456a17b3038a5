# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics identical to tkgbench._kernels.pure.

The pure module is the readable reference; keep the two in lockstep. The
shared regression suite in tests/test_kernels.py asserts equivalence.
"""

import numpy as np

BACKEND_NAME = "native"

AVERAGE = 0
COMPLETE = 1


cdef Py_ssize_t _lower_bound(const long long[:] arr, Py_ssize_t lo,
                             Py_ssize_t hi, long long val) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < val:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef struct Counts:
    long long body
    long long rule


cdef bint _head_holds(const long long[:] pair_key, const long long[:] pair_max_ts,
                      long long pk, long long t_last, bint strict) noexcept nogil:
    cdef Py_ssize_t j = _lower_bound(pair_key, 0, pair_key.shape[0], pk)
    if j == pair_key.shape[0] or pair_key[j] != pk:
        return False
    if strict:
        return pair_max_ts[j] > t_last
    return pair_max_ts[j] >= t_last


cdef void _count_descend(
    Counts* counts,
    const long long[:] fwd_key, const long long[:] fwd_to, const long long[:] fwd_ts,
    const long long[:] inv_key, const long long[:] inv_to, const long long[:] inv_ts,
    const long long[:] pair_key, const long long[:] pair_max_ts,
    long long nv,
    const long long[:] body_rels, const unsigned char[:] body_inverted,
    long long head_base,
    bint strict,
    Py_ssize_t pos, long long x1, long long node, long long t_prev,
) noexcept nogil:
    cdef const long long[:] keys
    cdef const long long[:] tos
    cdef const long long[:] tss
    if body_inverted[pos]:
        keys = inv_key; tos = inv_to; tss = inv_ts
    else:
        keys = fwd_key; tos = fwd_to; tss = fwd_ts
    cdef long long key = body_rels[pos] * nv + node
    cdef Py_ssize_t lo = _lower_bound(keys, 0, keys.shape[0], key)
    cdef Py_ssize_t hi = _lower_bound(keys, lo, keys.shape[0], key + 1)
    lo = _lower_bound(tss, lo, hi, t_prev)
    cdef Py_ssize_t e
    cdef Py_ssize_t depth = body_rels.shape[0]
    for e in range(lo, hi):
        if pos + 1 == depth:
            counts.body += 1
            if _head_holds(pair_key, pair_max_ts,
                           (head_base + x1) * nv + tos[e], tss[e], strict):
                counts.rule += 1
        else:
            _count_descend(counts, fwd_key, fwd_to, fwd_ts,
                           inv_key, inv_to, inv_ts, pair_key, pair_max_ts,
                           nv, body_rels, body_inverted, head_base, strict,
                           pos + 1, x1, tos[e], tss[e])


def body_supports(
    fwd_key, fwd_to, fwd_ts,
    inv_key, inv_to, inv_ts,
    pair_key, pair_max_ts,
    nv,
    body_rels, body_inverted,
    head_rel,
    strict,
):
    """See tkgbench._kernels.pure.body_supports."""
    cdef const long long[:] c_fwd_key = fwd_key
    cdef const long long[:] c_fwd_to = fwd_to
    cdef const long long[:] c_fwd_ts = fwd_ts
    cdef const long long[:] c_inv_key = inv_key
    cdef const long long[:] c_inv_to = inv_to
    cdef const long long[:] c_inv_ts = inv_ts
    cdef const long long[:] c_pair_key = pair_key
    cdef const long long[:] c_pair_max_ts = pair_max_ts
    cdef const long long[:] c_rels = np.ascontiguousarray(body_rels, dtype=np.int64)
    cdef const unsigned char[:] c_inv = np.ascontiguousarray(
        body_inverted, dtype=np.uint8)
    cdef long long c_nv = nv
    cdef long long head_base = <long long> head_rel * c_nv
    cdef bint c_strict = strict
    cdef Py_ssize_t depth = c_rels.shape[0]
    if depth == 0:
        return 0, 0

    cdef Counts counts
    counts.body = 0
    counts.rule = 0

    cdef const long long[:] keys0
    cdef const long long[:] tos0
    cdef const long long[:] tss0
    if c_inv[0]:
        keys0 = c_inv_key; tos0 = c_inv_to; tss0 = c_inv_ts
    else:
        keys0 = c_fwd_key; tos0 = c_fwd_to; tss0 = c_fwd_ts
    cdef long long rel_base = c_rels[0] * c_nv
    cdef Py_ssize_t lo = _lower_bound(keys0, 0, keys0.shape[0], rel_base)
    cdef Py_ssize_t hi = _lower_bound(keys0, lo, keys0.shape[0], rel_base + c_nv)
    cdef Py_ssize_t e
    cdef long long x1
    with nogil:
        for e in range(lo, hi):
            x1 = keys0[e] - rel_base
            if depth == 1:
                counts.body += 1
                if _head_holds(c_pair_key, c_pair_max_ts,
                               (head_base + x1) * c_nv + tos0[e], tss0[e],
                               c_strict):
                    counts.rule += 1
            else:
                _count_descend(&counts, c_fwd_key, c_fwd_to, c_fwd_ts,
                               c_inv_key, c_inv_to, c_inv_ts,
                               c_pair_key, c_pair_max_ts,
                               c_nv, c_rels, c_inv, head_base, c_strict,
                               1, x1, tos0[e], tss0[e])
    return counts.body, counts.rule


cdef void _query_descend(
    set found,
    const long long[:] fwd_key, const long long[:] fwd_to, const long long[:] fwd_ts,
    const long long[:] inv_key, const long long[:] inv_to, const long long[:] inv_ts,
    long long nv,
    const long long[:] body_rels, const unsigned char[:] body_inverted,
    long long t_max,
    Py_ssize_t pos, long long node, long long t_prev,
):
    cdef const long long[:] keys
    cdef const long long[:] tos
    cdef const long long[:] tss
    if body_inverted[pos]:
        keys = inv_key; tos = inv_to; tss = inv_ts
    else:
        keys = fwd_key; tos = fwd_to; tss = fwd_ts
    cdef long long key = body_rels[pos] * nv + node
    cdef Py_ssize_t lo = _lower_bound(keys, 0, keys.shape[0], key)
    cdef Py_ssize_t hi = _lower_bound(keys, lo, keys.shape[0], key + 1)
    lo = _lower_bound(tss, lo, hi, t_prev)
    cdef Py_ssize_t e
    cdef Py_ssize_t depth = body_rels.shape[0]
    for e in range(lo, hi):
        if tss[e] >= t_max:
            break
        if pos + 1 == depth:
            found.add(tos[e])
        else:
            _query_descend(found, fwd_key, fwd_to, fwd_ts,
                           inv_key, inv_to, inv_ts, nv,
                           body_rels, body_inverted, t_max,
                           pos + 1, tos[e], tss[e])


def query_candidates(
    fwd_key, fwd_to, fwd_ts,
    inv_key, inv_to, inv_ts,
    nv,
    body_rels, body_inverted,
    anchor,
    t_min, t_max,
):
    """See tkgbench._kernels.pure.query_candidates."""
    cdef const long long[:] c_rels = np.ascontiguousarray(body_rels, dtype=np.int64)
    cdef const unsigned char[:] c_inv = np.ascontiguousarray(
        body_inverted, dtype=np.uint8)
    if c_rels.shape[0] == 0:
        return []
    found = set()
    _query_descend(found, fwd_key, fwd_to, fwd_ts,
                   inv_key, inv_to, inv_ts, nv, c_rels, c_inv,
                   t_max, 0, anchor, t_min)
    return sorted(int(x) for x in found)


def agglomerate(dist, sizes, max_size, threshold, linkage):
    """See tkgbench._kernels.pure.agglomerate."""
    cdef double[:, :] d = dist
    cdef Py_ssize_t n = d.shape[0]
    labels_arr = np.arange(n, dtype=np.int64)
    cdef long long[:] labels = labels_arr
    active_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[:] active = active_arr
    sizes_arr = np.asarray(sizes, dtype=np.int64).copy()
    cdef long long[:] sz = sizes_arr
    cdef long long c_max = max_size
    cdef double c_threshold = threshold
    cdef int c_linkage = linkage

    cdef Py_ssize_t i, j, k, bi, bj
    cdef double best, val
    cdef long long si, sj
    while True:
        best = c_threshold
        bi = -1
        bj = -1
        with nogil:
            for i in range(n):
                if not active[i]:
                    continue
                for j in range(i + 1, n):
                    if not active[j]:
                        continue
                    if sz[i] + sz[j] > c_max:
                        continue
                    val = d[i, j]
                    if val < best:
                        best = val
                        bi = i
                        bj = j
        if bi < 0:
            break
        si = sz[bi]
        sj = sz[bj]
        with nogil:
            for k in range(n):
                if not active[k] or k == bi or k == bj:
                    continue
                if c_linkage == 1:  # complete linkage
                    val = d[bi, k] if d[bi, k] > d[bj, k] else d[bj, k]
                else:
                    val = (si * d[bi, k] + sj * d[bj, k]) / (si + sj)
                d[bi, k] = val
                d[k, bi] = val
            sz[bi] = si + sj
            active[bj] = False
            for k in range(n):
                if labels[k] == bj:
                    labels[k] = bi
    return labels_arr
