"""Pure-Python kernels: rule-body grounding enumeration and the
agglomerative merge loop.

These mirror tkgbench._kernels._native exactly; the compiled module is
preferred at import time when available. All functions operate on the flat
integer arrays prepared by tkgbench.rules.GroundingIndex:

* fwd arrays: facts sorted by (relation, subject, timestamp) with composite
  key ``relation * nv + subject``; ``to`` holds objects.
* inv arrays: facts sorted by (relation, object, timestamp) with composite
  key ``relation * nv + object``; ``to`` holds subjects.
* pair arrays: one entry per distinct (relation, subject, object) with the
  maximum timestamp, keyed by ``(relation * nv + subject) * nv + object``.

A rule body is a chain of atoms; atom i links chain node i to node i+1 and
matches a fact forward (subject at node i) or inverted (object at node i).
Groundings must have non-decreasing timestamps along the chain.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

BACKEND_NAME = "pure"

AVERAGE = 0
COMPLETE = 1


def _key_slice(keys, key):
    lo = bisect_left(keys, key)
    hi = bisect_left(keys, key + 1, lo)
    return lo, hi


def body_supports(
    fwd_key, fwd_to, fwd_ts,
    inv_key, inv_to, inv_ts,
    pair_key, pair_max_ts,
    nv,
    body_rels, body_inverted,
    head_rel,
    strict,
):
    """Count body groundings and those whose head fact also holds.

    Returns (body_support, rule_support). A grounding's head holds when a
    fact (X1, head_rel, X_last) exists with timestamp >= the last body
    timestamp (> when strict).
    """
    depth = len(body_rels)
    if depth == 0:
        return 0, 0
    tables = [
        (inv_key, inv_to, inv_ts) if body_inverted[i] else (fwd_key, fwd_to, fwd_ts)
        for i in range(depth)
    ]
    body = 0
    rule = 0
    head_base = head_rel * nv

    def head_holds(x1, xlast, t_last):
        pk = (head_base + x1) * nv + xlast
        j = bisect_left(pair_key, pk)
        if j == len(pair_key) or pair_key[j] != pk:
            return False
        if strict:
            return pair_max_ts[j] > t_last
        return pair_max_ts[j] >= t_last

    def descend(pos, x1, node, t_prev):
        nonlocal body, rule
        keys, tos, tss = tables[pos]
        lo, hi = _key_slice(keys, body_rels[pos] * nv + node)
        lo = lo + bisect_left(tss[lo:hi], t_prev)
        for e in range(lo, hi):
            nxt = tos[e]
            if pos + 1 == depth:
                body += 1
                if head_holds(x1, nxt, tss[e]):
                    rule += 1
            else:
                descend(pos + 1, x1, nxt, tss[e])

    keys0, tos0, tss0 = tables[0]
    rel_lo = bisect_left(keys0, body_rels[0] * nv)
    rel_hi = bisect_left(keys0, (body_rels[0] + 1) * nv, rel_lo)
    for e in range(rel_lo, rel_hi):
        x1 = keys0[e] - body_rels[0] * nv
        nxt = tos0[e]
        if depth == 1:
            body += 1
            if head_holds(x1, nxt, tss0[e]):
                rule += 1
        else:
            descend(1, x1, nxt, tss0[e])
    return body, rule


def query_candidates(
    fwd_key, fwd_to, fwd_ts,
    inv_key, inv_to, inv_ts,
    nv,
    body_rels, body_inverted,
    anchor,
    t_min, t_max,
):
    """Distinct chain-end entities for body groundings anchored at a subject.

    Every grounding fact timestamp must fall in [t_min, t_max) and
    timestamps must be non-decreasing along the chain. Returns a sorted
    list of entity codes.
    """
    depth = len(body_rels)
    if depth == 0:
        return []
    tables = [
        (inv_key, inv_to, inv_ts) if body_inverted[i] else (fwd_key, fwd_to, fwd_ts)
        for i in range(depth)
    ]
    found: set[int] = set()

    def descend(pos, node, t_prev):
        keys, tos, tss = tables[pos]
        lo, hi = _key_slice(keys, body_rels[pos] * nv + node)
        lo = lo + bisect_left(tss[lo:hi], t_prev)
        for e in range(lo, hi):
            ts = tss[e]
            if ts >= t_max:
                break
            nxt = tos[e]
            if pos + 1 == depth:
                found.add(int(nxt))
            else:
                descend(pos + 1, nxt, ts)

    descend(0, anchor, t_min)
    return sorted(found)


def agglomerate(dist, sizes, max_size, threshold, linkage):
    """Constrained bottom-up merging over a dense distance matrix.

    ``dist`` is mutated in place (pass a copy). Repeatedly merges the active
    pair with the smallest linkage distance, skipping merges that would
    exceed ``max_size``, until no permitted pair lies below ``threshold``.
    Ties break on the smallest (i, j). Returns an int64 label array mapping
    each row to the index of its cluster representative.
    """
    n = dist.shape[0]
    labels = np.arange(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    sizes = np.asarray(sizes, dtype=np.int64).copy()

    while True:
        best = threshold
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                if sizes[i] + sizes[j] > max_size:
                    continue
                d = dist[i, j]
                if d < best:
                    best = d
                    bi = i
                    bj = j
        if bi < 0:
            break
        si = sizes[bi]
        sj = sizes[bj]
        for k in range(n):
            if not active[k] or k == bi or k == bj:
                continue
            if linkage == COMPLETE:
                d = max(dist[bi, k], dist[bj, k])
            else:
                d = (si * dist[bi, k] + sj * dist[bj, k]) / (si + sj)
            dist[bi, k] = d
            dist[k, bi] = d
        sizes[bi] = si + sj
        active[bj] = False
        labels[labels == bj] = bi
    return labels
