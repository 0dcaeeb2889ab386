"""Compiled inner loops for the community solver.

All kernels work on CSR arrays of an undirected graph (each edge listed from
both endpoints) and labels in ``0..n-1``. They release the GIL so distinct
individuals can be processed on separate threads, and they draw no random
numbers themselves: callers pass in orders and uniforms.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# moves must improve modularity by more than this to count
MOVE_EPS = 1e-13


@njit(cache=True, nogil=True)
def modularity_csr(indptr, indices, weights, strengths, m, labels):
    n = len(indptr) - 1
    tot = np.zeros(n)
    internal = 0.0
    for v in range(n):
        c = labels[v]
        tot[c] += strengths[v]
        for j in range(indptr[v], indptr[v + 1]):
            if labels[indices[j]] == c:
                internal += weights[j]
    two_m = 2.0 * m
    q = internal / two_m
    for c in range(n):
        if tot[c] != 0.0:
            q -= (tot[c] / two_m) ** 2
    return q


@njit(cache=True, nogil=True)
def local_search_csr(indptr, indices, weights, strengths, m, labels, order, max_sweeps):
    """Greedy single-vertex moves, in place on ``labels``.

    Each vertex in ``order`` moves to the neighbouring community (or a fresh
    empty one) with the largest positive modularity gain; ties go to the
    smaller label. Returns ``(sweeps, converged, delta_evaluations)``.
    """
    n = len(indptr) - 1
    tot = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    for v in range(n):
        tot[labels[v]] += strengths[v]
        count[labels[v]] += 1
    free = np.empty(n, dtype=np.int64)
    n_free = 0
    for c in range(n - 1, -1, -1):
        if count[c] == 0:
            free[n_free] = c
            n_free += 1

    link = np.zeros(n)
    seen = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    inv_m = 1.0 / m
    inv_2m2 = 1.0 / (2.0 * m * m)
    evaluations = 0
    sweeps = 0
    converged = False

    while sweeps < max_sweeps:
        sweeps += 1
        moved = 0
        for idx in range(len(order)):
            v = order[idx]
            kv = strengths[v]
            if kv == 0.0:
                continue
            a = labels[v]
            n_touched = 0
            for j in range(indptr[v], indptr[v + 1]):
                c = labels[indices[j]]
                if not seen[c]:
                    seen[c] = True
                    touched[n_touched] = c
                    n_touched += 1
                link[c] += weights[j]
            k_a = link[a]
            tot_a_rest = tot[a] - kv
            best = a
            best_gain = 0.0
            for t in range(n_touched):
                c = touched[t]
                if c == a:
                    continue
                gain = (link[c] - k_a) * inv_m - kv * (tot[c] - tot_a_rest) * inv_2m2
                evaluations += 1
                if gain > best_gain or (gain == best_gain and best != a and c < best):
                    best = c
                    best_gain = gain
            if count[a] > 1 and n_free > 0:
                c = free[n_free - 1]
                gain = -k_a * inv_m + kv * tot_a_rest * inv_2m2
                evaluations += 1
                if gain > best_gain or (gain == best_gain and best != a and c < best):
                    best = c
                    best_gain = gain
            for t in range(n_touched):
                c = touched[t]
                seen[c] = False
                link[c] = 0.0
            if best != a and best_gain > MOVE_EPS:
                if n_free > 0 and best == free[n_free - 1]:
                    n_free -= 1
                tot[a] -= kv
                tot[best] += kv
                count[a] -= 1
                count[best] += 1
                if count[a] == 0:
                    free[n_free] = a
                    n_free += 1
                labels[v] = best
                moved += 1
        if moved == 0:
            converged = True
            break
    return sweeps, converged, evaluations


@njit(cache=True, nogil=True)
def label_propagation_sweep(indptr, indices, weights, labels, order, uniforms):
    """One asynchronous label-propagation pass; returns the number of changes.

    A vertex keeps its label when that label is among the heaviest; otherwise
    ties are split with ``uniforms[v]``.
    """
    n = len(indptr) - 1
    link = np.zeros(n)
    seen = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    ties = np.empty(n, dtype=np.int64)
    changed = 0
    for idx in range(len(order)):
        v = order[idx]
        if indptr[v] == indptr[v + 1]:
            continue
        n_touched = 0
        for j in range(indptr[v], indptr[v + 1]):
            c = labels[indices[j]]
            if not seen[c]:
                seen[c] = True
                touched[n_touched] = c
                n_touched += 1
            link[c] += weights[j]
        best_w = 0.0
        for t in range(n_touched):
            if link[touched[t]] > best_w:
                best_w = link[touched[t]]
        n_ties = 0
        keep = False
        for t in range(n_touched):
            c = touched[t]
            if link[c] == best_w:
                if c == labels[v]:
                    keep = True
                ties[n_ties] = c
                n_ties += 1
        for t in range(n_touched):
            c = touched[t]
            seen[c] = False
            link[c] = 0.0
        if keep:
            continue
        # touched order depends on adjacency order only, so sort for stability
        chosen_ties = np.sort(ties[:n_ties])
        pick = chosen_ties[min(int(uniforms[v] * n_ties), n_ties - 1)]
        labels[v] = pick
        changed += 1
    return changed


@njit(cache=True, nogil=True)
def greedy_overlap_match(pair_a, pair_b, n_labels_b):
    """Map labels of one parent onto the other by descending overlap.

    ``pair_a``/``pair_b`` list the (a, b) label pairs already sorted by
    decreasing overlap. Returns ``mapping`` with ``mapping[b] = a`` for
    matched labels and -1 otherwise; every ``a`` is used at most once.
    """
    mapping = np.full(n_labels_b, -1, dtype=np.int64)
    max_a = 0
    for i in range(len(pair_a)):
        if pair_a[i] > max_a:
            max_a = pair_a[i]
    used = np.zeros(max_a + 1, dtype=np.bool_)
    for i in range(len(pair_a)):
        a = pair_a[i]
        b = pair_b[i]
        if mapping[b] == -1 and not used[a]:
            mapping[b] = a
            used[a] = True
    return mapping


@njit(cache=True)
def best_partition_dense(adj):
    """Exhaustive maximiser of modularity over all set partitions.

    Enumerates restricted growth strings in lexicographic order and scores
    each one with the direct double sum over vertex pairs. A later string
    replaces the incumbent only if it is better by more than 1e-12.
    """
    n = adj.shape[0]
    k = np.zeros(n)
    for v in range(n):
        for w in range(n):
            k[v] += adj[v, w]
    two_m = k.sum()
    # B[v, w] = A_vw - k_v k_w / 2m
    b = np.empty((n, n))
    for v in range(n):
        for w in range(n):
            b[v, w] = adj[v, w] - k[v] * k[w] / two_m

    a = np.zeros(n, dtype=np.int64)
    prefix_max = np.zeros(n, dtype=np.int64)
    best = a.copy()
    best_q = -np.inf
    while True:
        q = 0.0
        for v in range(n):
            for w in range(n):
                if a[v] == a[w]:
                    q += b[v, w]
        q /= two_m
        if q > best_q + 1e-12:
            best_q = q
            best[:] = a
        i = n - 1
        while i > 0 and a[i] > prefix_max[i]:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            prefix_max[j] = max(prefix_max[j - 1], a[j - 1])
    return best, best_q
