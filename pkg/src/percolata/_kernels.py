"""Numba kernels for the hot loops: union-find labelling, lazy cluster
exploration with hashed uniforms, and batched local events."""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_M1 = uint64(0xBF58476D1CE4E5B9)
_M2 = uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix(x):
    z = x + _GOLDEN
    z = (z ^ (z >> uint64(30))) * _M1
    z = (z ^ (z >> uint64(27))) * _M2
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _unit(key, stream):
    h = _mix(key ^ stream)
    return float(h >> uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def hashed_uniforms(keys, stream):
    out = np.empty(keys.shape[0], dtype=np.float64)
    for i in range(keys.shape[0]):
        out[i] = _unit(keys[i], stream)
    return out


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, rank, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1


@njit(cache=True)
def uf_labels(n, eu, ev, is_open):
    """Root label per vertex after union over open edges (union by rank)."""
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    for e in range(eu.shape[0]):
        if is_open[e]:
            _union(parent, rank, eu[e], ev[e])
    for i in range(n):
        parent[i] = _find(parent, i)
    return parent


@njit(cache=True)
def explore(indptr, nbr, nbr_edge, keys, stream, p, boundary, source, stop_at_boundary, max_size):
    """Depth-first exploration of the open cluster of ``source``.

    Edge states are drawn lazily from the hashed uniforms. Returns
    (touches_boundary, size, visited-array-prefix). With ``stop_at_boundary``
    the search ends at the first boundary vertex, so ``size`` is then a lower
    bound. ``max_size`` caps the search the same way.
    """
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    top = 0
    size = 0
    stack[top] = source
    top += 1
    seen[source] = True
    touched = False
    while top > 0:
        top -= 1
        v = stack[top]
        order[size] = v
        size += 1
        if boundary[v]:
            touched = True
            if stop_at_boundary:
                break
        if size >= max_size:
            break
        for pos in range(indptr[v], indptr[v + 1]):
            w = nbr[pos]
            if seen[w]:
                continue
            if _unit(keys[nbr_edge[pos]], stream) < p:
                seen[w] = True
                stack[top] = w
                top += 1
    return touched, size, order[:size]


@njit(cache=True)
def local_events(
    open_mat,
    glob_v,
    glob_e,
    le_a,
    le_b,
    le_in_cross,
    le_in_uniq,
    f_inner,
    f_cross_target,
    f_uniq,
    f_uniq_inner,
    f_uniq_target,
    v_boundary_target_cross,
    v_boundary_target_uniq,
):
    """Crossing and uniqueness indicators for many centres and configurations.

    ``glob_v[c, j]`` is the window index of local vertex ``j`` around centre
    ``c`` (-1 if outside the window); ``glob_e[c, j]`` likewise for local
    edge ``j`` whose local endpoints are ``le_a[j], le_b[j]``. The ``f_*``
    flags describe the local vertex by its distance to the centre; the
    ``v_boundary_target_*`` matrices add clipped targets (window-boundary
    vertices) per centre.

    Returns ``crossing[s, c]`` and ``n_unique[s, c]`` (number of clusters of
    the uniqueness ball meeting both its inner ball and its target).
    """
    n_s = open_mat.shape[0]
    n_c, n_lv = glob_v.shape
    n_le = le_a.shape[0]
    crossing = np.zeros((n_s, n_c), dtype=np.bool_)
    n_unique = np.zeros((n_s, n_c), dtype=np.int64)
    parent = np.empty(n_lv, dtype=np.int64)
    rank = np.empty(n_lv, dtype=np.int64)
    has_in = np.empty(n_lv, dtype=np.bool_)
    has_tg = np.empty(n_lv, dtype=np.bool_)
    for s in range(n_s):
        is_open = open_mat[s]
        for c in range(n_c):
            # crossing ball
            for j in range(n_lv):
                parent[j] = j
                rank[j] = 0
                has_in[j] = False
                has_tg[j] = False
            for j in range(n_le):
                g = glob_e[c, j]
                if g >= 0 and le_in_cross[j] and is_open[g]:
                    _union(parent, rank, le_a[j], le_b[j])
            for j in range(n_lv):
                if glob_v[c, j] < 0:
                    continue
                r = _find(parent, j)
                if f_inner[j]:
                    has_in[r] = True
                if f_cross_target[j] or v_boundary_target_cross[c, j]:
                    has_tg[r] = True
            ok = False
            for j in range(n_lv):
                if has_in[j] and has_tg[j]:
                    ok = True
                    break
            crossing[s, c] = ok
            # uniqueness ball
            for j in range(n_lv):
                parent[j] = j
                rank[j] = 0
                has_in[j] = False
                has_tg[j] = False
            for j in range(n_le):
                g = glob_e[c, j]
                if g >= 0 and le_in_uniq[j] and is_open[g]:
                    _union(parent, rank, le_a[j], le_b[j])
            for j in range(n_lv):
                if glob_v[c, j] < 0 or not f_uniq[j]:
                    continue
                r = _find(parent, j)
                if f_uniq_inner[j]:
                    has_in[r] = True
                if f_uniq_target[j] or v_boundary_target_uniq[c, j]:
                    has_tg[r] = True
            cnt = 0
            for j in range(n_lv):
                if has_in[j] and has_tg[j]:
                    cnt += 1
            n_unique[s, c] = cnt
    return crossing, n_unique


@njit(cache=True)
def batch_labels(open_mat, eu, ev, n):
    """``uf_labels`` for every row of a configuration matrix."""
    n_s = open_mat.shape[0]
    out = np.empty((n_s, n), dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    rank = np.empty(n, dtype=np.int64)
    for s in range(n_s):
        for i in range(n):
            parent[i] = i
            rank[i] = 0
        for e in range(eu.shape[0]):
            if open_mat[s, e]:
                _union(parent, rank, eu[e], ev[e])
        for i in range(n):
            out[s, i] = _find(parent, i)
    return out
