"""Explicit graphs in CSR form and breadth-first distances over them."""
from __future__ import annotations

import numpy as np
from numba import njit


def build_csr(n: int, src: np.ndarray, dst: np.ndarray):
    """CSR adjacency keeping the original edge order within each row."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    order = np.argsort(src, kind="stable")
    indices = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices, order


@njit(cache=True)
def _bfs(indptr, indices, sources, dist):
    queue = np.empty(dist.shape[0], dtype=np.int64)
    head = 0
    tail = 0
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v] + 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dv
                queue[tail] = w
                tail += 1


def bfs_distances(indptr, indices, sources) -> np.ndarray:
    """Unit-cost distances from ``sources``; unreached nodes get -1."""
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    _bfs(indptr, indices, np.asarray(sources, dtype=np.int64), dist)
    return dist
