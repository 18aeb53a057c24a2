"""IDA* with pattern database heuristics, and a breadth-first distance oracle.

Counting convention: a node is expanded when its children are generated. The
start node counts if it is expanded; goal nodes are never expanded. Children
are generated in operator declaration order, without parent pruning or
transposition tables. ``nodes_generated`` counts every child produced.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

from .engine import CompiledDomain
from .errors import SearchError
from .psvn import Domain

INF = float("inf")
NO_LIMIT = 2**62


@dataclass
class SearchResult:
    solution_length: int
    nodes_expanded: int
    iterations: int  # number of f-bound increases
    nodes_generated: int = 0


def heuristic(h, psi=None) -> Callable:
    """Turn a PDB (optionally with its abstraction) or a callable into ``state -> number``."""
    from .pdb import PDB, lookup

    if isinstance(h, PDB):
        return lambda s: lookup(h, s, psi)
    if callable(h):
        return h
    raise SearchError("bad-heuristic", f"cannot use {type(h).__name__} as a heuristic")


def ida_star(d: Domain, start: Sequence[int], h, psi=None, compiled: Optional[CompiledDomain] = None,
             max_bound: int = 10**6, prune_parent: bool = False, max_nodes: int = NO_LIMIT) -> SearchResult:
    """IDA* over the domain from ``start`` to its goal.

    ``h`` is a PDB (looked up through ``psi`` or the PDB's own abstraction) or a
    callable on state tuples; ``inf`` prunes a node.
    """
    hf = heuristic(h, psi)
    cd = compiled or CompiledDomain(d)
    goal = tuple(d.goal)
    start = tuple(start)
    bound = hf(start)
    if bound == INF:
        raise SearchError("no-solution", "start state has infinite heuristic value")
    expanded = 0
    generated = 0
    iterations = 0
    while True:
        next_bound = INF
        # explicit stack of (state, g, successor list, next child index)
        stack = [(start, 0, None, 0)]
        found = -1
        while stack:
            s, g, succ, i = stack[-1]
            if succ is None:
                f = g + hf(s)
                if f > bound:
                    next_bound = min(next_bound, f)
                    stack.pop()
                    continue
                if s == goal:
                    found = g
                    break
                if expanded >= max_nodes:
                    raise SearchError("node-budget-exceeded", f"more than {max_nodes} expansions")
                expanded += 1
                succ = [t for _, t in cd.successors(s)]
                generated += len(succ)
                if prune_parent and len(stack) > 1:
                    parent = stack[-2][0]
                    generated -= sum(1 for t in succ if t == parent)
                    succ = [t for t in succ if t != parent]
                stack[-1] = (s, g, succ, 0)
            if i < len(succ):
                stack[-1] = (s, g, succ, i + 1)
                stack.append((succ[i], g + 1, None, 0))
            else:
                stack.pop()
        if found >= 0:
            return SearchResult(found, expanded, iterations, generated)
        if next_bound == INF or next_bound > max_bound:
            raise SearchError("no-solution", "goal unreachable from start")
        bound = next_bound
        iterations += 1


@njit(cache=True, nogil=True)
def _ida_graph(indptr, indices, hv, start, goal, max_bound, prune_parent, max_nodes):
    # returns (length, expanded, iterations, generated); length -1 when unsolvable,
    # -2 when the expansion budget runs out
    bound = hv[start]
    expanded = 0
    generated = 0
    iterations = 0
    if bound < 0:
        return -1, 0, 0, 0
    cap = 64
    node = np.empty(cap, dtype=np.int64)
    edge = np.empty(cap, dtype=np.int64)
    while True:
        nxt = np.int64(1) << 62
        top = 0
        node[0] = start
        edge[0] = -1
        found = -1
        while top >= 0:
            v = node[top]
            if edge[top] < 0:
                hh = hv[v]
                f = top + hh
                if hh < 0:
                    top -= 1
                    continue
                if f > bound:
                    if f < nxt:
                        nxt = f
                    top -= 1
                    continue
                if v == goal:
                    found = top
                    break
                if expanded >= max_nodes:
                    return -2, expanded, iterations, generated
                expanded += 1
                generated += indptr[v + 1] - indptr[v]
                if prune_parent and top > 0:
                    for q in range(indptr[v], indptr[v + 1]):
                        if indices[q] == node[top - 1]:
                            generated -= 1
                edge[top] = indptr[v]
            e = edge[top]
            if e < indptr[v + 1]:
                edge[top] = e + 1
                if top + 1 >= cap:
                    cap *= 2
                    nn = np.empty(cap, dtype=np.int64)
                    nn[: top + 1] = node[: top + 1]
                    node = nn
                    ne = np.empty(cap, dtype=np.int64)
                    ne[: top + 1] = edge[: top + 1]
                    edge = ne
                c = indices[e]
                if prune_parent and top > 0 and c == node[top - 1]:
                    continue
                top += 1
                node[top] = c
                edge[top] = -1
            else:
                top -= 1
        if found >= 0:
            return found, expanded, iterations, generated
        if nxt == np.int64(1) << 62 or nxt > max_bound:
            return -1, expanded, iterations, generated
        bound = nxt
        iterations += 1


class GraphSearch:
    """IDA* over an enumerated state space (CSR adjacency in operator order).

    ``h`` holds one heuristic value per state index; negative entries mean
    infinity. Results are identical to :func:`ida_star` on the same domain.
    """

    def __init__(self, reach, goal_index: int):
        from .graph import build_csr

        e = reach.edges
        if e is None:
            raise SearchError("no-edges", "reachable set has no edge list")
        self.n = len(reach)
        if not 0 <= goal_index < self.n:
            raise SearchError("bad-index", f"goal index {goal_index} outside 0..{self.n - 1}")
        self.indptr, self.indices, _ = build_csr(self.n, e.src, e.dst)
        self.goal = int(goal_index)

    def solve(self, start_index: int, h: np.ndarray, max_bound: int = 10**6,
              prune_parent: bool = False, max_nodes: int = NO_LIMIT) -> SearchResult:
        if not 0 <= start_index < self.n or len(h) != self.n:
            raise SearchError("bad-index", "start index or heuristic vector does not fit the state space")
        length, exp, it, gen = _ida_graph(self.indptr, self.indices, np.asarray(h, dtype=np.int64),
                                          int(start_index), self.goal, max_bound, prune_parent, max_nodes)
        if length == -2:
            raise SearchError("node-budget-exceeded", f"more than {max_nodes} expansions")
        if length < 0:
            raise SearchError("no-solution", "goal unreachable from start")
        return SearchResult(int(length), int(exp), int(it), int(gen))


def bfs_oracle(d: Domain, start: Sequence[int], goal: Optional[Sequence[int]] = None,
               compiled: Optional[CompiledDomain] = None) -> int:
    cd = compiled or CompiledDomain(d)
    start = tuple(start)
    goal = tuple(d.goal if goal is None else goal)
    if start == goal:
        return 0
    seen = {start}
    q = deque([(start, 0)])
    while q:
        s, g = q.popleft()
        for _, t in cd.successors(s):
            if t == goal:
                return g + 1
            if t not in seen:
                seen.add(t)
                q.append((t, g + 1))
    raise SearchError("no-solution", "goal unreachable from start")
