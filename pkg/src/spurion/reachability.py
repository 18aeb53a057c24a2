"""Forward enumeration of the reachable component, its edges, and uniform sampling."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from numba import njit

from .engine import CompiledDomain, expand, flat_forward
from .hashtable import EMPTY, _grow, _slot
from .errors import CapacityError, ConfigError, SearchError
from .graph import bfs_distances, build_csr
from .psvn import Domain

DEFAULT_CAP = 500_000_000

_MAGIC = b"SPRC"
_VERSION = 1


def cell_dtype(alphabet_size: int):
    return np.uint8 if alphabet_size <= 256 else np.uint16


@dataclass
class EdgeSet:
    src: np.ndarray  # int64 state indices
    dst: np.ndarray
    op: np.ndarray  # operator indices into the domain
    labels: tuple = ()

    def __len__(self):
        return len(self.src)

    def triples(self, r: "ReachableSet"):
        for a, b, o in zip(self.src, self.dst, self.op):
            yield r.state(a), r.state(b), self.labels[o] if self.labels else int(o)


@dataclass
class ReachableSet:
    states: np.ndarray  # (N, n) in BFS discovery order
    seed: tuple
    depth: np.ndarray  # BFS depth from the seed
    edges: Optional[EdgeSet] = None
    _index: Optional[dict] = field(default=None, repr=False)

    def __len__(self):
        return self.states.shape[0]

    def state(self, i) -> tuple:
        return tuple(int(v) for v in self.states[i])

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self.states)}
        return self._index

    def index_of(self, s: Sequence[int]) -> int:
        key = np.asarray(s, dtype=self.states.dtype).tobytes()
        return self.index.get(key, -1)

    def __contains__(self, s) -> bool:
        return self.index_of(s) >= 0


@njit(cache=True)
def _enumerate(seed, arrs, n_rules, cap, with_edges):
    L = seed.shape[0]
    keys = np.zeros((16, L), dtype=seed.dtype)
    vals = np.full(16, EMPTY, dtype=np.int32)
    states = np.empty((1024, L), dtype=seed.dtype)
    depth = np.empty(1024, dtype=np.int64)
    esrc = np.empty(1024 if with_edges else 0, dtype=np.int64)
    edst = np.empty_like(esrc)
    eop = np.empty_like(esrc)
    ne = 0
    states[0, :] = seed
    depth[0] = 0
    keys[_slot(keys, vals, seed), :] = seed
    vals[_slot(keys, vals, seed)] = 0
    count = 1
    cand = np.empty(max(n_rules, 1), dtype=np.int64)
    out = np.empty((64, L), dtype=seed.dtype)
    out_ops = np.empty(64, dtype=np.int64)
    head = 0
    while head < count:
        s = states[head].copy()
        m = expand(s, arrs, cand, out, out_ops)
        while m < 0:
            out = np.empty((out.shape[0] * 2, L), dtype=seed.dtype)
            out_ops = np.empty(out.shape[0], dtype=np.int64)
            m = expand(s, arrs, cand, out, out_ops)
        for x in range(m):
            t = out[x]
            j = _slot(keys, vals, t)
            idx = vals[j]
            if idx == EMPTY:
                if count >= cap:
                    return states[:0], depth[:0], esrc[:0], edst[:0], eop[:0], -1
                if (count + 1) * 4 > keys.shape[0] * 3:
                    keys, vals = _grow(keys, vals)
                    j = _slot(keys, vals, t)
                keys[j, :] = t
                vals[j] = count
                if count >= states.shape[0]:
                    ns = np.empty((states.shape[0] * 2, L), dtype=seed.dtype)
                    ns[:count] = states[:count]
                    states = ns
                    nd = np.empty(states.shape[0], dtype=np.int64)
                    nd[:count] = depth[:count]
                    depth = nd
                states[count, :] = t
                depth[count] = depth[head] + 1
                idx = count
                count += 1
            if with_edges:
                if ne >= esrc.shape[0]:
                    size = max(esrc.shape[0] * 2, 1024)
                    a = np.empty(size, dtype=np.int64)
                    a[:ne] = esrc[:ne]
                    esrc = a
                    b = np.empty(size, dtype=np.int64)
                    b[:ne] = edst[:ne]
                    edst = b
                    c = np.empty(size, dtype=np.int64)
                    c[:ne] = eop[:ne]
                    eop = c
                esrc[ne] = head
                edst[ne] = idx
                eop[ne] = out_ops[x]
                ne += 1
        head += 1
    return states[:count].copy(), depth[:count].copy(), esrc[:ne].copy(), edst[:ne].copy(), eop[:ne].copy(), count


def enumerate_states(d: Domain, seed: Optional[Sequence[int]] = None, cap: int = DEFAULT_CAP,
                     with_edges: bool = True, compiled: Optional[CompiledDomain] = None,
                     jit: bool = True) -> ReachableSet:
    """Breadth-first forward closure of ``seed`` (default: the goal).

    States are numbered in discovery order; successors are generated in
    operator order. ``jit=False`` runs the pure Python reference path.
    """
    seed = tuple(d.goal if seed is None else seed)
    d.check_state(seed)
    cd = compiled or CompiledDomain(d)
    if jit:
        flat = flat_forward(cd)
        dt = cell_dtype(len(d.alphabet))
        st, depth, es, ed, eo, count = _enumerate(np.asarray(seed, dtype=dt), flat.arrays, flat.n_rules,
                                                  min(cap, 2**31 - 2), with_edges)
        if count < 0:
            raise CapacityError("memory-budget-exceeded", f"more than {cap} reachable states")
        r = ReachableSet(st, seed, depth)
        if with_edges:
            r.edges = EdgeSet(es, ed, eo, tuple(o.label for o in d.operators))
        return r
    index = {seed: 0}
    order = [seed]
    depth = [0]
    src, dst, ops = [], [], []
    head = 0
    while head < len(order):
        s = order[head]
        ds = depth[head] + 1
        for o, t in cd.successors(s):
            j = index.get(t)
            if j is None:
                if len(order) >= cap:
                    raise CapacityError("memory-budget-exceeded", f"more than {cap} reachable states")
                j = len(order)
                index[t] = j
                order.append(t)
                depth.append(ds)
            if with_edges:
                src.append(head)
                dst.append(j)
                ops.append(o)
        head += 1
    states = np.array(order, dtype=cell_dtype(len(d.alphabet))).reshape(len(order), d.state_len)
    r = ReachableSet(states, seed, np.array(depth, dtype=np.int64))
    r._index = {row.tobytes(): i for i, row in enumerate(states)}
    if with_edges:
        r.edges = EdgeSet(np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                          np.array(ops, dtype=np.int64), tuple(o.label for o in d.operators))
    return r


# public name; ``enumerate`` would shadow the builtin inside this module
enumerate_reachable = enumerate_states


def collect_edges(d: Domain, r: ReachableSet) -> EdgeSet:
    if r.edges is not None:
        return r.edges
    cd = CompiledDomain(d)
    src, dst, ops = [], [], []
    for i in range(len(r)):
        for o, t in cd.successors(r.state(i)):
            j = r.index_of(t)
            if j < 0:
                raise ConfigError("not-closed", "successor outside the reachable set")
            src.append(i)
            dst.append(j)
            ops.append(o)
    r.edges = EdgeSet(np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                      np.array(ops, dtype=np.int64), tuple(o.label for o in d.operators))
    return r.edges


def sample_uniform(r: ReachableSet, k: int, rng_seed: int, replace: bool = True) -> list:
    if k < 0:
        raise ConfigError("bad-sample-size", "k must be nonnegative")
    if not replace and k > len(r):
        raise ConfigError("k-exceeds-population", f"cannot draw {k} of {len(r)} states without replacement")
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(len(r), size=k, replace=replace) if k else np.empty(0, dtype=np.int64)
    return [r.state(i) for i in idx]


def goal_distances(r: ReachableSet, goal: Sequence[int]) -> np.ndarray:
    """Exact distance from every state to ``goal`` (-1 when the goal is unreachable)."""
    g = r.index_of(goal)
    if g < 0:
        raise ConfigError("goal-not-reachable", "goal is not in the reachable set")
    e = r.edges
    if e is None:
        raise ConfigError("no-edges", "enumerate with edges or call collect_edges first")
    indptr, indices, _ = build_csr(len(r), e.dst, e.src)
    return bfs_distances(indptr, indices, [g])


def avg_distance(r: ReachableSet, goal: Sequence[int]) -> float:
    dist = goal_distances(r, goal)
    if (dist < 0).any():
        raise SearchError("some-state-cannot-reach-goal", f"{int((dist < 0).sum())} states cannot reach the goal")
    return float(dist.mean())


# --- binary dump ---------------------------------------------------------------------
# header: magic, u16 version, u16 kind (0 states, 1 edges), u64 rows, u32 width, u32 cell bytes


def _write(fh, kind, arr):
    arr = np.ascontiguousarray(arr)
    width = arr.shape[1] if arr.ndim == 2 else 1
    fh.write(_MAGIC + struct.pack("<HHQII", _VERSION, kind, arr.shape[0], width, arr.dtype.itemsize))
    fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def _read(fh, expect_kind):
    head = fh.read(4 + struct.calcsize("<HHQII"))
    if head[:4] != _MAGIC:
        raise ConfigError("bad-file", "not a reachability dump")
    version, kind, rows, width, size = struct.unpack("<HHQII", head[4:])
    if version != _VERSION or kind != expect_kind:
        raise ConfigError("bad-file", f"unsupported dump version {version} / kind {kind}")
    dt = np.dtype({1: "<u1", 2: "<u2", 8: "<i8"}[size])
    data = np.frombuffer(fh.read(rows * width * size), dtype=dt)
    return data.reshape(rows, width)


def dump(r: ReachableSet, path) -> None:
    with open(path, "wb") as fh:
        _write(fh, 0, r.states)
        _write(fh, 0, np.asarray(r.seed, dtype=r.states.dtype).reshape(1, -1))
        _write(fh, 1, r.depth.reshape(-1, 1))
        if r.edges is not None:
            _write(fh, 1, np.stack([r.edges.src, r.edges.dst, r.edges.op], axis=1))


def load(path, labels: tuple = ()) -> ReachableSet:
    with open(path, "rb") as fh:
        states = _read(fh, 0).copy()
        seed = tuple(int(v) for v in _read(fh, 0)[0])
        depth = _read(fh, 1)[:, 0].astype(np.int64)
        edges = None
        rest = fh.peek(1) if hasattr(fh, "peek") else b""
        if rest:
            e = _read(fh, 1)
            edges = EdgeSet(e[:, 0].astype(np.int64), e[:, 1].astype(np.int64), e[:, 2].astype(np.int64), labels)
    return ReachableSet(states, seed, depth, edges)
