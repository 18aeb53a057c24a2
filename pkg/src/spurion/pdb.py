"""Pattern databases stored in linear-probing hash tables.

Variants differ only in which abstract states and transitions the backward
breadth-first construction may use:

* ORGN: everything generated by regression from the abstract goal.
* MTX_EXH / MTX_H2: states containing an abstraction-based mutex pair are never
  added to the open list (pair tables from exhaustive enumeration or h^2).
* TRUE: only images of genuine states are added.
* PURE: only images of genuine edges are traversed.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numba import njit

from .abstraction import AbstractDomain, BoundAbstraction
from .engine import CompiledDomain, expand, flat_backward
from .hashtable import EMPTY, _find_many, _grow, _insert_rows, _slot
from .errors import CapacityError, ConfigError, MissingAbstractState, SpurionError
from .mutex import PairTable
from .psvn import Domain

ORGN = "ORGN"
MTX_EXH = "MTX_EXH"
MTX_H2 = "MTX_H2"
TRUE = "TRUE"
PURE = "PURE"
VARIANTS = (ORGN, MTX_EXH, MTX_H2, TRUE, PURE)

MIN_CAPACITY = 16
MAX_LOAD_NUM, MAX_LOAD_DEN = 3, 4  # rehash before the load factor would exceed 0.75
HEADER_BYTES = 1024
@njit(cache=True)
def _passes(t, mode, pair_flat, k, set_keys, set_dist):
    if mode == 1:
        L = t.shape[0]
        for i in range(L):
            a = i * k + t[i]
            for j in range(i + 1, L):
                if not pair_flat[a, j * k + t[j]]:
                    return False
        return True
    if mode == 2:
        return set_dist[_slot(set_keys, set_dist, t)] != EMPTY
    return True


@njit(cache=True)
def _bfs_build(goal, arrs, n_rules, keys, dist, mode, pair_flat, k, set_keys, set_dist, max_entries):
    L = goal.shape[0]
    count = 0
    j = _slot(keys, dist, goal)
    keys[j, :] = goal
    dist[j] = 0
    count = 1
    cur = np.empty((1, L), dtype=goal.dtype)
    cur[0, :] = goal
    ncur = 1
    cand = np.empty(max(n_rules, 1), dtype=np.int64)
    out = np.empty((64, L), dtype=goal.dtype)
    out_ops = np.empty(64, dtype=np.int64)
    depth = 0
    while ncur > 0:
        depth += 1
        nxt = np.empty((max(ncur, 16), L), dtype=goal.dtype)
        nn = 0
        for f in range(ncur):
            m = expand(cur[f], arrs, cand, out, out_ops)
            while m < 0:
                out = np.empty((out.shape[0] * 2, L), dtype=goal.dtype)
                out_ops = np.empty(out.shape[0], dtype=np.int64)
                m = expand(cur[f], arrs, cand, out, out_ops)
            for x in range(m):
                t = out[x]
                j = _slot(keys, dist, t)
                if dist[j] != EMPTY:
                    continue
                if not _passes(t, mode, pair_flat, k, set_keys, set_dist):
                    continue
                if count >= max_entries:
                    return keys, dist, -1
                if (count + 1) * 4 > keys.shape[0] * 3:
                    keys, dist = _grow(keys, dist)
                    j = _slot(keys, dist, t)
                keys[j, :] = t
                dist[j] = depth
                count += 1
                if nn >= nxt.shape[0]:
                    bigger = np.empty((nxt.shape[0] * 2, L), dtype=goal.dtype)
                    bigger[:nn] = nxt[:nn]
                    nxt = bigger
                nxt[nn, :] = t
                nn += 1
        cur = nxt
        ncur = nn
    return keys, dist, count


# --- filters -----------------------------------------------------------------------


@dataclass
class MutexFilter:
    pairs: PairTable  # image of a pair table under the abstraction


@dataclass
class StateSet:
    states: np.ndarray  # allowed abstract states, one per row


@dataclass
class EdgeSet:
    """Allowed abstract transitions ``src[i] -> dst[i]`` (forward direction)."""

    src: np.ndarray
    dst: np.ndarray


BuildFilter = Union[None, MutexFilter, StateSet, EdgeSet]


# --- the table ---------------------------------------------------------------------


def _align4(x: int) -> int:
    return (x + 3) // 4 * 4


@dataclass
class PDB:
    variant: str
    keys: np.ndarray  # (capacity, state_len)
    dist: np.ndarray  # int32, EMPTY marks a free slot
    count: int
    goal: tuple
    psi: Optional[BoundAbstraction] = None
    digest: bytes = b"\0" * 16
    slot_cells: Optional[int] = None  # cells per stored state in the size model

    @property
    def capacity(self) -> int:
        return self.keys.shape[0]

    @property
    def state_len(self) -> int:
        return self.keys.shape[1]

    def __len__(self) -> int:
        return self.count

    def size_bytes(self) -> int:
        """Modeled footprint: every slot holds a packed state (padded to 4 bytes) and a 32-bit distance.

        States are modeled at the original vector width: a projected-away cell
        still occupies its byte, as in a fixed-width vector implementation.
        """
        cells = self.slot_cells or self.state_len
        return size_bytes_for(self.capacity, cells, self.keys.dtype.itemsize)

    def get(self, t: Sequence[int]) -> float:
        key = np.asarray(t, dtype=self.keys.dtype)
        v = self.dist[_slot(self.keys, self.dist, key)]
        return float("inf") if v == EMPTY else int(v)

    def lookup_many(self, abstract_states: np.ndarray) -> np.ndarray:
        """Distances for rows of abstract states; -1 marks a miss."""
        q = np.ascontiguousarray(abstract_states, dtype=self.keys.dtype)
        out = np.empty(q.shape[0], dtype=np.int32)
        _find_many(self.keys, self.dist, q, out)
        return out

    def items(self):
        used = np.nonzero(self.dist != EMPTY)[0]
        for i in used:
            yield tuple(int(v) for v in self.keys[i]), int(self.dist[i])

    def as_dict(self) -> dict:
        return dict(self.items())

    def key_array(self) -> np.ndarray:
        return self.keys[self.dist != EMPTY]

    def keyset(self) -> set:
        return {tuple(int(v) for v in r) for r in self.key_array()}

    # -- persistence
    def save(self, path) -> None:
        save(self, path)


def size_bytes_for(capacity: int, state_len: int, cell_bytes: int = 1) -> int:
    return capacity * (_align4(state_len * cell_bytes) + 4) + HEADER_BYTES


def capacity_for(entries: int) -> int:
    cap = MIN_CAPACITY
    while entries * MAX_LOAD_DEN > cap * MAX_LOAD_NUM:
        cap *= 2
    return cap


def format_size(nbytes: int) -> str:
    """Human-readable size in binary units, rounded up (``45MB``, ``5.6MB``, ``705KB``)."""
    import math

    units = ["B", "KB", "MB", "GB", "TB"]
    x = float(nbytes)
    u = 0
    while x >= 1024 and u < len(units) - 1:
        x /= 1024
        u += 1
    if x < 10 and u > 0:
        v = math.ceil(x * 10 - 1e-9) / 10
        s = f"{v:.1f}"
        if s.endswith(".0"):
            s = s[:-2]
    else:
        s = str(math.ceil(x - 1e-9))
    return s + units[u]


def _digest(psi) -> bytes:
    text = repr(psi.chain) if psi is not None else "identity"
    return hashlib.sha256(text.encode()).digest()[:16]


def _empty(state_len, dtype, capacity=MIN_CAPACITY):
    return np.zeros((capacity, state_len), dtype=dtype), np.full(capacity, EMPTY, dtype=np.int32)


def _cell_dtype(k):
    return np.uint8 if k <= 256 else np.uint16


def _set_table(states: np.ndarray, dtype):
    states = np.ascontiguousarray(states, dtype=dtype)
    keys, dist = _empty(states.shape[1], dtype, capacity_for(len(states)))
    keys, dist, _ = _insert_rows(keys, dist, 0, states, np.zeros(len(states), dtype=np.int32))
    return keys, dist


def build(ad: Union[AbstractDomain, Domain], filter: BuildFilter = None, variant: Optional[str] = None,
          psi: Optional[BoundAbstraction] = None, max_entries: int = 2**31 - 1) -> PDB:
    """Backward breadth-first PDB construction from the abstract goal."""
    d = ad.domain if isinstance(ad, AbstractDomain) else ad
    k = len(d.alphabet)
    dtype = _cell_dtype(k)
    goal = np.asarray(d.goal, dtype=dtype)
    if variant is None:
        variant = {type(None): ORGN, MutexFilter: MTX_EXH, StateSet: TRUE, EdgeSet: PURE}[type(filter)]
    if isinstance(filter, EdgeSet):
        return _build_from_edges(d, filter, variant, psi, dtype, max_entries)

    mode = 0
    pair_flat = np.zeros((1, 1), dtype=np.bool_)
    set_keys, set_dist = _empty(d.state_len, dtype)
    if isinstance(filter, MutexFilter):
        mode = 1
        P = filter.pairs.pairs
        n = P.shape[0]
        pair_flat = np.ascontiguousarray(P.reshape(n * P.shape[1], n * P.shape[3]))
        if P.shape[1] != k:
            raise ConfigError("bad-filter", "pair table does not match the abstract alphabet")
    elif isinstance(filter, StateSet):
        mode = 2
        set_keys, set_dist = _set_table(filter.states, dtype)
    kk = k
    if not _passes(goal, mode, pair_flat, kk, set_keys, set_dist):
        raise ConfigError("goal-filtered", "abstract goal does not pass the build filter")

    flat = flat_backward(CompiledDomain(d))
    keys, dist = _empty(d.state_len, dtype)
    keys, dist, count = _bfs_build(goal, flat.arrays, flat.n_rules, keys, dist, mode, pair_flat, kk,
                                   set_keys, set_dist, max_entries)
    if count < 0:
        raise CapacityError("capacity-exceeded", f"more than {max_entries} abstract states")
    return PDB(variant, keys, dist, int(count), tuple(d.goal), psi, _digest(psi), _slot_cells(psi, d))


def _slot_cells(psi, d):
    return psi.source_len if psi is not None and psi.source_len else d.state_len


def _build_from_edges(d: Domain, f: EdgeSet, variant, psi, dtype, max_entries) -> PDB:
    from .graph import bfs_distances, build_csr

    src = np.ascontiguousarray(f.src, dtype=dtype)
    dst = np.ascontiguousarray(f.dst, dtype=dtype)
    goal = np.asarray(d.goal, dtype=dtype).reshape(1, -1)
    nodes, inv = np.unique(np.concatenate([goal, src, dst]), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    g = inv[0]
    m = len(src)
    s_idx, t_idx = inv[1:1 + m], inv[1 + m:]
    indptr, indices, _ = build_csr(len(nodes), t_idx, s_idx)  # reversed edges
    dd = bfs_distances(indptr, indices, [g])
    reached = np.nonzero(dd >= 0)[0]
    if len(reached) > max_entries:
        raise CapacityError("capacity-exceeded", f"more than {max_entries} abstract states")
    order = reached[np.lexsort((reached, dd[reached]))]
    keys, dist = _empty(d.state_len, dtype)
    keys, dist, count = _insert_rows(keys, dist, 0, np.ascontiguousarray(nodes[order]),
                                     dd[order].astype(np.int32))
    return PDB(variant, keys, dist, int(count), tuple(d.goal), psi, _digest(psi), _slot_cells(psi, d))


def lookup(p: PDB, s_original: Sequence[int], psi: Optional[BoundAbstraction] = None, strict: bool = False) -> float:
    psi = psi or p.psi
    t = psi.state(s_original) if psi is not None else tuple(s_original)
    v = p.get(t)
    if strict and v == float("inf"):
        raise MissingAbstractState(f"abstract state {t} not in the {p.variant} PDB")
    return v


def h_values(p: PDB, states: np.ndarray, psi: Optional[BoundAbstraction] = None) -> np.ndarray:
    """Heuristic values for rows of original states; misses become ``inf``."""
    psi = psi or p.psi
    states = np.asarray(states)
    abs_states = psi.states_array(states) if psi is not None else states
    raw = p.lookup_many(abs_states).astype(np.float64)
    raw[raw < 0] = np.inf
    return raw


def avg_h(p: PDB, states, psi: Optional[BoundAbstraction] = None) -> float:
    states = np.asarray(states)
    if states.size == 0:
        raise SpurionError("empty-state-list", "avg_h needs at least one state")
    h = h_values(p, states.reshape(len(states), -1), psi)
    if np.isinf(h).any():
        raise SpurionError("infinite-h-encountered", f"{int(np.isinf(h).sum())} states have no PDB entry")
    return float(h.mean())


def size_bytes(p: PDB) -> int:
    return p.size_bytes()


# --- file format -------------------------------------------------------------------
# header: magic, u16 version, u8 variant code, u8 cell bytes, u32 state_len, u32 modeled slot cells, u64 capacity,
# u64 count, 16-byte abstraction digest, goal cells; then capacity keys and capacity int32 distances

_MAGIC = b"SPDB"
_VERSION = 1
_HEAD = struct.Struct("<4sHBBIIQQ16s")


def save(p: PDB, path) -> None:
    cell = p.keys.dtype.itemsize
    le = np.dtype(p.keys.dtype).newbyteorder("<")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(_MAGIC, _VERSION, VARIANTS.index(p.variant), cell, p.state_len,
                            p.slot_cells or p.state_len, p.capacity, p.count, p.digest))
        fh.write(np.asarray(p.goal, dtype=le).tobytes())
        fh.write(p.keys.astype(le, copy=False).tobytes())
        fh.write(p.dist.astype("<i4", copy=False).tobytes())


def load(path, psi: Optional[BoundAbstraction] = None) -> PDB:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, vcode, cell, L, slot_cells, cap, count, digest = _HEAD.unpack_from(raw, 0)
    if magic != _MAGIC or version != _VERSION:
        raise ConfigError("bad-file", "not a PDB file of a supported version")
    dt = np.dtype({1: "<u1", 2: "<u2"}[cell])
    off = _HEAD.size
    goal = tuple(int(v) for v in np.frombuffer(raw, dtype=dt, count=L, offset=off))
    off += L * cell
    keys = np.frombuffer(raw, dtype=dt, count=cap * L, offset=off).reshape(cap, L).astype(dt.newbyteorder("="))
    off += cap * L * cell
    dist = np.frombuffer(raw, dtype="<i4", count=cap, offset=off).astype(np.int32)
    if psi is not None and _digest(psi) != digest:
        raise ConfigError("abstraction-mismatch", "PDB was built for a different abstraction")
    return PDB(VARIANTS[vcode], keys, dist, int(count), goal, psi, digest, slot_cells)
