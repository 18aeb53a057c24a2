"""Open-addressing hash table over fixed-width cell vectors (linear probing, power-of-two capacity).

The table is a pair of arrays: ``keys[capacity, width]`` and ``vals[capacity]``
(int32) where ``EMPTY`` marks a free slot. Growth doubles the capacity.
"""
from __future__ import annotations

import numpy as np
from numba import njit

EMPTY = -1

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)
_MIX1 = np.uint64(0xFF51AFD7ED558CCD)
_MIX2 = np.uint64(0xC4CEB9FE1A85EC53)
_S33 = np.uint64(33)


@njit(cache=True)
def _hash(key):
    # FNV-1a over the cells, then the murmur3 64-bit finalizer
    h = _FNV_OFFSET
    for i in range(key.shape[0]):
        h = (h ^ np.uint64(key[i])) * _FNV_PRIME
    h ^= h >> _S33
    h *= _MIX1
    h ^= h >> _S33
    h *= _MIX2
    h ^= h >> _S33
    return h


@njit(cache=True)
def _slot(keys, vals, key):
    """Slot holding ``key`` or the empty slot where it would go."""
    mask = np.uint64(keys.shape[0] - 1)
    i = np.int64(_hash(key) & mask)
    L = key.shape[0]
    while True:
        if vals[i] == EMPTY:
            return i
        same = True
        for c in range(L):
            if keys[i, c] != key[c]:
                same = False
                break
        if same:
            return i
        i = (i + 1) & (keys.shape[0] - 1)


@njit(cache=True)
def _grow(keys, vals):
    cap = keys.shape[0] * 2
    nk = np.zeros((cap, keys.shape[1]), dtype=keys.dtype)
    nv = np.full(cap, EMPTY, dtype=np.int32)
    for i in range(keys.shape[0]):
        if vals[i] != EMPTY:
            j = _slot(nk, nv, keys[i])
            nk[j, :] = keys[i]
            nv[j] = vals[i]
    return nk, nv


@njit(cache=True)
def _find_many(keys, vals, queries, out):
    for q in range(queries.shape[0]):
        j = _slot(keys, vals, queries[q])
        out[q] = vals[j]


@njit(cache=True)
def _insert_rows(keys, vals, count, rows, values):
    for r in range(rows.shape[0]):
        j = _slot(keys, vals, rows[r])
        if vals[j] != EMPTY:
            continue
        if (count + 1) * 4 > keys.shape[0] * 3:
            keys, vals = _grow(keys, vals)
            j = _slot(keys, vals, rows[r])
        keys[j, :] = rows[r]
        vals[j] = values[r]
        count += 1
    return keys, vals, count


