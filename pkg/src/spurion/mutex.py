"""Reachable atom pairs: exhaustive tables, grounding and the h^2 fixed point.

An atom is an assignment ``cell i = symbol a``. Pair tables are dense boolean
arrays ``pairs[i, a, j, b]`` (symmetric, false whenever ``i == j``) plus a
``singles[i, a]`` array. Any pair over distinct cells that is absent from the
table is a mutex pair.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, SpurionError
from .psvn import Domain

EXHAUSTIVE = "EXHAUSTIVE"
H2 = "H2"


@dataclass
class PairTable:
    singles: np.ndarray  # bool[n, k]
    pairs: np.ndarray  # bool[n, k, n, k]
    provenance: str

    @property
    def state_len(self) -> int:
        return self.singles.shape[0]

    def reachable(self, i: int, a: int, j: int, b: int) -> bool:
        return bool(self.pairs[i, a, j, b])

    def mutex_pairs(self, position_domains) -> list:
        """All mutex pairs ((i, a), (j, b)) with i < j over the given cell domains."""
        out = []
        n = self.state_len
        for i in range(n):
            for j in range(i + 1, n):
                for a in sorted(position_domains[i]):
                    for b in sorted(position_domains[j]):
                        if not self.pairs[i, a, j, b]:
                            out.append(((i, a), (j, b)))
        return out

    def dump(self, domain: Domain) -> str:
        lines = [
            f"mutex {i}={domain.alphabet[a]} {j}={domain.alphabet[b]}"
            for (i, a), (j, b) in self.mutex_pairs(domain.position_domains)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def empty_table(n: int, k: int, provenance: str) -> PairTable:
    return PairTable(np.zeros((n, k), dtype=bool), np.zeros((n, k, n, k), dtype=bool), provenance)


def exhaustive_pairs(states: np.ndarray, k: int) -> PairTable:
    """Exact pair table of the state array (rows are states)."""
    states = np.asarray(states)
    m, n = states.shape
    table = empty_table(n, k, EXHAUSTIVE)
    if m == 0:
        return table
    for i in range(n):
        table.singles[i, np.unique(states[:, i])] = True
    col = states.astype(np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            codes = np.unique(col[:, i] * k + col[:, j])
            a, b = codes // k, codes % k
            table.pairs[i, a, j, b] = True
            table.pairs[j, b, i, a] = True
    return table


# --- grounding -------------------------------------------------------------------


@dataclass(frozen=True)
class GroundOperator:
    label: str
    pre: tuple  # ((position, symbol), ...) sorted by position
    writes: tuple  # ((position, symbol), ...) sorted by position


def ground(d: Domain, cap: int = 10_000_000) -> list:
    """One ground operator per consistent binding of each operator's variables."""
    out = []
    for op in d.operators:
        vars_ = op.variables
        doms = []
        for v in vars_:
            cells = [i for i, c in enumerate(op.lhs) if c == v]
            vals = frozenset.intersection(*(frozenset(d.position_domains[i]) for i in cells))
            doms.append(sorted(vals))
        count = 1
        for dm in doms:
            count *= len(dm)
        if len(out) + count > cap:
            raise SpurionError("grounding-explosion", f"more than {cap} ground operators")
        for combo in itertools.product(*doms):
            b = dict(zip(vars_, combo))
            pre = []
            for i, c in enumerate(op.lhs):
                if c is None:
                    continue
                pre.append((i, b[c] if isinstance(c, str) else c))
            writes = []
            for i, c in enumerate(op.rhs):
                if c is None:
                    continue
                writes.append((i, b[c] if isinstance(c, str) else c))
            suffix = "" if not vars_ else "[" + ",".join(d.alphabet[x] for x in combo) + "]"
            out.append(GroundOperator(op.label + suffix, tuple(pre), tuple(writes)))
    return out


def ground_successors(gs: Sequence[GroundOperator], s: Sequence[int]) -> list:
    out = []
    for g in gs:
        if all(s[i] == a for i, a in g.pre):
            t = list(s)
            for i, a in g.writes:
                t[i] = a
            out.append(tuple(t))
    return out


# --- h^2 -------------------------------------------------------------------------


@njit(cache=True)
def _h2_fixpoint(pre_ptr, pre_atoms, w_ptr, w_atoms, w_pos, atom_pos, single, pair):
    n_ops = pre_ptr.shape[0] - 1
    n_atoms = atom_pos.shape[0]
    changed = True
    while changed:
        changed = False
        for o in range(n_ops):
            p0, p1 = pre_ptr[o], pre_ptr[o + 1]
            ok = True
            for x in range(p0, p1):
                if not single[pre_atoms[x]]:
                    ok = False
                    break
                for y in range(x + 1, p1):
                    if not pair[pre_atoms[x], pre_atoms[y]]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            w0, w1 = w_ptr[o], w_ptr[o + 1]
            for x in range(w0, w1):
                a = w_atoms[x]
                if not single[a]:
                    single[a] = True
                    changed = True
                for y in range(x + 1, w1):
                    b = w_atoms[y]
                    if not pair[a, b]:
                        pair[a, b] = True
                        pair[b, a] = True
                        changed = True
            for c in range(n_atoms):
                if not single[c]:
                    continue
                pc = atom_pos[c]
                written = False
                for x in range(w0, w1):
                    if w_pos[x] == pc:
                        written = True
                        break
                if written:
                    continue
                compatible = True
                for x in range(p0, p1):
                    q = pre_atoms[x]
                    if q == c:
                        continue
                    if atom_pos[q] == pc or not pair[q, c]:
                        compatible = False
                        break
                if not compatible:
                    continue
                for x in range(w0, w1):
                    a = w_atoms[x]
                    if not pair[a, c]:
                        pair[a, c] = True
                        pair[c, a] = True
                        changed = True


def h2_pairs(gs: Sequence[GroundOperator], init: Sequence[int], position_domains, k: int) -> PairTable:
    """Least fixed point of h^2 reachability from ``init``.

    An atom counts as deleted by an operator iff its cell is written with a
    different symbol. Pairs are never removed once reached.
    """
    n = len(position_domains)
    atoms = [(i, a) for i in range(n) for a in sorted(position_domains[i])]
    aid = {x: t for t, x in enumerate(atoms)}
    atom_pos = np.array([i for i, _ in atoms], dtype=np.int64)

    def flat(seq):
        ptr = [0]
        vals = []
        for g in seq:
            vals.extend(g)
            ptr.append(len(vals))
        return np.array(ptr, dtype=np.int64), np.array(vals, dtype=np.int64)

    try:
        pre_ptr, pre_atoms = flat([[aid[x] for x in g.pre] for g in gs])
        w_ptr, w_atoms = flat([[aid[x] for x in g.writes] for g in gs])
    except KeyError as e:
        raise ConfigError("symbol-outside-position-domain", f"ground atom {e} outside its cell domain") from None
    _, w_pos = flat([[i for i, _ in g.writes] for g in gs])
    single = np.zeros(len(atoms), dtype=np.bool_)
    pair = np.zeros((len(atoms), len(atoms)), dtype=np.bool_)
    init_ids = [aid[(i, a)] for i, a in enumerate(init)]
    for x in init_ids:
        single[x] = True
        for y in init_ids:
            if x != y:
                pair[x, y] = True
    _h2_fixpoint(pre_ptr, pre_atoms, w_ptr, w_atoms, w_pos, atom_pos, single, pair)

    table = empty_table(n, k, H2)
    ai = np.array([i for i, _ in atoms])
    av = np.array([a for _, a in atoms])
    table.singles[ai, av] = single
    xs, ys = np.nonzero(pair)
    table.pairs[ai[xs], av[xs], ai[ys], av[ys]] = True
    return table


# --- abstraction-based mutex tests -----------------------------------------------


def is_abstraction_based_mutex(psi_pairs: PairTable, q) -> bool:
    (i, a), (j, b) = q
    if i == j:
        raise ConfigError("positions-equal", "a mutex pair needs two distinct cells")
    return not psi_pairs.pairs[i, a, j, b]


def state_has_mutex(psi_pairs: PairTable, t: Sequence[int]) -> bool:
    n = len(t)
    idx = np.arange(n)
    t = np.asarray(t)
    sub = psi_pairs.pairs[idx, t][:, idx, t]
    sub = sub | np.eye(n, dtype=bool)
    return not bool(sub.all())


def states_have_mutex(psi_pairs: PairTable, states: np.ndarray) -> np.ndarray:
    """Vectorized ``state_has_mutex`` over the rows of ``states``."""
    states = np.asarray(states)
    m, n = states.shape
    bad = np.zeros(m, dtype=bool)
    P = psi_pairs.pairs
    for i in range(n):
        si = states[:, i]
        for j in range(i + 1, n):
            bad |= ~P[i, si, j, states[:, j]]
    return bad
