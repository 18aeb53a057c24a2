"""Compiled operator tables for fast successor and predecessor generation.

Operators are compiled into match/produce rules and indexed with a decision
tree over their constant tests, so a state only meets the rules that can
apply to it. Results are always reported in operator declaration order.
"""
from __future__ import annotations

import itertools
from collections import Counter, defaultdict

import numpy as np
from numba import njit

from .psvn import Domain, Operator

_LEAF = 4


class _Node:
    __slots__ = ("pos", "children", "dontcare", "here")

    def __init__(self):
        self.pos = -1
        self.children = {}
        self.dontcare = None
        self.here = ()


def _build_tree(items):
    """items: list of (rule_id, {pos: val}) with the tests still to be decided."""
    node = _Node()
    pending = [it for it in items if it[1]]
    done = [(rid, ()) for rid, tests in items if not tests]
    if len(pending) <= _LEAF:
        node.here = tuple(done + [(rid, tuple(sorted(t.items()))) for rid, t in pending])
        return node
    node.here = tuple(done)
    counts = Counter(p for _, t in pending for p in t)
    pos = max(counts, key=lambda p: (counts[p], -p))
    groups = defaultdict(list)
    rest = []
    for rid, t in pending:
        if pos in t:
            t = dict(t)
            val = t.pop(pos)
            groups[val].append((rid, t))
        else:
            rest.append((rid, t))
    node.pos = pos
    node.children = {v: _build_tree(g) for v, g in groups.items()}
    if rest:
        node.dontcare = _build_tree(rest)
    return node


class RuleIndex:
    def __init__(self, tests):
        self.root = _build_tree([(rid, dict(t)) for rid, t in enumerate(tests)])

    def candidates(self, s):
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            for rid, rem in node.here:
                for p, v in rem:
                    if s[p] != v:
                        break
                else:
                    out.append(rid)
            if node.pos >= 0:
                child = node.children.get(s[node.pos])
                if child is not None:
                    stack.append(child)
                if node.dontcare is not None:
                    stack.append(node.dontcare)
        out.sort()
        return out


def _var_positions(pattern):
    pos = defaultdict(list)
    for i, c in enumerate(pattern):
        if isinstance(c, str):
            pos[c].append(i)
    return pos


def _compile_forward(op: Operator, pdoms):
    tests = {i: c for i, c in enumerate(op.lhs) if isinstance(c, int)}
    lvars = _var_positions(op.lhs)
    eqs = tuple((ps[0], q) for ps in lvars.values() for q in ps[1:])
    consts = []
    copies = []
    checks = []
    for i, c in enumerate(op.rhs):
        if c is None:
            continue
        if isinstance(c, str):
            src = lvars[c][0]
            copies.append((i, src))
            allowed = frozenset.intersection(*(frozenset(pdoms[p]) for p in lvars[c]))
            if not allowed <= pdoms[i]:
                checks.append((i, pdoms[i]))
        else:
            consts.append((i, c))
    return tests, (eqs, tuple(consts), tuple(copies), tuple(checks))


def _compile_backward(op: Operator, pdoms):
    """Rule matching a successor state and producing its exact pre-images."""
    lhs, rhs = op.lhs, op.rhs
    tests = {}
    first = {}
    eqs = []

    def bind(var, i):
        if var in first:
            eqs.append((first[var], i))
        else:
            first[var] = i

    for i, (l, r) in enumerate(zip(lhs, rhs)):
        if r is None:
            if l is None:
                continue
            if isinstance(l, str):
                bind(l, i)
            else:
                tests[i] = l
        elif isinstance(r, str):
            bind(r, i)
        else:
            tests[i] = r
    # a constant test and an equality on the same cells must agree; keep both
    consts = []
    copies = []
    checks = []
    enum_vars = defaultdict(list)
    free_cells = []
    dead = False
    for i, (l, r) in enumerate(zip(lhs, rhs)):
        if r is None:
            continue
        if l is None:
            free_cells.append(i)
        elif isinstance(l, str):
            if l in first:
                copies.append((i, first[l]))
                checks.append((i, pdoms[i]))
            else:
                enum_vars[l].append(i)
        else:
            if l not in pdoms[i]:
                dead = True
            consts.append((i, l))
    enums = []
    for var, cells in enum_vars.items():
        vals = frozenset.intersection(*(frozenset(pdoms[p]) for p in cells))
        enums.append((tuple(cells), tuple(sorted(vals))))
    for i in free_cells:
        enums.append(((i,), tuple(sorted(pdoms[i]))))
    checks = tuple((i, a) for i, a in checks)
    return tests, (tuple(eqs), tuple(consts), tuple(copies), checks, tuple(enums), dead)


class CompiledDomain:
    """Forward and backward rule tables for one domain."""

    def __init__(self, domain: Domain):
        self.domain = domain
        pdoms = [frozenset(d) for d in domain.position_domains]
        fwd = [_compile_forward(op, pdoms) for op in domain.operators]
        bwd = [_compile_backward(op, pdoms) for op in domain.operators]
        self._fwd_rules = [r for _, r in fwd]
        self._bwd_rules = [r for _, r in bwd]
        self._fwd_index = RuleIndex([t for t, _ in fwd])
        self._bwd_index = RuleIndex([t for t, _ in bwd])

    def successors(self, s):
        """List of (operator index, successor) in operator order."""
        out = []
        rules = self._fwd_rules
        for rid in self._fwd_index.candidates(s):
            eqs, consts, copies, checks = rules[rid]
            ok = True
            for a, b in eqs:
                if s[a] != s[b]:
                    ok = False
                    break
            if not ok:
                continue
            t = list(s)
            for i, v in consts:
                t[i] = v
            for i, src in copies:
                t[i] = s[src]
            for i, allowed in checks:
                if t[i] not in allowed:
                    ok = False
                    break
            if ok:
                out.append((rid, tuple(t)))
        return out

    def predecessors(self, s):
        """List of (operator index, predecessor) covering every exact pre-image."""
        out = []
        rules = self._bwd_rules
        for rid in self._bwd_index.candidates(s):
            eqs, consts, copies, checks, enums, dead = rules[rid]
            if dead:
                continue
            ok = True
            for a, b in eqs:
                if s[a] != s[b]:
                    ok = False
                    break
            if not ok:
                continue
            t = list(s)
            for i, v in consts:
                t[i] = v
            for i, src in copies:
                t[i] = s[src]
            for i, allowed in checks:
                if t[i] not in allowed:
                    ok = False
                    break
            if not ok:
                continue
            if not enums:
                out.append((rid, tuple(t)))
                continue
            cells = [c for c, _ in enums]
            for combo in itertools.product(*(vals for _, vals in enums)):
                for cs, v in zip(cells, combo):
                    for i in cs:
                        t[i] = v
                out.append((rid, tuple(t)))
        return out


# --- flat array form for jitted expansion -------------------------------------------


class FlatRules:
    """Rule tables and the decision tree packed into numpy arrays.

    ``arrays`` is the tuple consumed by :func:`expand`; ``forward`` rules carry no
    enumeration groups.
    """

    def __init__(self, tests, rules, state_len, k):
        root = _build_tree([(rid, dict(t)) for rid, t in enumerate(tests)])
        nodes = []
        stack = [root]
        ids = {}
        while stack:
            nd = stack.pop()
            ids[id(nd)] = len(nodes)
            nodes.append(nd)
            stack.extend(nd.children.values())
            if nd.dontcare is not None:
                stack.append(nd.dontcare)
        N = len(nodes)
        node_pos = np.full(N, -1, dtype=np.int64)
        node_child = np.full((N, k), -1, dtype=np.int64)
        node_dc = np.full(N, -1, dtype=np.int64)
        here_ptr = [0]
        here_rule = []
        htest_ptr = [0]
        htest_pos = []
        htest_val = []
        for x, nd in enumerate(nodes):
            node_pos[x] = nd.pos
            for v, c in nd.children.items():
                node_child[x, v] = ids[id(c)]
            if nd.dontcare is not None:
                node_dc[x] = ids[id(nd.dontcare)]
            for rid, rem in nd.here:
                here_rule.append(rid)
                for p, v in rem:
                    htest_pos.append(p)
                    htest_val.append(v)
                htest_ptr.append(len(htest_pos))
            here_ptr.append(len(here_rule))
        tree = (node_pos, node_child, node_dc, _i64(here_ptr), _i64(here_rule), _i64(htest_ptr),
                _i64(htest_pos), _i64(htest_val))

        eq_ptr, eq_a, eq_b = [0], [], []
        c_ptr, c_pos, c_val = [0], [], []
        cp_ptr, cp_i, cp_src = [0], [], []
        ck_ptr, ck_pos, ck_allowed = [0], [], []
        g_ptr, gc_ptr, gc_cell, gv_ptr, gv_val = [0], [0], [], [0], []
        dead = []
        for rule in rules:
            eqs, consts, copies, checks = rule[:4]
            enums = rule[4] if len(rule) > 4 else ()
            dead.append(bool(rule[5]) if len(rule) > 5 else False)
            for a, b in eqs:
                eq_a.append(a)
                eq_b.append(b)
            eq_ptr.append(len(eq_a))
            for i, v in consts:
                c_pos.append(i)
                c_val.append(v)
            c_ptr.append(len(c_pos))
            for i, s in copies:
                cp_i.append(i)
                cp_src.append(s)
            cp_ptr.append(len(cp_i))
            for i, allowed in checks:
                ck_pos.append(i)
                row = np.zeros(k, dtype=np.bool_)
                row[list(allowed)] = True
                ck_allowed.append(row)
            ck_ptr.append(len(ck_pos))
            for cells, vals in enums:
                gc_cell.extend(cells)
                gc_ptr.append(len(gc_cell))
                gv_val.extend(vals)
                gv_ptr.append(len(gv_val))
            g_ptr.append(len(gc_ptr) - 1)
        allowed = np.array(ck_allowed, dtype=np.bool_).reshape(len(ck_allowed), k)
        self.arrays = tree + (
            _i64(eq_ptr), _i64(eq_a), _i64(eq_b), _i64(c_ptr), _i64(c_pos), _i64(c_val),
            _i64(cp_ptr), _i64(cp_i), _i64(cp_src), _i64(ck_ptr), _i64(ck_pos), allowed,
            _i64(g_ptr), _i64(gc_ptr), _i64(gc_cell), _i64(gv_ptr), _i64(gv_val), np.array(dead, dtype=np.bool_),
        )
        self.n_rules = len(rules)
        self.state_len = state_len


def _i64(xs):
    return np.array(xs, dtype=np.int64)


def flat_forward(cd: CompiledDomain) -> FlatRules:
    d = cd.domain
    tests = [t for t, _ in (_compile_forward(op, [frozenset(x) for x in d.position_domains]) for op in d.operators)]
    return FlatRules(tests, cd._fwd_rules, d.state_len, len(d.alphabet))


def flat_backward(cd: CompiledDomain) -> FlatRules:
    d = cd.domain
    pd = [frozenset(x) for x in d.position_domains]
    tests = [t for t, _ in (_compile_backward(op, pd) for op in d.operators)]
    return FlatRules(tests, cd._bwd_rules, d.state_len, len(d.alphabet))


@njit(cache=True)
def _candidates(s, node_pos, node_child, node_dc, here_ptr, here_rule, htest_ptr, htest_pos, htest_val, out):
    n = 0
    stack = np.empty(2 * s.shape[0] + 4, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        x = stack[top]
        for e in range(here_ptr[x], here_ptr[x + 1]):
            ok = True
            for t in range(htest_ptr[e], htest_ptr[e + 1]):
                if s[htest_pos[t]] != htest_val[t]:
                    ok = False
                    break
            if ok:
                out[n] = here_rule[e]
                n += 1
        p = node_pos[x]
        if p >= 0:
            c = node_child[x, s[p]]
            if c >= 0:
                stack[top] = c
                top += 1
            if node_dc[x] >= 0:
                stack[top] = node_dc[x]
                top += 1
    out[:n].sort()
    return n


@njit(cache=True)
def expand(s, arrs, cand, out, out_ops):
    """Apply every rule to ``s``; returns the number of results or -1 when ``out`` is too small."""
    (node_pos, node_child, node_dc, here_ptr, here_rule, htest_ptr, htest_pos, htest_val,
     eq_ptr, eq_a, eq_b, c_ptr, c_pos, c_val, cp_ptr, cp_i, cp_src, ck_ptr, ck_pos, allowed,
     g_ptr, gc_ptr, gc_cell, gv_ptr, gv_val, dead) = arrs
    nc = _candidates(s, node_pos, node_child, node_dc, here_ptr, here_rule, htest_ptr, htest_pos, htest_val, cand)
    L = s.shape[0]
    cap = out.shape[0]
    m = 0
    t = np.empty(L, dtype=s.dtype)
    for ci in range(nc):
        r = cand[ci]
        if dead[r]:
            continue
        ok = True
        for e in range(eq_ptr[r], eq_ptr[r + 1]):
            if s[eq_a[e]] != s[eq_b[e]]:
                ok = False
                break
        if not ok:
            continue
        for i in range(L):
            t[i] = s[i]
        for e in range(c_ptr[r], c_ptr[r + 1]):
            t[c_pos[e]] = c_val[e]
        for e in range(cp_ptr[r], cp_ptr[r + 1]):
            t[cp_i[e]] = s[cp_src[e]]
        for e in range(ck_ptr[r], ck_ptr[r + 1]):
            if not allowed[e, t[ck_pos[e]]]:
                ok = False
                break
        if not ok:
            continue
        g0 = g_ptr[r]
        g1 = g_ptr[r + 1]
        if g0 == g1:
            if m >= cap:
                return -1
            out[m, :] = t
            out_ops[m] = r
            m += 1
            continue
        ng = g1 - g0
        idx = np.zeros(ng, dtype=np.int64)
        while True:
            for g in range(ng):
                v = gv_val[gv_ptr[g0 + g] + idx[g]]
                for e in range(gc_ptr[g0 + g], gc_ptr[g0 + g + 1]):
                    t[gc_cell[e]] = v
            if m >= cap:
                return -1
            out[m, :] = t
            out_ops[m] = r
            m += 1
            # odometer, last group fastest so the order matches itertools.product
            g = ng - 1
            while g >= 0:
                idx[g] += 1
                if idx[g] < gv_ptr[g0 + g + 1] - gv_ptr[g0 + g]:
                    break
                idx[g] = 0
                g -= 1
            if g < 0:
                break
    return m
