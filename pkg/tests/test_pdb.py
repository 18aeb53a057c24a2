from __future__ import annotations

import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import abstraction, build_all, distances, hvec, space
from spurion import pdb as P
from spurion.abstraction import bind, Projection
from spurion.errors import CapacityError, ConfigError, MissingAbstractState
from spurion.hashtable import EMPTY, _find_many, _insert_rows
from spurion.psvn import apply


def _abstract_graph(ad_domain, nodes):
    """Forward abstract edges among ``nodes``, by brute-force application of every operator."""
    nodes = set(nodes)
    edges = set()
    for t in nodes:
        for op in ad_domain.operators:
            u = apply(op, t)
            if u is not None and u in nodes:
                edges.add((t, u))
    return edges


def _backward_bfs(goal, edges):
    preds = {}
    for a, b in edges:
        preds.setdefault(b, []).append(a)
    dist = {goal: 0}
    q = deque([goal])
    while q:
        x = q.popleft()
        for y in preds.get(x, ()):
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


CASES = [("STP-standard", (2, 2), "map B <- 3"), ("STP-dual", (2, 3), "map 2 <- 5"),
         ("ToH-disk", (5, 3), "map 1 <- 1,2"), ("BW-top", (3, 3), "map a <- a,b")]


@pytest.mark.parametrize("family,params,text", CASES)
def test_variants_match_brute_force_oracles(family, params, text):
    d, meta, r = space(family, *params)
    psi = abstraction(text, d, meta)
    ad = psi.domain(d).domain
    pdbs = build_all(d, psi, r)
    every = list(itertools.product(*[sorted(p) for p in ad.position_domains]))
    goal = tuple(ad.goal)
    assert pdbs[P.ORGN].as_dict() == _backward_bfs(goal, _abstract_graph(ad, every))
    images = {tuple(x) for x in psi.states_array(r.states).tolist()}
    assert pdbs[P.TRUE].as_dict() == _backward_bfs(goal, _abstract_graph(ad, images))
    genuine = {(psi.state(r.state(a)), psi.state(r.state(b))) for a, b in zip(r.edges.src, r.edges.dst)}
    assert pdbs[P.PURE].as_dict() == _backward_bfs(goal, genuine)
    assert set(pdbs[P.TRUE].keyset()) <= images


def test_goal_only_filter():
    d, _, r = space("STP-standard", 2, 2)
    psi = abstraction("map B <- 3", d)
    goal = np.array([psi.state(d.goal)])
    p = P.build(psi.domain(d), P.StateSet(goal), psi=psi)
    assert p.count == 1 and p.variant == P.TRUE
    assert P.lookup(p, d.goal) == 0
    assert P.avg_h(p, np.array([d.goal])) == 0


def test_lookup_miss_and_strict():
    d, _, r = space("STP-standard", 2, 2)
    psi = abstraction("map B <- 3", d)
    p = P.build(psi.domain(d), P.StateSet(np.array([psi.state(d.goal)])), psi=psi)
    far = r.state(len(r) - 1)
    assert P.lookup(p, far) == float("inf")
    with pytest.raises(MissingAbstractState) as e:
        P.lookup(p, far, strict=True)
    assert e.value.exit_code == 5


def test_true_never_misses_on_genuine_states():
    for family in ("ToH-stack", "ToH-disk", "ToH-binary"):
        d, meta, r = space(family, 3, 3)
        psi = bind(Projection(tuple(range(d.state_len // 2))), d)
        p = build_all(d, psi, r, (P.TRUE,))[P.TRUE]
        assert (hvec(p, r) >= 0).all()


def test_admissible_and_consistent_everywhere():
    d, meta, r = space("ToH-stack", 4, 3)
    psi = abstraction("map 1 <- 1,2", d, meta)
    dist = distances(r, d)
    for v, p in build_all(d, psi, r).items():
        h = hvec(p, r)
        assert (h >= 0).all() and (h <= dist).all(), v
        assert (np.abs(h[r.edges.src] - h[r.edges.dst]) <= 1).all(), v


def test_capacity_rule():
    assert P.capacity_for(0) == P.MIN_CAPACITY
    for k in range(4, 20):
        assert P.capacity_for(3 * 2**k // 4) == 2**k
        assert P.capacity_for(3 * 2**k // 4 + 1) == 2 ** (k + 1)


def test_size_model_bucket_effect():
    # different entry counts in the same power-of-two bucket give equal sizes
    a, b = P.capacity_for(400_000), P.capacity_for(600_000)
    assert a == b
    assert P.size_bytes_for(a, 15) == P.size_bytes_for(b, 15) == a * 20 + P.HEADER_BYTES


def test_sizes_use_original_width():
    d, meta, r = space("Scanalyzer-standard", 6)
    psi = abstraction("keep belts 3,4,5\nkeep bln_analyzed all", d, meta)
    pdbs = build_all(d, psi, r, (P.ORGN, P.MTX_EXH, P.TRUE))
    assert pdbs[P.MTX_EXH].size_bytes() == pdbs[P.TRUE].size_bytes()
    assert pdbs[P.ORGN].size_bytes() > pdbs[P.TRUE].size_bytes()
    assert pdbs[P.TRUE].slot_cells == d.state_len


@pytest.mark.parametrize("n,text", [(1023, "1023B"), (1024, "1KB"), (1025, "1.1KB"), (45 * 2**20, "45MB"),
                                    (int(5.55 * 2**20), "5.6MB"), (705 * 1024 - 5, "705KB")])
def test_format_size(n, text):
    assert P.format_size(n) == text


def test_capacity_exceeded():
    d, _, r = space("STP-standard", 2, 3)
    psi = abstraction("map B <- 5", d)
    with pytest.raises(CapacityError) as e:
        P.build(psi.domain(d), None, psi=psi, max_entries=10)
    assert e.value.exit_code == 3


def test_goal_must_pass_filter():
    d, _, r = space("STP-standard", 2, 2)
    psi = abstraction("map B <- 3", d)
    other = np.array([psi.state(r.state(len(r) - 1))])
    with pytest.raises(ConfigError):
        P.build(psi.domain(d), P.StateSet(other), psi=psi)


def test_save_load_round_trip(tmp_path):
    d, meta, r = space("ToH-stack", 3, 3)
    psi = abstraction("map 1 <- 1,2", d, meta)
    for v, p in build_all(d, psi, r).items():
        p.save(tmp_path / f"{v}.pdb")
        q = P.load(tmp_path / f"{v}.pdb", psi)
        assert q.variant == v and q.as_dict() == p.as_dict() and q.size_bytes() == p.size_bytes()
    with pytest.raises(ConfigError):
        P.load(tmp_path / "TRUE.pdb", abstraction("map 1 <- 1,3", d, meta))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.lists(st.integers(0, 5), min_size=3, max_size=3), st.integers(0, 99)), max_size=200),
       st.lists(st.lists(st.integers(0, 5), min_size=3, max_size=3), max_size=30))
def test_hash_table_matches_dict(rows, probes):
    keys = np.zeros((P.MIN_CAPACITY, 3), dtype=np.uint8)
    vals = np.full(P.MIN_CAPACITY, EMPTY, dtype=np.int32)
    count = 0
    model = {}
    for row, v in rows:
        keys, vals, count = _insert_rows(keys, vals, count, np.array([row], dtype=np.uint8),
                                         np.array([v], dtype=np.int32))
        model.setdefault(tuple(row), v)
    assert count == len(model) == int((vals != EMPTY).sum())
    assert count * 4 <= keys.shape[0] * 3
    q = np.array([r for r, _ in rows] + probes, dtype=np.uint8).reshape(-1, 3)
    out = np.empty(len(q), dtype=np.int32)
    _find_many(keys, vals, q, out)
    assert out.tolist() == [model.get(tuple(x), EMPTY) for x in q.tolist()]
