from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import abstraction, make, space
from spurion.abstraction import Composite, DomainMap, Projection, bind, parse_abstraction
from spurion.engine import CompiledDomain
from spurion.errors import ConfigError
from spurion.mutex import exhaustive_pairs, is_abstraction_based_mutex
from spurion.psvn import apply


def names(psi, t):
    return " ".join(psi.alphabet[v] for v in t)


def test_goal_image_2x2():
    d, _ = make("STP-standard", 2, 2)
    psi = abstraction("map B <- 3", d)
    assert names(psi, psi.state(d.goal)) == "1 2 B B"


def test_toh_stack_relabeling():
    d, meta = make("ToH-stack", 5, 3)
    psi = abstraction("map 1 <- 1,3,5\nmap 2 <- 2,4", d, meta)
    s = d.encode("h1 1 0 0 0 0 h1 4 0 0 0 0 h3 5 3 2 0 0".split())
    assert names(psi, psi.state(s)) == "h1 1 0 0 0 0 h1 2 0 0 0 0 h3 1 1 2 0 0"


def test_abstract_operator_applies_where_original_does_not():
    d, meta = make("ToH-stack", 5, 3)
    psi = abstraction("map 1 <- 1,3,5\nmap 2 <- 2,4", d, meta)
    s = d.encode("h1 1 0 0 0 0 h1 4 0 0 0 0 h3 5 3 2 0 0".split())
    t = psi.state(s)
    found = [op for op in d.operators
             if apply(op, s) is None and any(apply(a, t) is not None for a in psi.operator(op))]
    assert found


def test_identity_abstraction():
    d, _ = make("STP-standard", 2, 2)
    psi = bind(DomainMap.of({}), d)
    assert psi.is_identity
    assert psi.state(d.goal) == d.goal
    for op in d.operators:
        assert psi.operator(op) == [op]


def test_projection_drops_constraints():
    d, _ = make("STP-standard", 2, 2)
    psi = bind(Projection((0, 1)), d)
    assert psi.state(d.goal) == d.goal[:2]
    op = next(o for o in d.operators if o.label == "b2_3")  # touches cells 2 and 3 only
    (a,) = psi.operator(op)
    assert a.lhs == (None, None) and a.rhs == (None, None)


def test_parse_merges_keep_lines_and_splits_maps():
    a = parse_abstraction("keep 0 1\nkeep 3\n")
    assert a == Projection((0, 1, 3))
    b = parse_abstraction("map 1 <- 1,2\nmap 3 <- 4\nkeep 0 2")
    assert isinstance(b, Composite) and len(b.parts) == 2


@pytest.mark.parametrize("text", ["mop 1 <- 2", "map 1 2", "keep nowhere", "map 1 <- 2\nmap 3 <- 2"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_abstraction(text)


def test_unknown_symbol_in_map():
    d, _ = make("STP-standard", 2, 2)
    with pytest.raises(ConfigError):
        abstraction("map 1 <- 7", d)


def test_aliases_resolve():
    d, meta = make("Scanalyzer-standard", 4)
    psi = abstraction("keep belts 0,1\nkeep bln_analyzed all", d, meta)
    assert 0 < psi.state_len < d.state_len


def test_abstraction_based_mutex_2x2():
    d, _, r = space("STP-standard", 2, 2)
    psi = abstraction("map B <- 3", d)
    img = psi.pair_image(exhaustive_pairs(r.states, len(d.alphabet)))
    one, two, blank = (psi.alphabet.index(x) for x in "12B")
    assert is_abstraction_based_mutex(img, ((0, one), (2, two)))
    # two "blanks" can sit side by side because one of them is really tile 3
    assert not is_abstraction_based_mutex(img, ((2, blank), (3, blank)))
    with pytest.raises(ConfigError):
        is_abstraction_based_mutex(img, ((1, one), (1, two)))


def _check_homomorphism(d, r, psi):
    acd = CompiledDomain(psi.domain(d).domain)
    for a, b in zip(r.edges.src, r.edges.dst):
        ta, tb = psi.state(r.state(a)), psi.state(r.state(b))
        assert tb in {t for _, t in acd.successors(ta)}


SPACES = {}


def _space(key):
    if key not in SPACES:
        SPACES[key] = space(*key)
    return SPACES[key]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([("STP-standard", 2, 2), ("STP-dual", 2, 3), ("ToH-stack", 3, 3), ("ToH-binary", 3, 3)]),
       st.data())
def test_homomorphism_random_maps(key, data):
    d, meta, r = _space(key)
    syms = list(d.alphabet)
    targets = data.draw(st.lists(st.sampled_from(syms), min_size=len(syms), max_size=len(syms)))
    psi = bind(DomainMap.of(dict(zip(syms, targets))), d)
    _check_homomorphism(d, r, psi)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([("STP-standard", 2, 3), ("ToH-stack", 3, 3), ("Scanalyzer-standard", 4)]), st.data())
def test_homomorphism_random_projections(key, data):
    d, meta, r = _space(key)
    keep = data.draw(st.sets(st.integers(0, d.state_len - 1), min_size=1))
    _check_homomorphism(d, r, bind(Projection(tuple(sorted(keep))), d))
