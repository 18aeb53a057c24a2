from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make, space
from spurion.errors import DomainError, PSVNSyntaxError
from spurion.psvn import Operator, apply, format_domain, match, parse_domain, regress

FIVE = """\
domain demo
alphabet 1 2 3 4 5
length 7
op o: $A _ $B 2 _ $B 3 => 3 _ $A _ _ $A $B
goal 1 1 1 1 1 1 1
"""


@pytest.fixture
def demo():
    return parse_domain(FIVE)


def enc(d, text):
    return d.encode(text.split())


def test_parse_worked_operator(demo):
    assert demo.state_len == 7
    assert len(demo.operators) == 1
    op = demo.operators[0]
    assert op.lhs[1] is None and op.lhs[0] == "A" and op.lhs[3] == demo.symbol("2")


def test_goal_only_domain():
    d = parse_domain("domain g\nalphabet a b\nlength 2\ngoal a b\n")
    assert d.operators == ()


def test_unbound_rhs_variable():
    with pytest.raises(DomainError) as e:
        parse_domain(FIVE.replace("$A $B\n", "$A $C\n"))
    assert e.value.kind == "rhs-variable-unbound"


def test_unknown_symbol():
    with pytest.raises(DomainError) as e:
        parse_domain(FIVE.replace("goal 1 1", "goal 9 1"))
    assert e.value.kind == "symbol-not-in-alphabet"


def test_length_mismatch():
    with pytest.raises(DomainError) as e:
        parse_domain(FIVE.replace("=> 3 _", "=> 3"))
    assert e.value.kind == "length-mismatch"


def test_syntax_error_position():
    with pytest.raises(PSVNSyntaxError) as e:
        parse_domain(FIVE.replace("length 7", "length 7\n  bogus line"))
    assert e.value.line == 4
    assert e.value.exit_code == 2


def test_match_binds_variables(demo):
    op = demo.operators[0]
    b = match(op.lhs, enc(demo, "4 5 1 2 5 1 3"))
    assert b == {"A": demo.symbol("4"), "B": demo.symbol("1")}
    assert match(op.lhs, enc(demo, "4 5 1 2 5 2 3")) is None
    assert match((None,) * 7, enc(demo, "4 5 1 2 5 2 3")) == {}


def test_apply_worked_example(demo):
    op = demo.operators[0]
    assert apply(op, enc(demo, "4 5 1 2 5 1 3")) == enc(demo, "3 5 4 2 5 4 1")


def test_apply_identity_and_failure(demo):
    s = enc(demo, "4 5 1 2 5 1 3")
    ident = Operator("id", (None,) * 7, (None,) * 7)
    assert apply(ident, s) == s
    assert regress(ident, s, demo.position_domains) == [s]
    blocked = Operator("c", (demo.symbol("5"),) + (None,) * 6, (None,) * 7)
    assert apply(blocked, s) is None


def test_apply_outside_position_domain():
    text = "domain p\nalphabet a b\nlength 2\nposition 1 a\nop w: _ _ => _ b\ngoal a a\n"
    d = parse_domain(text)
    with pytest.raises(DomainError) as e:
        apply(d.operators[0], d.goal, d)
    assert e.value.kind == "result-symbol-outside-position-domain"


def test_print_parse_round_trip():
    for family, params in [("STP-standard", (2, 3)), ("ToH-stack", (3, 3)), ("BW-top", (3, 3))]:
        d, _ = make(family, *params)
        assert parse_domain(format_domain(d)) == d


def test_regress_round_trip_2x2():
    d, _, r = space("STP-standard", 2, 2)
    for i in range(len(r)):
        s = r.state(i)
        for op in d.operators:
            t = apply(op, s)
            if t is None:
                continue
            pre = regress(op, t, d.position_domains)
            assert s in pre
            assert all(apply(op, p) == t for p in pre)


cells = st.one_of(st.none(), st.sampled_from(["A", "B"]), st.integers(0, 2))


@st.composite
def operators(draw):
    lhs = tuple(draw(st.lists(cells, min_size=4, max_size=4)))
    bound = sorted({c for c in lhs if isinstance(c, str)})
    rcell = st.one_of(st.none(), st.integers(0, 2), *([st.sampled_from(bound)] if bound else []))
    rhs = tuple(draw(st.lists(rcell, min_size=4, max_size=4)))
    return Operator("o", lhs, rhs)


@settings(max_examples=300, deadline=None)
@given(operators(), st.lists(st.integers(0, 2), min_size=4, max_size=4))
def test_regress_is_exact_preimage(op, s):
    pdoms = (frozenset(range(3)),) * 4
    s = tuple(s)
    t = apply(op, s)
    if t is not None:
        pre = regress(op, t, pdoms)
        assert s in pre
        assert all(apply(op, p) == t for p in pre)
    # regress of any state is exactly its set of pre-images
    brute = [p for p in itertools.product(range(3), repeat=4) if apply(op, p) == s]
    assert sorted(regress(op, s, pdoms)) == brute
