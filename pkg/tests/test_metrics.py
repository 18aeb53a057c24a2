from __future__ import annotations

import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spurion import metrics as M
from spurion.errors import MetricsError


def quiet_mean(a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", M.DominanceWarning)
        return M.avg_of_ratios(a, b)


def test_equal_lists():
    s = quiet_mean([3, 5, 7], [3, 5, 7])
    assert s.mean_ratio == 1 and s.dominance_ok


def test_simple_mean():
    s = quiet_mean([2, 4], [1, 2])
    assert s.mean_ratio == 2 and s.per_instance_ratios == [2, 2]


def test_mixed_dominance_warns():
    with pytest.warns(M.DominanceWarning):
        s = M.avg_of_ratios([2, 1], [1, 2])
    assert not s.dominance_ok
    assert s.mean_ratio == Fraction(5, 4)


@pytest.mark.parametrize("a,b,kind", [([1, 2], [1], "length-mismatch"), ([1], [0], "zero-denominator"),
                                      ([], [], "length-mismatch"), ([float("nan")], [1], "non-finite")])
def test_ratio_errors(a, b, kind):
    with pytest.raises(MetricsError) as e:
        M.avg_of_ratios(a, b)
    assert e.value.kind == kind and e.value.exit_code == 7


def test_pct_improvement():
    assert M.pct_improvement([4, 8], [4, 8]) == 0
    assert M.pct_improvement([10], [11]) == 10
    assert M.pct_improvement([10, 20], [15, 20]) == 25
    with pytest.raises(MetricsError):
        M.pct_improvement([0], [1])


def test_float_inputs_are_exact():
    assert M.exact(0.1) == Fraction(1, 10)
    assert M.avg_of_ratios([0.3], [0.1]).mean_ratio == 3


@pytest.mark.parametrize("v,bucket", [(3.0, 3), (3.0001, 4), (2.9999, 3), (0, 0), (1, 1), (Fraction(7, 2), 4)])
def test_unit_buckets(v, bucket):
    assert M.bucket_of(v) == bucket


@pytest.mark.parametrize("v,bucket", [(0.3, "0.3"), (0.3001, "0.4"), (0.2999, "0.3"), (1.0, "1"), (0.05, "0.1")])
def test_tenth_buckets(v, bucket):
    assert M.bucket_of(v, "0.1") == Fraction(bucket)


def test_histogram_shapes():
    assert M.histogram([]) == []
    assert M.histogram([1, 1.5, 2, 0.2, 0]) == [(0, 1), (1, 2), (2, 2)]
    h = M.histogram([0.25, 0.3, 1.0], "0.1")
    assert h == [(Fraction(3, 10), 2), (1, 1)]
    assert [M.format_bucket(k) for k, _ in h] == ["0.3", "1"]
    with pytest.raises(MetricsError):
        M.bucket_of(-1)


def test_format_ratio():
    assert M.format_ratio(Fraction(2, 3)) == "0.67"
    assert M.format_ratio(Fraction(1)) == "1.00"


positive = st.fractions(min_value=Fraction(1, 100), max_value=1000)


@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=30))
def test_mean_of_ratios_bounds(pairs):
    a, b = zip(*pairs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", M.DominanceWarning)
        s = M.avg_of_ratios(a, b)
    rs = [x / y for x, y in pairs]
    assert min(rs) <= s.mean_ratio <= max(rs)
    assert s.dominance_ok == (all(x >= y for x, y in pairs) or all(x <= y for x, y in pairs))


@given(st.fractions(min_value=0, max_value=500), st.sampled_from(["1", "0.1", "0.5"]))
def test_bucket_is_half_open_upper(v, w):
    k = M.bucket_of(v, w)
    w = Fraction(w)
    assert k - w < v <= k or v == k == 0
    assert (k / w).denominator == 1
