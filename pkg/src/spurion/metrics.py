"""Ratio averaging, percentage improvement and histogram bucketing.

Arithmetic is exact: inputs become :class:`fractions.Fraction` (floats through
their shortest decimal repr, so ``0.3`` is exactly 3/10) and results are
Fractions. Callers format to two decimals at output time.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import MetricsError

Number = Union[int, float, Fraction, str]


class DominanceWarning(UserWarning):
    pass


def exact(x: Number) -> Fraction:
    if isinstance(x, float):
        if not math.isfinite(x):
            raise MetricsError("non-finite", f"cannot use {x!r} in exact arithmetic")
        return Fraction(repr(x))
    return Fraction(x)


@dataclass
class RatioSummary:
    per_instance_ratios: list
    mean_ratio: Fraction
    dominance_ok: bool


def _pairs(a: Sequence[Number], b: Sequence[Number]):
    if len(a) != len(b):
        raise MetricsError("length-mismatch", f"{len(a)} values against {len(b)}")
    xs = [exact(v) for v in a]
    ys = [exact(v) for v in b]
    if any(y <= 0 for y in ys):
        raise MetricsError("zero-denominator", "denominators must be positive")
    return xs, ys


def avg_of_ratios(a: Sequence[Number], b: Sequence[Number]) -> RatioSummary:
    """Arithmetic mean of a[i]/b[i], plus whether one list dominates the other."""
    xs, ys = _pairs(a, b)
    if not xs:
        raise MetricsError("length-mismatch", "no instances")
    ratios = [x / y for x, y in zip(xs, ys)]
    ok = all(x >= y for x, y in zip(xs, ys)) or all(x <= y for x, y in zip(xs, ys))
    if not ok:
        warnings.warn("neither list dominates the other; the mean of ratios may mislead", DominanceWarning,
                      stacklevel=2)
    return RatioSummary(ratios, sum(ratios, Fraction(0)) / len(ratios), ok)


def pct_improvement(before: Sequence[Number], after: Sequence[Number]) -> Fraction:
    """Mean over instances of 100 * (after - before) / before."""
    xs, bs = _pairs(after, before)
    if not bs:
        raise MetricsError("length-mismatch", "no instances")
    return sum((100 * (x - b) / b for b, x in zip(bs, xs)), Fraction(0)) / len(bs)


def bucket_of(v: Number, width: Number = 1) -> Fraction:
    """Upper end n of the half-open bucket (n - width, n] containing ``v``."""
    v, w = exact(v), exact(width)
    if v < 0:
        raise MetricsError("negative-value", f"histogram values must be nonnegative, got {v}")
    return math.ceil(v / w) * w


def histogram(values: Sequence[Number], width: Number = 1) -> list:
    """Sorted (bucket, count) pairs; zero values land in bucket 0."""
    counts = Counter(bucket_of(v, width) for v in values)
    out = []
    for k in sorted(counts):
        out.append((int(k) if k.denominator == 1 else k, counts[k]))
    return out


def format_bucket(k) -> str:
    if isinstance(k, int):
        return str(k)
    return f"{float(k):.1f}" if (k * 10).denominator == 1 else str(float(k))


def format_ratio(x) -> str:
    return f"{float(x):.2f}"
