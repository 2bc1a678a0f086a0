"""Percentile-rank math used to derive candidate tolerances.

Implements the rank / linear-interpolation quantile convention exactly
(rank = p(n-1)/100 + 1, interpolate between the bracketing order
statistics), plus the arithmetic mean it is compared against. No
alternative quantile conventions are offered, so results are
bit-comparable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptySample, ParameterError


@dataclass(frozen=True)
class PercentileSpec:
    """A percentile in [0, 100]."""

    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and 0.0 <= self.p <= 100.0):
            raise ParameterError(f"percentile must lie in [0, 100], got {self.p!r}")


@dataclass(frozen=True)
class SortedValues:
    """An ascending, non-empty sequence of finite values."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise EmptySample("SortedValues requires at least one value")
        for a, b in zip(self.values, self.values[1:]):
            if not a <= b:
                raise ValueError("values are not ascending")

    @property
    def n(self) -> int:
        return len(self.values)


def _as_spec(p: float | PercentileSpec) -> PercentileSpec:
    return p if isinstance(p, PercentileSpec) else PercentileSpec(float(p))


def sort_ascending(values: Iterable[float]) -> SortedValues:
    """Sort a multiset of finite values ascending, preserving duplicates."""
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise EmptySample("cannot sort an empty sample")
    for v in ordered:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in sample: {v!r}")
    return SortedValues(tuple(ordered))


def percentile_rank(p: float | PercentileSpec, n: int) -> float:
    """Rank of percentile p within n sorted values: p(n-1)/100 + 1."""
    spec = _as_spec(p)
    if n < 1:
        raise EmptySample("rank needs at least one value")
    return spec.p * (n - 1) / 100.0 + 1.0


def percentile_value(sorted_values: SortedValues, p: float | PercentileSpec) -> float:
    """Linearly interpolated value at percentile p.

    With rank = p(n-1)/100 + 1, i = floor(rank), d = rank - i, returns
    values[i] + d*(values[i+1] - values[i]) (1-indexed). At rank exactly n
    (p = 100, or n = 1) returns the maximum; the interpolation term is
    undefined there and its d -> 0 limit is used instead.
    """
    xs = sorted_values.values
    n = len(xs)
    rank = percentile_rank(p, n)
    i = math.floor(rank)
    if i >= n:
        return xs[-1]
    d = rank - i
    lower = xs[i - 1]
    upper = xs[i]
    return lower + d * (upper - lower)


def mean(values: Iterable[float]) -> float:
    """Arithmetic mean; the outlier-sensitive baseline."""
    items = [float(v) for v in values]
    if not items:
        raise EmptySample("cannot average an empty sample")
    for v in items:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in sample: {v!r}")
    return math.fsum(items) / len(items)
