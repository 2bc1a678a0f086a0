"""Independent reference implementations the real code is checked against.

These are deliberately written from the definitions alone (exact rational
arithmetic, linear scans) and must never import from the modules they
verify beyond plain data types.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def quantile_oracle(values: Sequence[float], p: float) -> float:
    """Rank/interpolation quantile, brute-force in plain float arithmetic."""
    xs = list(values)
    xs.sort()
    n = len(xs)
    rank = p * (n - 1) / 100.0 + 1.0
    whole = int(rank)
    frac = rank - whole
    if whole >= n:
        return xs[n - 1]
    return xs[whole - 1] + frac * (xs[whole] - xs[whole - 1])


def quantile_oracle_exact(values: Sequence[float], p: float) -> float:
    """Same quantile in exact rational arithmetic (no rounding at all).

    Comparisons against this need an absolute floor scaled to the data:
    float evaluation legitimately rounds away rank dust far below one ulp.
    """
    xs = sorted(Fraction(v) for v in values)
    n = len(xs)
    rank = Fraction(p) * (n - 1) / 100 + 1
    i = math.floor(rank)
    d = rank - i
    if i >= n:
        return float(xs[-1])
    return float(xs[i - 1] + d * (xs[i] - xs[i - 1]))


def count_flagged(values: Sequence[float], tolerance: float) -> int:
    """Brute-force linear scan of the strict below-tolerance rule."""
    total = 0
    for v in values:
        if v < tolerance:
            total += 1
    return total


def relative_error(got: float, want: float) -> float:
    if got == want:
        return 0.0
    return abs(got - want) / max(abs(want), 1e-300)
