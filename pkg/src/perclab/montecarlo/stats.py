"""Binomial upper tails for the success-count hypothesis test."""

from __future__ import annotations

import math


def binomial_tail(T: int, p0: float, k: int) -> float:
    """``P(Bin(T, p0) >= k)``, summed in log space from the largest term."""
    if not isinstance(T, int) or not isinstance(k, int) or T < 0:
        raise ValueError("T and k must be integers with T >= 0")
    if not 0 <= k <= T:
        raise ValueError("k must lie in [0, T]")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    if k == 0:
        return 1.0
    if p0 == 0.0:
        return 0.0
    if p0 == 1.0:
        return 1.0
    lp, lq = math.log(p0), math.log1p(-p0)
    lg = math.lgamma(T + 1)
    logs = [lg - math.lgamma(i + 1) - math.lgamma(T - i + 1) + i * lp + (T - i) * lq for i in range(k, T + 1)]
    top = max(logs)
    # Summing from the largest term keeps the accumulated rounding relative.
    ordered = sorted(logs, reverse=True)
    total = math.fsum(math.exp(v - top) for v in ordered)
    return min(1.0, math.exp(top + math.log(total)))
