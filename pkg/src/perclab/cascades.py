"""Closed-form and LP-driven renormalisation iterations."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .relaxation import TwoProbability, _prob, origin_step, solve_renorm

MAX_DEPTH = 64
CASCADE_DPS = 60


def _phi() -> mpmath.mpf:
    return (1 + mpmath.sqrt(5)) / 2


def _mp(x) -> mpmath.mpf:
    f = Fraction(x) if not isinstance(x, float) else Fraction(repr(x))
    return mpmath.mpf(f.numerator) / f.denominator


def golden_threshold(p, k: int) -> mpmath.mpf:
    """``(1-p)^(2^(k-1)) * phi``, at 60 significant digits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    p = _prob(p)
    with mpmath.workdps(CASCADE_DPS):
        return +(_mp(1 - p) ** (2 ** (k - 1)) * _phi())


@dataclass(frozen=True)
class CubeCascadeState:
    i: int
    q: mpmath.mpf
    s: mpmath.mpf
    r: mpmath.mpf


@dataclass(frozen=True)
class CubeCascade:
    started: bool
    stages: tuple[CubeCascadeState, ...]
    I: int | None  # first stage with r < 1/19

    def inverse_ratios(self) -> list[mpmath.mpf]:
        return [1 / st.r for st in self.stages]


def cube_cascade(p, k: int, P, max_depth: int = MAX_DEPTH) -> CubeCascade:
    """Iterate ``q -> q^2``, ``s -> s^2 - q`` from ``q_k = (1-p)^(2^k)``, ``s_k = P``.

    The cascade only starts when ``P`` beats the golden-ratio threshold; it
    stops at the first stage with ``r = q/s^2 < 1/19``.
    """
    p = _prob(p)
    with mpmath.workdps(CASCADE_DPS):
        P = _mp(P)
        if not P > golden_threshold(p, k):
            return CubeCascade(False, (), None)
        q = _mp(1 - p) ** (2**k)
        s = P
        stages = []
        for i in range(k, k + max_depth + 1):
            r = q / (s * s)
            stages.append(CubeCascadeState(i, q, s, r))
            if r < mpmath.mpf(1) / 19:
                return CubeCascade(True, tuple(stages), i)
            q, s = q * q, s * s - q
        return CubeCascade(True, tuple(stages), None)


@dataclass(frozen=True)
class TraceRow:
    i: int
    p: Fraction
    p_prime: Fraction
    g_bound: Fraction | None = None
    certificate_hash: str = ""

    def to_json(self) -> dict:
        out = {
            "i": self.i,
            "p": float(self.p),
            "p_prime": float(self.p_prime),
            "certificate_hash": self.certificate_hash,
        }
        if self.g_bound is not None:
            out["g_bound"] = float(self.g_bound)
        return out


@dataclass(frozen=True)
class RenormTrace:
    rows: tuple[TraceRow, ...]
    verdict: bool
    reached_at: int | None = None
    note: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        with_g = any(r.g_bound is not None for r in self.rows)
        w.writerow(["i", "p_i", "p_i_prime"] + (["g_complement_bound"] if with_g else []))
        for r in self.rows:
            line = [r.i, f"{float(r.p):.6f}", f"{float(r.p_prime):.6f}"]
            if with_g:
                line.append(f"{float(r.g_bound):.6f}")
            w.writerow(line)
        return buf.getvalue()


def z2_upper_iterate(
    start: TwoProbability,
    theta,
    target,
    max_depth: int = MAX_DEPTH,
    extra_rows: int = 0,
) -> RenormTrace:
    """Apply renormalisation steps until both probabilities reach ``target``.

    ``extra_rows`` further rows are appended after the target is reached by
    a step; a start already at the target is a single row.  A step that raises neither probability ends the run with verdict false.
    """
    target = _prob(target)
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    rows = [TraceRow(0, start.p, start.p_prime)]
    cur = start
    reached = 0 if cur.minimum() >= target else None
    i = 0
    while reached is None or (reached > 0 and i - reached < extra_rows):
        if reached is None and i >= max_depth:
            return RenormTrace(tuple(rows), False, None, "max depth reached")
        step = solve_renorm(cur, theta)
        nxt = step.next
        i += 1
        rows.append(TraceRow(i, nxt.p, nxt.p_prime, certificate_hash=step.certificate_hash()))
        if reached is None:
            if nxt.minimum() >= target:
                reached = i
            elif nxt.p <= cur.p and nxt.p_prime <= cur.p_prime:
                return RenormTrace(tuple(rows), False, None, "no progress")
        cur = nxt
    return RenormTrace(tuple(rows), True, reached)


def crude_tail(q) -> float:
    """``1 - 10 q^2`` clamped to [0, 1]."""
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    return min(1.0, max(0.0, 1 - 10 * q * q))


def tail_sum(q) -> mpmath.mpf:
    """Upper bound ``sum_{i>=1} 10^(2^i - 1) q^(2^i)``; infinite when ``10 q >= 1``."""
    with mpmath.workdps(CASCADE_DPS):
        x = 10 * _mp(q)
        if x >= 1:
            return mpmath.inf
        total, term = mpmath.mpf(0), x * x
        while term > 0 and (total == 0 or term > total * mpmath.mpf(10) ** -CASCADE_DPS):
            total += term / 10
            term = term * term
        # Omitted terms total under 2 * 10^-60 relative.
        return +(total * (1 + mpmath.mpf(10) ** -(CASCADE_DPS - 5)))


@dataclass(frozen=True)
class OriginSum:
    rows: tuple[TraceRow, ...]
    finite_sum: Fraction
    q_last: Fraction
    tail_bound: mpmath.mpf
    total: mpmath.mpf
    positive_probability: bool
    trace: RenormTrace = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "finite_sum": float(self.finite_sum),
            "q_last": float(self.q_last),
            "tail_bound": float(self.tail_bound),
            "total": float(self.total),
            "positive_probability": self.positive_probability,
        }


def origin_sum(start: TwoProbability, theta, depth: int = 13) -> OriginSum:
    """Union bound on the failure of the nested origin events.

    Row 0 is a single open edge; rows 1..depth bound each renormalised level
    by LP, and the remainder is bounded with the ``1 - 10 q^2`` iteration.
    """
    rows = [TraceRow(0, start.p, start.p_prime, 1 - start.p)]
    cur = start
    for i in range(1, depth + 1):
        g = origin_step(cur, theta)
        step = solve_renorm(cur, theta)
        cur = step.next
        rows.append(TraceRow(i, cur.p, cur.p_prime, g, step.certificate_hash()))
    finite = sum((r.g_bound for r in rows), Fraction(0))
    q_last = 1 - cur.minimum()
    tail = tail_sum(q_last)
    with mpmath.workdps(CASCADE_DPS):
        total = _mp(finite) + tail
        positive = bool(total < 1)
    trace = RenormTrace(tuple(rows), positive)
    return OriginSum(tuple(rows), finite, q_last, tail, total, positive, trace)

