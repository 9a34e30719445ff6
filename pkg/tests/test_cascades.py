import csv
import io
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perclab.cascades import (
    CASCADE_DPS,
    crude_tail,
    cube_cascade,
    golden_threshold,
    origin_sum,
    tail_sum,
    z2_upper_iterate,
)
from perclab.relaxation import TwoProbability

PHI = (1 + mpmath.sqrt(5)) / 2
THETA = Fraction(18, 100)


def test_golden_threshold():
    assert float(golden_threshold("0.5847", 6)) == pytest.approx(0.4153**32 * float(PHI), rel=1e-12)
    assert golden_threshold("0.5847", 6) < mpmath.mpf("9.93e-13")
    assert golden_threshold(1, 3) == 0
    assert golden_threshold(0, 1) == pytest.approx(PHI, rel=1e-50)
    with pytest.raises(ValueError):
        golden_threshold(0.5, 0)


def test_cube_cascade_reaches_one_nineteenth():
    c = cube_cascade("0.5847", 6, "1e-12")
    assert c.started
    # Derived by running the recurrence; not stated in the source.
    assert c.I == 11 and len(c.stages) == 6
    assert c.stages[-1].r < mpmath.mpf(1) / 19
    assert all(s.r >= mpmath.mpf(1) / 19 for s in c.stages[:-1])


def test_cascade_identity_and_growth():
    c = cube_cascade("0.5847", 6, "1e-12")
    inv = c.inverse_ratios()
    with mpmath.workdps(CASCADE_DPS):
        for a, b in zip(inv, inv[1:]):
            assert abs(b - (a - 1) ** 2) / b < mpmath.mpf(10) ** -12
        eps = inv[0] - PHI**2
        assert eps > 0
        for j, v in enumerate(inv):
            assert v >= PHI**2 + (2 * PHI) ** j * eps * (1 - mpmath.mpf(10) ** -40)
        for s, t in zip(c.stages, c.stages[1:]):
            assert t.q == s.q**2 and t.s == s.s**2 - s.q
            assert s.s**2 > s.q * PHI**2


def test_golden_fixed_point():
    with mpmath.workdps(CASCADE_DPS):
        x = PHI**2
        assert abs((x - 1) ** 2 - x) < mpmath.mpf(10) ** -12


def test_cascade_below_threshold_does_not_start():
    c = cube_cascade("0.5847", 6, "9e-13")
    assert not c.started and c.stages == () and c.I is None


def test_crude_tail():
    assert crude_tail(0) == 1
    assert crude_tail(0.1) == pytest.approx(0.9)
    assert crude_tail(1) == 0
    with pytest.raises(ValueError):
        crude_tail(1.5)
    q = 0.0002
    for _ in range(8):
        q = 10 * q * q
    assert q < 1e-100


def test_tail_sum():
    assert tail_sum(0) == 0
    assert tail_sum("0.1") == mpmath.inf
    # Leading term 10 q^2, then 1000 q^4, ...
    assert float(tail_sum("0.0002")) == pytest.approx(4e-7 + 1000 * 0.0002**4, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.fractions(Fraction(0), Fraction(1, 11)))
def test_tail_sum_dominates_partial_sums(q):
    with mpmath.workdps(CASCADE_DPS):
        qm = mpmath.mpf(q.numerator) / q.denominator
        partial = sum(mpmath.mpf(10) ** (2**i - 1) * qm ** (2**i) for i in range(1, 8))
        assert tail_sum(q) >= partial


def test_iterate_from_one():
    tr = z2_upper_iterate(TwoProbability(1), THETA, "0.8639")
    assert tr.verdict and tr.reached_at == 0 and len(tr.rows) == 1


def test_iterate_first_rows():
    tr = z2_upper_iterate(TwoProbability("0.8457"), THETA, "0.8639", max_depth=2)
    assert not tr.verdict and tr.note == "max depth reached"
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["i", "p_i", "p_i_prime"]
    assert rows[1:] == [["0", "0.845700", "0.845700"], ["1", "0.859167", "0.829055"], ["2", "0.856981", "0.831846"]]


def test_iterate_theta_zero_stalls():
    tr = z2_upper_iterate(TwoProbability("0.8457"), 0, "0.8639")
    assert not tr.verdict and tr.note == "no progress"
    assert all(min(r.p, r.p_prime) < Fraction("0.8639") for r in tr.rows)


def test_iterate_rejects_target():
    with pytest.raises(ValueError):
        z2_upper_iterate(TwoProbability("0.8457"), THETA, 1)


def test_origin_sum_from_one():
    res = origin_sum(TwoProbability(1), THETA, depth=2)
    assert res.finite_sum == 0 and res.total == 0 and res.positive_probability
    assert [r.g_bound for r in res.rows] == [0, 0, 0]


def test_origin_sum_short_run():
    res = origin_sum(TwoProbability("0.8459"), THETA, depth=1)
    assert res.rows[0].g_bound == Fraction("0.1541")
    assert res.rows[1].g_bound == Fraction("0.096201")
    assert res.finite_sum == Fraction("0.250301")
    assert res.tail_bound == mpmath.inf and not res.positive_probability
    assert set(res.to_json()) >= {"rows", "finite_sum", "tail_bound", "total", "positive_probability"}
