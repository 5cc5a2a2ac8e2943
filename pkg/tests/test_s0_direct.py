import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.interval import Interval
from artifact.mertens import build_mertens
from artifact.s0_direct import (SCANS, s0_brute_trace, s0_bruteforce, s0_exact_trace, s0_scan,
                                scan_mean, scan_values, smooth_part, value_at)

LIMIT = 2 * 10**5
TRACE = s0_scan(LIMIT, build_mertens(LIMIT))


def naive_mu(n):
    out, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    return -out if n > 1 else out


def naive_s0(X):
    sf = [(d, naive_mu(d)) for d in range(1, X + 1) if naive_mu(d)]
    return sum((Fraction(a * b * math.gcd(d, e), d * e) for d, a in sf for e, b in sf), Fraction(0))


@pytest.mark.parametrize("X,value", [(1, Fraction(1)), (2, Fraction(1, 2)), (5, Fraction(19, 30)),
                                     (10, Fraction(79, 210))])
def test_small_values(X, value):
    assert naive_s0(X) == value
    assert s0_bruteforce(X) == value
    assert s0_exact_trace(X)[X] == value


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 120))
def test_brute_against_naive(X):
    assert s0_bruteforce(X) == naive_s0(X)


def test_exact_recurrence_equals_brute_force():
    assert s0_exact_trace(1500) == s0_brute_trace(1500)


def test_float_scan_encloses_exact_values():
    ex = s0_exact_trace(2000)
    raw = s0_scan(2000, build_mertens(2000), exact_upto=0)
    assert all(raw.at(x).contains(ex[x]) for x in range(1, 2001))
    assert max(raw.err[1:2001]) < 1e-12


def test_bracket_values():
    # S_0(757) = 0.4453092302578...; 0.445 fails there and at 769, 781
    assert TRACE.at(757).lo > 0.44530923 and TRACE.at(757).hi < 0.44530924
    assert TRACE.violations_above(422, LIMIT, "0.445") == [757, 769, 781]
    assert TRACE.at(1321).lo > 0.44455
    assert TRACE.certify_upper(2, LIMIT, Fraction(19, 30))
    assert TRACE.certify_upper(6, LIMIT, Fraction(528, 1000))
    assert not TRACE.certify_upper(5, LIMIT, Fraction(528, 1000))
    assert TRACE.certify_nonneg(1, LIMIT)


def test_range_max_and_min():
    mx, arg, overlap = TRACE.range_max(422, LIMIT)
    assert arg == 757 and overlap == [757]
    mn = TRACE.range_min(422, LIMIT)
    assert 0.43 < mn.lo <= mn.hi < 0.44
    # past 1000 the trace stays above 0.437; the low point is S_0(1635) = 0.437963...
    assert 0.43796 < TRACE.range_min(1000, LIMIT).lo < 0.43797


def test_export_csv(tmp_path):
    path = tmp_path / "s0.csv"
    TRACE.export_csv(path, stride=50000)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["l", "s0_lo", "s0_hi"]
    assert [int(r[0]) for r in rows[1:]] == [1, 50001, 100001, 150001]
    assert not (tmp_path / "s0.csv.tmp").exists()


def test_scan_needs_table_range():
    with pytest.raises(ValueError):
        s0_scan(100, build_mertens(50))


def test_smooth_part():
    assert smooth_part(1) == []
    assert smooth_part(360) == [2, 3, 5]


@pytest.mark.parametrize("fn,literal", [("sigma1", "6.2359917454422"), ("sigma2", "3.16843122347233"),
                                        ("Sigma1", "2.06803754617859")])
def test_mean_value_maxima_at_42(fn, literal):
    for limit in (42, 1000, 10**5):
        r = scan_mean(fn, limit)
        assert r.argmax == 42
        assert r.contains_literal(literal)
    assert abs(value_at(fn, 42).mid / float(literal) - 1) < 1e-12


def test_aux_maxima_need_rounded_rho():
    assert scan_mean("aux2", 10**4).argmax == 6
    assert not scan_mean("aux2", 10**4).contains_literal("1.90380793763037")
    assert scan_mean("aux2", 10**4, rho=2.951).contains_literal("1.90380793763037")
    assert scan_mean("aux3", 10**4, rho=2.951).argmax == 2


def test_scan_values_are_prefix_sums():
    pref, err = scan_values("sigma1", 100)
    f = SCANS["sigma1"].local
    assert pref[1] == 1.0 and err[100] < 1e-12 * pref[100]
    assert pref[2] == pytest.approx(1 + f(np.array([2.0]), None)[0])


def test_log_scan_needs_offset():
    with pytest.raises(ValueError):
        scan_mean("K1", 100)
    r = scan_mean("K1", 1000, offset=Interval(0.7, 0.7))
    assert r.min is not None and r.argmin >= 1


def test_unknown_scan():
    with pytest.raises(KeyError):
        scan_values("nope", 10)
