import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.interval import Interval
from artifact.mertens import (build_exact, build_mertens, check_log_bound, check_sqrt_bound,
                              lemma_coprime_extremes, m_q, m_q_direct, m_q_eps, mobius_upto,
                              smooth_numbers, squarefree_divisors, verify_recombination)

N = 20000
TABLE = build_mertens(N)


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


PREFIX = [Fraction(0)]
for _l in range(1, 3001):
    PREFIX.append(PREFIX[-1] + Fraction(naive_mu(_l), _l))


def test_mobius_matches_naive():
    mu = mobius_upto(2000)
    assert [int(x) for x in mu[1:]] == [naive_mu(n) for n in range(1, 2001)]


@pytest.mark.parametrize("q0", [1, 2, 6, 30])
def test_float_table_encloses_exact_prefix(q0):
    t = build_mertens(3000, q0)
    for x in (1, 2, 3, 10, 100, 997, 1000, 2999, 3000):
        assert t.m_interval(x).contains(PREFIX[x])


def test_known_values():
    assert TABLE.m(1) == 1.0
    assert TABLE.m_interval(100).contains(PREFIX[100])
    # m(100) = 0.0311315335...
    assert abs(TABLE.m(100) - 0.031131533529083183) < 1e-15
    assert TABLE.err < 1e-12


def test_dense_matches_pointwise():
    d = TABLE.dense()
    for x in (0, 1, 5, 6, 7, 1234, N):
        assert abs(d[x] - TABLE.m(x)) <= 1e-15


def test_m2_dense_is_odd_part():
    odd = [Fraction(0)]
    for l in range(1, 501):
        odd.append(odd[-1] + (Fraction(naive_mu(l), l) if l % 2 else 0))
    d = build_mertens(500).m2_dense()
    assert all(abs(d[x] - float(odd[x])) < 1e-13 for x in range(501))
    with pytest.raises(ValueError):
        build_mertens(500, q0=15).m2_dense()


def test_bad_parameters():
    with pytest.raises(ValueError):
        build_mertens(100, q0=4)
    with pytest.raises(ValueError):
        build_mertens(0)
    with pytest.raises(MemoryError):
        build_mertens(10**6, budget=1000)


def test_exact_table():
    ex = build_exact(3000)
    for x in (1, 17, 2999, Fraction(7, 2)):
        assert ex.m(x) == PREFIX[math.floor(x)]
    assert ex.m(0.5) == 0
    with pytest.raises(ValueError):
        ex.m(3001)


def test_recombination_exact():
    res = verify_recombination(N, 6, TABLE, stride=101)
    assert res["ok"] and res["first_failure"] is None
    assert res["max_float_gap"] <= TABLE.err


@given(st.integers(1, 400), st.sampled_from([1, 2, 3, 6, 10, 12, 30, 42, 210]))
@settings(max_examples=60, deadline=None)
def test_m_q_routes_agree(X, q):
    direct = m_q_direct(X, q)
    want = sum((Fraction(naive_mu(l), l) for l in range(1, X + 1) if math.gcd(l, q) == 1), Fraction(0))
    assert direct == want
    assert m_q(X, q, build_exact(400)).exact == want
    assert m_q(X, q, TABLE).enclosure.contains(want)


def test_m_q_eps_reduces_and_encloses():
    assert m_q_eps(50, 6, 0).exact == m_q_direct(50, 6)
    v = m_q_eps(200, 2, Fraction(1, 10))
    mu = mobius_upto(200)
    ref = math.fsum(mu[l] / l**1.1 for l in range(1, 201) if l % 2)
    assert v.lo <= ref <= v.hi and v.enclosure.width < 1e-12
    with pytest.raises(ValueError):
        m_q_eps(10, 1, Fraction(1, 5))


def test_smooth_numbers_and_divisors():
    assert smooth_numbers(6, 20) == [1, 2, 3, 4, 6, 8, 9, 12, 16, 18]
    assert smooth_numbers(1, 100) == [1]
    assert squarefree_divisors(12) == [1, 2, 3, 6]
    assert squarefree_divisors(30) == [1, 2, 3, 5, 6, 10, 15, 30]


def test_sqrt_bound_holds_with_equality_at_one():
    # |m(1)| = 1 = sqrt(2/2): the bound is attained on [1, 2)
    assert check_sqrt_bound(TABLE) == {"ok": True, "at": None}


def test_log_bound_reports_violations():
    assert not check_log_bound(TABLE, Interval(1e-6, 1e-6), 2)["ok"]
    good = check_log_bound(TABLE, Interval(1.0, 1.0), 2)
    assert good["ok"] and 0 < good["max_abs_m_times_log"] < 1.0


def test_coprime_extremes():
    lo, hi = lemma_coprime_extremes()
    assert (lo, hi) == (Fraction(-2323, 30030), Fraction(69, 455))
    assert float(hi) > 0.1516  # larger than the 0.1515 extreme quoted for these l

