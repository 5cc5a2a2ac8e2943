import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import sieves
from artifact.sieves import (G0_2, G2_2, H1, H2, RHO, XI, build_tables, eval_g, eval_phi_s,
                             eval_sigma_s, factorize, g2_at_2, iter_segments, load_tables,
                             primes_upto, save_tables, squarefree_product, theta_floor)


def naive_factor(n):
    out, d = {}, 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def naive_mu(n):
    f = naive_factor(n)
    return 0 if any(e > 1 for e in f.values()) else (-1) ** len(f)


def naive_phi(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def test_primes_small():
    assert primes_upto(1).size == 0
    assert primes_upto(2).tolist() == [2]
    assert primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_prime_counts():
    assert sieves.prime_count(10**6) == 78498
    assert sieves.prime_count(10**7) == 664579


def test_theta_at_a_million():
    # theta(10^6) = 998484.175...
    assert theta_floor(10**6) == 998484
    th = sieves.theta_enclosure(10**6)
    assert th.lo < 998484.17503 and th.hi > 998484.17502
    assert th.width < 1e-6


@pytest.mark.parametrize("lo,hi", [(1, 500), (9990, 10200), (2**20 - 7, 2**20 + 300)])
def test_tables_match_naive(lo, hi):
    t = build_tables(lo, hi)
    for n in range(lo, hi + 1, 7):
        assert t.mu_of(n) == naive_mu(n)
        assert t.mask_of(n) == {p for p in naive_factor(n) if p in sieves.SMALL_PRIMES}
    for n in range(lo, min(hi, lo + 60) + 1):
        assert t.phi_of(n) == naive_phi(n)
    assert t.primes.tolist() == [p for p in range(max(lo, 2), hi + 1) if naive_factor(p) == {p: 1}]


def test_table_guards():
    with pytest.raises(ValueError):
        build_tables(0, 10)
    with pytest.raises(MemoryError):
        build_tables(1, 100, budget=10)
    with pytest.raises(IndexError):
        build_tables(1, 10).mu_of(11)


def test_segments_agree_with_monolithic():
    whole = build_tables(1, 5000)
    parts = list(iter_segments(1, 5000, size=777))
    assert np.array_equal(np.concatenate([p.mu for p in parts]), whole.mu)
    assert np.array_equal(np.concatenate([p.phi for p in parts]), whole.phi)


def test_cache_roundtrip(tmp_path):
    t = build_tables(100, 2000)
    save_tables(t, tmp_path / "t.bin")
    u = load_tables(tmp_path / "t.bin")
    assert (u.lo, u.hi) == (100, 2000)
    assert np.array_equal(u.mu, t.mu) and np.array_equal(u.phi, t.phi) and np.array_equal(u.mask, t.mask)
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        load_tables(tmp_path / "bad.bin")


@given(st.integers(1, 10**9))
def test_factorize_roundtrip(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f.items()) == n
    assert all(naive_factor(p) == {p: 1} for p in f)


def test_weights_at_two():
    mpmath.mp.prec = 120
    inside = lambda iv, v: mpmath.mpf(iv.lo) <= v <= mpmath.mpf(iv.hi)
    xi = 1 - 1 / (12 * mpmath.log(10))
    assert inside(XI, xi)
    assert inside(G0_2, mpmath.sqrt(3) * (mpmath.sqrt(2) - 1) / 2)
    rho = mpmath.mpf("0.0296") / mpmath.mpf("0.010032")
    assert inside(RHO, rho)
    assert inside(G2_2, rho * (1 - 2 ** -xi))
    assert H1.contains(Fraction("0.010032")) and H2.contains(Fraction("0.0296"))
    assert g2_at_2(2.951).hi > G2_2.hi
    assert eval_g(6, "g0") == G0_2 and eval_g(15, "g2") == sieves.Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        eval_g(4, "g1")


@given(st.integers(1, 5000))
def test_phi_sigma_at_one(q):
    f = naive_factor(q)
    assert eval_phi_s(q, 1).contains(math.prod(p**(e - 1) * (p - 1) for p, e in f.items()))
    assert eval_sigma_s(q, 1).contains(q * math.prod(Fraction(p + 1, p) for p in f))


def test_sigma_one_is_squarefree_kernel_sum():
    # sigma_1 as defined is q prod (1 + 1/p): 12 -> 12 * 3/2 * 4/3 = 24
    assert eval_sigma_s(12, 1).contains(24)
    assert eval_phi_s(12, 1).contains(4)


@settings(max_examples=20)
@given(st.integers(2, 3000))
def test_squarefree_product(N):
    vals, omega = squarefree_product(N, lambda p: 1.0 / p)
    for n in range(1, N + 1, max(1, N // 50)):
        f = naive_factor(n)
        want = 0.0 if any(e > 1 for e in f.values()) else 1.0 / n
        assert math.isclose(vals[n], want, rel_tol=1e-14)
        if want:
            assert omega[n] == len(f)
