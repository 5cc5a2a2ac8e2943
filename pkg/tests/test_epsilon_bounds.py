import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.epsilon_bounds import (TABLE_CONFIGS, AbCoefficients, g_eps, grr, ind1, ind2, mn1, mn2,
                                     omega1, omega2, omega_table, optimize_r, s_eps_bruteforce,
                                     zeta_bounds)
from artifact.interval import Interval
from artifact.mertens import mobius_upto
from artifact.s0_direct import s0_bruteforce
from artifact.sieves import squarefree_product


@pytest.fixture(scope="module")
def ab(pinned_ledger):
    return AbCoefficients.from_ledger(pinned_ledger)


@settings(max_examples=50)
@given(st.floats(1e-4, 1.0))
def test_zeta_bounds_contain_zeta(eps):
    z = zeta_bounds(eps)
    assert z.lo <= mpmath.zeta(1 + mpmath.mpf(eps)) <= z.hi


def test_zeta_bounds_domain():
    with pytest.raises(ValueError):
        zeta_bounds(0)
    with pytest.raises(ValueError):
        zeta_bounds(1.5)


@pytest.mark.parametrize("X,eps", [(1, 0.1), (100, 0.0), (5000, 0.1), (30000, 0.04)])
def test_g_eps_against_direct_sum(X, eps):
    v, _ = squarefree_product(X, lambda p: 1.0 / (p ** (1 + eps) - 1.0))
    ref = math.fsum(v[1:].tolist())
    g = g_eps(X, eps)
    assert g.lo - 1e-13 * ref <= ref <= g.hi + 1e-13 * ref


def test_g_eps_segments_agree():
    a = g_eps(10**5, 0.1)
    b = g_eps(10**5, 0.1, segment=999)
    assert a.lo <= b.hi and b.lo <= a.hi


def test_g_eps_reference_value():
    # G(10^6; 1.1) = 8.23802...
    v = g_eps(10**6, 0.1)
    assert 8.2380 < v.lo <= v.hi < 8.2381


def test_indicators():
    assert ind1(10**12) == 0 and ind1(10**16) == 1
    assert ind2(10**7) == 0 and ind2(10**12) == 1 and ind2(math.inf) == 1
    assert mn1(0.01, 10**7).hi == pytest.approx(0.01)
    assert mn2(0.1, 10**7).hi == pytest.approx(1 / math.log(10**7))


def test_grr_switches_at_threshold():
    v = Interval(9.1, 9.1)
    assert grr(Fraction(1, 25), 10**7, v).contains(Fraction(2, 25))
    assert grr(0.04, 10**12, v).hi < 0.08


def test_omega_monotone_in_r(pinned_ledger, ab):
    a = omega1(43, 422, 10**7, pinned_ledger, ab)
    b = omega1(200, 422, 10**7, pinned_ledger, ab)
    assert b.hi < a.hi
    with pytest.raises(ValueError):
        omega1(0, 422, 10**7, pinned_ledger, ab)
    with pytest.raises(ValueError):
        omega1(43, 10**7, 422, pinned_ledger, ab)


def test_omega2_variants_differ(pinned_ledger, ab):
    d = omega2(43, 25, 422, 10**7, pinned_ledger, ab, "display")
    s = omega2(43, 25, 422, 10**7, pinned_ledger, ab, "sage")
    assert d.hi != s.hi
    with pytest.raises(ValueError):
        omega2(43, 25, 422, 10**7, pinned_ledger, ab, "other")


def test_optimizer_cell_33(pinned_ledger, ab):
    R, val = optimize_r(25, 10**33, math.inf, 600, pinned_ledger, "min-gap", "sage", ab)
    assert R == 241
    assert 0.5098 < val.hi < 0.5099
    with pytest.raises(ValueError):
        optimize_r(5, 422, 10**7, 100, pinned_ledger)
    with pytest.raises(ValueError):
        optimize_r(25, 422, 10**7, 20, pinned_ledger)
    with pytest.raises(ValueError):
        optimize_r(25, 422, 10**7, 100, pinned_ledger, "best")


def test_omega_table_reference_pairs(pinned_ledger):
    rows = omega_table(pinned_ledger, "sage", "min-gap")
    assert len(rows) == 15 == sum(len(v) for v in TABLE_CONFIGS.values())
    assert all(r["R"] == r["R_ref"] for r in rows)
    assert all(r["lo"] <= r["hi"] for r in rows)


def test_brute_s_eps_at_zero_is_s0():
    assert s_eps_bruteforce(500, 0).contains(s0_bruteforce(500))
    with pytest.raises(ValueError):
        s_eps_bruteforce(3001, 0.01)


def test_brute_s_eps_small_case():
    # X = 2: 1 - 2 * 2^-(1+e) + 2^-(1+e)
    e = 0.03
    v = s_eps_bruteforce(2, e)
    assert v.lo <= 1 - mpmath.mpf(2) ** -(1 + mpmath.mpf(e)) <= v.hi


def test_brute_s_eps_nonneg_and_dominated(pinned_ledger, ab):
    bound = max(omega1(43, 422, 10**7, pinned_ledger, ab).hi,
                omega2(43, 25, 422, 10**7, pinned_ledger, ab).hi)
    rng = random.Random(11)
    for _ in range(12):
        X, e = rng.randint(422, 1500), rng.uniform(0, 1 / 25)
        v = s_eps_bruteforce(X, e)
        assert 0 <= v.lo and v.hi <= bound


def test_s_eps_vectorized_matches_loop():
    X, e = 60, 0.02
    mu = mobius_upto(X)
    ref = math.fsum(int(mu[d]) * int(mu[k]) / (d * k // math.gcd(d, k)) ** (1 + e)
                    for d in range(1, X + 1) for k in range(1, X + 1) if mu[d] and mu[k])
    v = s_eps_bruteforce(X, e)
    assert v.lo - 1e-13 <= ref <= v.hi + 1e-13
    assert np.isfinite(v.hi)
