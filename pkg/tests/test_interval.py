import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from artifact import interval as ivm
from artifact.interval import (EULER_GAMMA, LOG2, LOG10, PI, SQRT2, Interval, IntervalDomainError,
                               decimal_text, lower, report, upper)

mpmath.mp.prec = 200

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-12, max_value=1e12)


def intervals(elems=finite):
    return st.tuples(elems, elems).map(lambda t: Interval(min(t), max(t)))


def members(x: Interval):
    return st.floats(min_value=x.lo, max_value=x.hi) if x.lo < x.hi else st.just(x.lo)


def test_constants_contain_high_precision_values():
    for iv, ref in ((EULER_GAMMA, mpmath.euler), (PI, mpmath.pi), (LOG2, mpmath.log(2)),
                    (LOG10, mpmath.log(10)), (SQRT2, mpmath.sqrt(2))):
        assert mpmath.mpf(iv.lo) <= ref <= mpmath.mpf(iv.hi)
        assert iv.width <= 4 * math.ulp(iv.hi)


def test_exact_decimal_is_tight():
    x = Interval.exact("0.1")
    assert x.lo < x.hi
    assert x.contains(Fraction(1, 10))
    assert Interval.exact(3) == Interval(3.0, 3.0)


def test_around_and_hull():
    x = Interval.around("2", "0.5")
    assert x == Interval(1.5, 2.5)
    assert Interval.hull_of(1, Interval(-2, 0), 5.0) == Interval(-2.0, 5.0)


def test_empty_and_nan_rejected():
    with pytest.raises(IntervalDomainError):
        Interval(1.0, 0.0)
    with pytest.raises(IntervalDomainError):
        Interval(math.nan, 1.0)


def test_domain_errors():
    with pytest.raises(IntervalDomainError):
        Interval(-1.0, 1.0).log()
    with pytest.raises(IntervalDomainError):
        Interval(-1.0, 1.0).sqrt()
    with pytest.raises(IntervalDomainError):
        1 / Interval(-1.0, 1.0)
    with pytest.raises(IntervalDomainError):
        Interval(-2.0, 3.0).rpow(0.5)
    with pytest.raises(IntervalDomainError):
        Interval(-1.0, 0.0).log1p()


def test_even_power_across_zero():
    assert (Interval(-3.0, 2.0) ** 2) == Interval(0.0, 9.0)
    assert (Interval(-3.0, -2.0) ** 3).contains(-27)
    assert (Interval(2.0, 4.0) ** -1).contains(Fraction(1, 3))


def test_rpow_zero_base():
    z = Interval(0.0, 4.0).rpow(0.5)
    assert z.lo == 0.0 and z.contains(2)


@settings(max_examples=300)
@given(intervals(), intervals(), st.data())
def test_field_ops_contain_exact_results(a, b, data):
    x, y = data.draw(members(a)), data.draw(members(b))
    X, Y = Fraction(x), Fraction(y)
    assert (a + b).contains(X + Y)
    assert (a - b).contains(X - Y)
    assert (a * b).contains(X * Y)
    if not b.contains(0):
        assert (a / b).contains(X / Y)


@settings(max_examples=300)
@given(intervals(positive), st.data())
def test_transcendentals_contain_reference(a, data):
    x = mpmath.mpf(data.draw(members(a)))
    inside = lambda z, v: mpmath.mpf(z.lo) <= v <= mpmath.mpf(z.hi)
    assert inside(a.sqrt(), mpmath.sqrt(x))
    assert inside(a.log(), mpmath.log(x))
    assert inside(a.log1p(), mpmath.log1p(x))
    if a.hi < 700:
        assert inside(a.exp(), mpmath.exp(x))


@settings(max_examples=200)
@given(st.floats(0.01, 100), st.floats(-4, 4))
def test_rpow_contains_reference(x, e):
    z = Interval(x, x).rpow(e)
    v = mpmath.mpf(x) ** mpmath.mpf(e)
    assert mpmath.mpf(z.lo) <= v <= mpmath.mpf(z.hi)


@given(intervals(), intervals())
def test_max_min_hull(a, b):
    assert a.max(b).hi == max(a.hi, b.hi)
    assert a.min(b).lo == min(a.lo, b.lo)
    h = a.hull(b)
    assert h.contains(a) and h.contains(b)


def test_decimal_reporting_rounds_outward():
    x = Interval(0.12341, 0.12349)
    assert report(x) == (0.1234, 0.1235)
    assert decimal_text(0.59751334145858, 4, "up") == "0.5976"
    assert decimal_text(0.59751334145858, 4, "down") == "0.5975"
    assert upper(0.5, 4) == 0.5 and lower(-0.00001, 4) == -0.0001


@given(st.floats(-1e6, 1e6), st.integers(0, 12))
def test_rounded_bounds_enclose(x, d):
    assert ivm.round_down(x, d) <= x <= ivm.round_up(x, d)
    assert abs(ivm.trunc(x, d)) <= abs(x)


def test_directed_primitives():
    assert ivm.add_down(0.1, 0.2) < ivm.add_up(0.1, 0.2)
    assert Fraction(ivm.mul_down(0.1, 0.1)) <= Fraction(0.1) ** 2 <= Fraction(ivm.mul_up(0.1, 0.1))
    assert Fraction(ivm.div_down(1.0, 3.0)) <= Fraction(1, 3) <= Fraction(ivm.div_up(1.0, 3.0))
    assert ivm.sqrt_down(2.0) ** 2 <= 2.0 or ivm.sqrt_down(2.0) < ivm.sqrt_up(2.0)
