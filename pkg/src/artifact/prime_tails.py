"""Explicit prime-counting bounds and the tail functionals B_kappa(M),
C_kappa(M) that certify truncation of Euler products and prime sums."""

from __future__ import annotations

from fractions import Fraction

from .interval import Interval, coerce

DUSART_PI = Interval.exact(Fraction("2.53816"))
DUSART_THETA = Interval.exact(Fraction("0.2"))
THETA_THRESHOLD = 3_594_641
MIN_M = 10**5


def pi_upper(t) -> Interval:
    """Encloses (t/log t)(1 + 1/log t + 2.53816/log^2 t), an upper bound for pi(t)."""
    t = coerce(t)
    if t.lo <= 1:
        raise ValueError(f"pi_upper needs t > 1, got {t}")
    L = t.log()
    return t / L * (1 + 1 / L + DUSART_PI / L**2)


def _check_kappa(kappa) -> Interval:
    k = coerce(kappa)
    if k.lo <= 1:
        raise ValueError(f"kappa must exceed 1, got {k}")
    return k


def b_kappa(kappa, M: int, piM: int, *, verify: bool = False) -> Interval:
    """B_kappa(M), the majorant of sum_{p>M} p^-kappa built from pi_upper."""
    k = _check_kappa(kappa)
    if M < MIN_M:
        raise ValueError(f"M must be at least {MIN_M}, got {M}")
    if verify:
        from .sieves import prime_count
        if prime_count(M) != piM:
            raise ValueError(f"pi({M}) is {prime_count(M)}, not {piM}")
    Mi = Interval.point(M)
    L = Mi.log()
    main = k / ((k - 1) * Mi ** (k - 1) * L) * (1 + 1 / L + DUSART_PI / L**2)
    return main - Interval.point(piM) / Mi**k


def c_kappa(kappa, M: int, thetaM_floor: int) -> Interval:
    """C_kappa(M), the majorant of sum_{p>M} log p / p^kappa."""
    k = _check_kappa(kappa)
    if M <= THETA_THRESHOLD:
        raise ValueError(f"C_kappa needs M > {THETA_THRESHOLD}, got {M}")
    Mi = Interval.point(M)
    L = Mi.log()
    return (1 + DUSART_THETA / L**2) * k / ((k - 1) * Mi ** (k - 1)) - Interval.point(thetaM_floor) / Mi**k


def tail_factor(partial: Interval, b_M, B: Interval, kappa, M: int, sign: str) -> Interval:
    """Multiply a truncated product by the certified tail range.

    ``B`` is B_kappa(M); only its upper end is used.  ``sign`` is the sign
    of the local terms v_p for p > M: nonneg, nonpos or both."""
    if sign not in ("nonneg", "nonpos", "both"):
        raise ValueError(f"unknown sign {sign!r}")
    b = coerce(b_M)
    bB = b * Interval(max(B.hi, 0.0), max(B.hi, 0.0))
    lo = hi = 1.0
    if sign != "nonpos":
        hi = bB.exp().hi
    if sign != "nonneg":
        ratio = b / Interval.point(M) ** coerce(kappa)
        if ratio.hi >= 1:
            raise ValueError("negative tail terms need b_M / M^kappa < 1")
        lo = (-(bB / (1 - ratio))).exp().lo
    return partial * Interval(lo, hi)


def sum_tail(partial: Interval, c_M, C: Interval, sign: str) -> Interval:
    cC = coerce(c_M) * Interval(max(C.hi, 0.0), max(C.hi, 0.0))
    if sign == "nonneg":
        return partial + Interval(0.0, cC.hi)
    if sign == "nonpos":
        return partial + Interval(-cC.hi, 0.0)
    raise ValueError(f"unknown sign {sign!r}")


def true_tail_partial(kappa: float, M: int, upto: int) -> float:
    """sum_{M < p <= upto} p^-kappa in floating point, for sanity checks."""
    from .sieves import primes_upto
    ps = primes_upto(upto)
    ps = ps[ps > M].astype(float)
    return float((ps ** -kappa).sum())
