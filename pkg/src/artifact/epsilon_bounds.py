"""Bounds for S_eps(X) with a small positive eps.

The two functionals Omega_1 (eps <= 1/R) and Omega_2 (1/R < eps <= 1/S)
combine the S_0 bound table with the eps-dependent correction terms; the
optimiser scans R for the crossing point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .bounds_pipeline import ConstantLedger, theta
from .interval import EULER_GAMMA, LOG10, Interval, coerce, sqrt
from .mertens import mobius_upto
from .sieves import primes_upto

UNIT = 2.0**-53
FACTOR_ERR = 2.0**-47  # relative error of one float local factor p^s - 1
BRUTE_LIMIT = 3000
T_GRR = Fraction(109, 10) * 10**8  # Grr's quadratic term needs T >= 10.9e8
EPS_MAX = Fraction(4, 25)
TABLE_CONFIGS = {  # (T, T0) -> {S: R} as chosen in the reference tables
    (422, 10**7): {25: 43, 50: 82, 100: 158},
    (10**7, 10**12): {25: 81, 50: 153, 100: 297},
    (10**12, 10**16): {25: 111, 50: 203, 100: 387},
    (10**16, 10**33): {25: 133, 50: 242, 100: 459},
    (10**33, math.inf): {25: 241, 50: 439, 100: 833},
}


def zeta_bounds(eps) -> Interval:
    """[1/eps, e^{gamma eps}/eps], which contains zeta(1 + eps)."""
    e = coerce(eps)
    if e.lo <= 0:
        raise ValueError("eps must be positive")
    if e.hi > 1:
        raise ValueError("eps must be at most 1")
    lo = 1 / e
    hi = (EULER_GAMMA * e).exp() / e
    return Interval(lo.lo, hi.hi)


# ---------------------------------------------------------------------------
# G(X; 1 + eps) = sum_{l <= X} mu^2(l) / phi_{1+eps}(l)

@numba.njit(cache=True)
def _g_segment(lo, hi, primes, fp, acc, comp):
    n = hi - lo + 1
    vals = np.ones(n)
    omega = np.zeros(n, np.int64)
    for i in range(primes.size):
        p = primes[i]
        if p > hi:
            break
        start = ((lo + p - 1) // p) * p
        for m in range(start, hi + 1, p):
            vals[m - lo] *= fp[i]
            omega[m - lo] += 1
        pp = p * p
        if pp <= hi:
            start = ((lo + pp - 1) // pp) * pp
            for m in range(start, hi + 1, pp):
                vals[m - lo] = 0.0
    wmax = 0
    for k in range(n):
        y = vals[k] - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        if omega[k] > wmax:
            wmax = omega[k]
    return acc, comp, wmax


def g_eps(X: int, eps, segment: int = 1 << 22) -> Interval:
    """Certified enclosure of G(X; 1 + eps), built segment by segment."""
    X = int(X)
    if X < 1:
        raise ValueError("X must be at least 1")
    e = float(eps)
    if not 0 <= e <= 1:
        raise ValueError("eps must lie in [0, 1]")
    ps = primes_upto(X)
    fp = 1.0 / (ps.astype(np.float64) ** (1.0 + e) - 1.0)
    acc, comp, wmax = 0.0, 0.0, 0
    lo = 1
    while lo <= X:
        hi = min(X, lo + segment - 1)
        acc, comp, w = _g_segment(lo, hi, ps, fp, acc, comp)
        wmax = max(wmax, w)
        lo = hi + 1
    # 8u more covers eps itself being rounded to a float
    err = acc * ((wmax + 1) * FACTOR_ERR + 10 * UNIT + 2 * X * UNIT * UNIT) * (1 + 1e-9)
    return Interval(acc - err, acc + err)


# ---------------------------------------------------------------------------
# the Omega functionals

def ind1(T0) -> int:
    return int(T0 > 10**12)


def ind2(T) -> int:
    return int(Fraction(T) >= T_GRR) if math.isfinite(T) else 1


def grr(e, T, value1: Interval, decay=None) -> Interval:
    """2e - 1{T >= 10.9e8} value1 e^2 / e^{2 gamma d}, with d = e unless given."""
    e = coerce(e)
    d = e if decay is None else coerce(decay)
    return 2 * e - ind2(T) * value1 * e * e / (2 * EULER_GAMMA * d).exp()


def mn1(e, T) -> Interval:
    return coerce(e).min(1 / Interval.point(T).log())


def mn2(e, T) -> Interval:
    return (2 * coerce(e)).min(1 / Interval.point(T).log())


@dataclass(frozen=True)
class AbCoefficients:
    """Scalar coefficients of the eps-expansion, taken as upper bounds."""
    theta_gap: Interval  # 3/100 loglemma1_1 / (1 + 12 log 10)
    k_ll1: Interval      # 3/100 loglemma1_1
    k_a: Interval        # 3/100 loglemma1_2 + ax_1
    k1: Interval
    k2: Interval
    q0: Interval
    q1: Interval
    q2: Interval
    q3: Interval
    value1: Interval
    ax_1: Interval
    ax_2: Interval
    subs: Interval
    c: Interval

    @classmethod
    def from_ledger(cls, led: ConstantLedger, ax_2: str = "ax_2") -> "AbCoefficients":
        up = {n: Interval(led[n].hi, led[n].hi) for n in led.entries}
        c = up["c"]
        a2, subs = up[ax_2], up["subs"]
        tx, txxx = up["THx_aux11"], up["THxxx_aux11"]
        r109, r47 = sqrt(Fraction(109, 10)), sqrt(47)
        f41 = Interval.exact("4.1")
        k_ll1 = Interval.exact("0.03") * up["loglemma1_1"]
        scale = (c + 1) * 10 / 109
        return cls(
            theta_gap=k_ll1 / (1 + 12 * LOG10),
            k_ll1=k_ll1,
            k_a=Interval.exact("0.03") * up["loglemma1_2"] + up["ax_1"],
            k1=a2 * tx * f41 / r109 + txxx * Fraction(5, 2) / r109 + subs * tx * f41 / r47
            + txxx * Fraction(5, 2) / r47,
            k2=a2 * txxx / 2 / r109 + subs * txxx / 2 / r47,
            q0=(1 + 1 / c) * Interval.exact("0.0009") * up["loglemma2"],
            q1=(Fraction(25, 4) * up["THx1"] + 5 * f41 * up["THx2"] + f41 * f41 * up["TH1"]) * scale,
            q2=(Fraction(10, 4) * up["THx1"] + f41 * up["THx2"]) * scale,
            q3=up["THx1"] * scale / 4,
            value1=up["value1"], ax_1=up["ax_1"], ax_2=a2, subs=subs, c=c)


def _check_bracket(T, T0):
    if T0 is not None and T0 <= T:
        raise ValueError("need T < T0")


def omega1(R: int, T, T0, led: ConstantLedger, ab: AbCoefficients | None = None) -> Interval:
    """Bound for S_eps(X) over eps in [0, 1/R] and T <= X < T0."""
    if R <= 0:
        raise ValueError("R must be positive")
    _check_bracket(T, T0)
    ab = ab or AbCoefficients.from_ledger(led)
    th = theta(T, T0, led)
    th = Interval(th.hi, th.hi)
    e = Interval.point(Fraction(1, R))
    two = Interval.point(2)
    i1 = ind1(math.inf if T0 is None else T0)
    p1 = th + ab.theta_gap * i1 + grr(e, T, ab.value1)
    p2 = mn2(e, T) * (ab.k_ll1 * i1 + ab.k1 * two.rpow(e) + ab.k2 * two.rpow(2 * e) * e)
    p3 = mn1(e, T) * 2 * ab.k_a
    p4 = mn2(e, T) * e / 2 * (ab.q0 + ab.q1 * two.rpow(2 * e) + ab.q2 * two.rpow(3 * e) * e
                              + ab.q3 * two.rpow(4 * e) * e * e)
    return p1 + p2 + p3 + p4


def omega2(R: int, S: int, T, T0, led: ConstantLedger, ab: AbCoefficients | None = None,
           variant: str = "display") -> Interval:
    """Bound for S_eps(X) over eps in (1/R, 1/S] and T <= X < T0.

    ``display`` follows the written formula.  ``sage`` reproduces the
    script that generated the reference tables: a doubled K_a term, 2^{1/S}
    on q1, 2^{4/10}/10^2 on q3 and e^{2 gamma/S} in the Grr term."""
    if R <= S:
        raise ValueError("omega2 needs R > S")
    if variant not in ("display", "sage"):
        raise ValueError(f"unknown variant {variant!r}")
    _check_bracket(T, T0)
    ab = ab or AbCoefficients.from_ledger(led)
    th = theta(T, T0, led)
    th = Interval(th.hi, th.hi)
    s = Interval.point(Fraction(1, S))
    two = Interval.point(2)
    logT = Interval.point(T).log()
    x1 = (-logT / R).exp()
    x2 = (-2 * logT / R).exp()
    i1 = ind1(math.inf if T0 is None else T0)
    sage = variant == "sage"
    q1 = x2 * th + ab.theta_gap * i1 + grr(s, T, ab.value1, None if sage else Fraction(1, 10))
    q2 = s * x1 * 2 * ab.k_a * (2 if sage else 1)
    q3 = 2 * s * x2 * (ab.k_ll1 * i1 + ab.k1 * two.rpow(s) + ab.k2 * two.rpow(2 * s) * s)
    if sage:
        tail = (ab.q1 * two.rpow(s) + ab.q2 * two.rpow(3 * s) * s
                + ab.q3 * two.rpow(Fraction(4, 10)) / 100)
    else:
        tail = (ab.q1 * two.rpow(2 * s) + ab.q2 * two.rpow(3 * s) * s
                + ab.q3 * two.rpow(4 * s) * s * s)
    q4 = s * s * x2 * (ab.q0 + tail)
    return q1 + q2 + q3 + q4


def optimize_r(S: int, T, T0, r_max: int, led: ConstantLedger, criterion: str = "min-max",
               variant: str = "display", ab: AbCoefficients | None = None) -> tuple[int, Interval]:
    """Scan R in (S, r_max]; return R* and max(Omega_1, Omega_2) there.

    ``min-max`` minimises the upper end of the max, ``min-gap`` the distance
    between the upper ends of the two functionals.  Ties go to the smaller R."""
    if S < 7:
        raise ValueError("S must be at least 7")
    if r_max < S + 1:
        raise ValueError("empty scan range")
    if criterion not in ("min-max", "min-gap"):
        raise ValueError(f"unknown criterion {criterion!r}")
    ab = ab or AbCoefficients.from_ledger(led)
    best, best_R, best_val = math.inf, None, None
    for R in range(S + 1, r_max + 1):
        o1 = omega1(R, T, T0, led, ab)
        o2 = omega2(R, S, T, T0, led, ab, variant)
        score = max(o1.hi, o2.hi) if criterion == "min-max" else abs(o1.hi - o2.hi)
        if score < best:
            best, best_R, best_val = score, R, o1.max(o2)
    return best_R, best_val


def omega_table(led: ConstantLedger, variant: str = "display", criterion: str = "min-max",
                r_max: int | None = None) -> list[dict]:
    """Recompute every (S, T, T0) cell: optimal R and the bound."""
    ab = AbCoefficients.from_ledger(led)
    rows = []
    for (T, T0), pairs in TABLE_CONFIGS.items():
        for S, R_ref in pairs.items():
            rm = r_max or max(2 * R_ref, S + 2)
            R, val = optimize_r(S, T, T0, rm, led, criterion, variant, ab)
            o1 = omega1(R_ref, T, T0, led, ab)
            o2 = omega2(R_ref, S, T, T0, led, ab, variant)
            rows.append({"S": S, "T": T, "T0": T0, "R": R, "lo": val.lo, "hi": val.hi,
                         "R_ref": R_ref, "ref_hi": max(o1.hi, o2.hi)})
    return rows


# ---------------------------------------------------------------------------
# direct oracle

def s_eps_bruteforce(X: int, eps) -> Interval:
    """Enclosure of sum_{d, e <= X} mu(d) mu(e) / [d, e]^{1+eps} by direct summation."""
    if X > BRUTE_LIMIT:
        raise ValueError(f"direct summation is limited to X <= {BRUTE_LIMIT}")
    if X < 1:
        return Interval(0.0, 0.0)
    e = float(eps)
    if e < 0:
        raise ValueError("eps must be nonnegative")
    mu = mobius_upto(X)
    idx = np.nonzero(mu[1:X + 1])[0] + 1
    sgn = mu[idx].astype(np.float64)
    total, absum = [], 0.0
    for d, sd in zip(idx.tolist(), sgn.tolist()):
        lcm = (d // np.gcd(d, idx)) * idx
        t = sd * sgn / lcm.astype(np.float64) ** (1.0 + e)
        total.append(math.fsum(t.tolist()))
        absum += float(np.abs(t).sum())
    s = math.fsum(total)
    # each term carries a few rounding errors of the power and division;
    # the row and final sums are exact up to their final rounding
    err = absum * 8 * UNIT + len(total) * UNIT * absum + abs(s) * UNIT
    return Interval(s - err, s + err)
