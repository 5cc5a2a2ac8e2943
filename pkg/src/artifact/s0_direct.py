"""Direct computation of S_0(X) = sum_{d,e <= X} mu(d) mu(e) / [d, e].

Three routes are provided:

* ``s0_bruteforce`` / ``s0_brute_trace``: the double sum itself, exact;
* ``s0_exact_trace``: the recurrence over n | l^oo driven by exact m(t);
* ``s0_scan``: the same recurrence in double precision, compiled with numba,
  carrying a certified running error bound.

The module also hosts the maxima scanner for mean values
(1/X) sum_{l <= X} F(l) of multiplicative weights.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numba
import numpy as np

from .interval import Interval, add_down, add_up, fraction_down, fraction_up, vdown, vup
from .mertens import ExactMertens, MertensTable, build_exact, mobius_upto
from .sieves import G0_2, XI, factorize, g2_at_2, primes_upto, squarefree_product

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover
    mpz = int

UNIT = 2.0**-53
BRUTE_LIMIT = 3000
NBUF = 1 << 17


# exact routes ------------------------------------------------------------------

def s0_brute_trace(X: int) -> list[Fraction]:
    """[S_0(0), S_0(1), ..., S_0(X)] from the double sum, exactly.

    Uses S_0(l) - S_0(l-1) = mu(l)^2/l + 2 mu(l) sum_{m<l} mu(m) (l,m)/(l m)
    with integer numerators over P^2, P the product of the primes <= X."""
    if X > BRUTE_LIMIT:
        raise ValueError(f"brute force is limited to X <= {BRUTE_LIMIT}")
    mu = mobius_upto(max(X, 1)).tolist()
    P = mpz(math.prod(primes_upto(X).tolist()))
    cof = [mpz(0)] + [P // l if mu[l] else mpz(0) for l in range(1, X + 1)]
    sqf = [l for l in range(1, X + 1) if mu[l]]
    P2 = int(P) * int(P)
    acc = mpz(0)
    out = [Fraction(0)]
    for l in range(1, X + 1):
        if mu[l]:
            inner = mpz(0)
            for m in sqf:
                if m >= l:
                    break
                inner += mu[m] * math.gcd(l, m) * cof[m]
            acc += (P + 2 * mu[l] * inner) * cof[l]
        out.append(Fraction(int(acc), P2))
    return out


def s0_bruteforce(X: int) -> Fraction:
    if X < 1:
        return Fraction(0)
    return s0_brute_trace(X)[X]


def smooth_part(l: int) -> list[int]:
    return sorted(factorize(l)) if l > 1 else []


def _n_terms(primes: list[int], bound: int):
    """(n, prod_{p|n}(p-1), (-1)^omega(n)) for n <= bound with rad(n) | prod(primes).

    The recurrence weight of n is prod_{p|n}(1-p)/n = sign * second / n."""
    out = [(1, 1, 1)] if bound >= 1 else []
    for p in primes:
        for i in range(len(out)):
            n, ph, s = out[i]
            n, ph, s = n * p, ph * (p - 1), -s
            while n <= bound:
                out.append((n, ph, s))
                n *= p
    return out


def s0_exact_trace(limit: int, exact: ExactMertens | None = None) -> list[Fraction]:
    """[S_0(0), ..., S_0(limit)] from the recurrence with exact m(t).

    S_0(l) - S_0(l-1) = mu(l)^2/l + (2 mu(l)/l) sum_{n | l^oo, n < l}
    prod_{p|n}(1-p)/n * m((l-1)/n).  Values are accumulated over the common
    denominator L^2 P with L = lcm(1..limit), P the product of the primes <= limit."""
    if exact is None:
        exact = build_exact(max(limit, 1))
    if exact.limit < limit:
        raise ValueError("exact Mertens table too short")
    mu = mobius_upto(max(limit, 1)).tolist()
    L = mpz(math.lcm(*range(1, limit + 1)) if limit else 1)
    P = mpz(exact.den)
    num = exact.num
    acc = mpz(0)
    den = int(L * L * P)
    out = [Fraction(0)]
    for l in range(1, limit + 1):
        if mu[l]:
            J = mpz(0)
            for n, ph, s in _n_terms(smooth_part(l), l - 1):
                t = (l - 1) // n
                if t:
                    J += s * ph * (L // n) * num[t]
            acc += (L * P + 2 * mu[l] * J) * (L // l)
        out.append(Fraction(int(acc), den))
    return out


# float route -----------------------------------------------------------------

@numba.njit(cache=True)
def smallest_prime_factors(n):
    spf = np.zeros(n + 1, dtype=np.int32)
    for i in range(2, n + 1):
        if spf[i] == 0:
            for j in range(i, n + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@numba.njit(cache=True)
def _s0_kernel(m, m_err, mu, spf, limit):
    u = 2.0**-53
    grow = 1.0 + 1e-12
    S = np.zeros(limit + 1)
    E = np.zeros(limit + 1)
    nbuf = np.zeros(NBUF, dtype=np.int64)
    pbuf = np.zeros(NBUF, dtype=np.int64)
    sbuf = np.zeros(NBUF, dtype=np.int64)
    primes = np.zeros(16, dtype=np.int64)
    s = 0.0
    e = 0.0
    for l in range(1, limit + 1):
        if mu[l] == 0:
            S[l] = s
            E[l] = e
            continue
        r = 0
        x = l
        while x > 1:
            p = spf[x]
            primes[r] = p
            r += 1
            x //= p
        bound = l - 1
        cnt = 0
        if bound >= 1:
            nbuf[0] = 1
            pbuf[0] = 1
            sbuf[0] = 1
            cnt = 1
        for i in range(r):
            p = primes[i]
            c = cnt
            for j in range(c):
                n = nbuf[j] * p
                ph = pbuf[j] * (p - 1)
                sg = -sbuf[j]
                while n <= bound:
                    if cnt >= NBUF:
                        raise ValueError("divisor buffer overflow")
                    nbuf[cnt] = n
                    pbuf[cnt] = ph
                    sbuf[cnt] = sg
                    cnt += 1
                    n *= p
        inner = 0.0
        A = 0.0
        B = 0.0
        for j in range(cnt):
            n = nbuf[j]
            w = pbuf[j] / float(n)
            v = w * m[bound // n]
            if sbuf[j] > 0:
                inner += v
            else:
                inner -= v
            A += w
            B += abs(v)
        e_in = (A * m_err + (cnt + 4) * u * B) * grow
        incr = (1.0 + 2.0 * mu[l] * inner) / l
        s = s + incr
        e += (2.0 * e_in / l + 3.0 * u * (1.0 + 2.0 * abs(inner)) / l + u * abs(s)) * grow
        S[l] = s
        E[l] = e
    return S, E


@dataclass
class S0Trace:
    """S_0(l) ~ values[l] with |error| <= err[l] for 0 <= l <= limit.

    ``exact`` optionally holds S_0(0..k) as rationals; bounds use it where present."""
    limit: int
    values: np.ndarray
    err: np.ndarray
    exact: list[Fraction] | None = None

    @property
    def exact_upto(self) -> int:
        return len(self.exact) - 1 if self.exact else -1

    def at(self, l: int) -> Interval:
        if l <= self.exact_upto:
            return Interval.point(self.exact[l])
        v, e = float(self.values[l]), float(self.err[l])
        return Interval(add_down(v, -e), add_up(v, e))

    def lower(self) -> np.ndarray:
        out = vdown(self.values - self.err)
        if self.exact:
            out[: len(self.exact)] = [fraction_down(q) for q in self.exact]
        return out

    def upper(self) -> np.ndarray:
        out = vup(self.values + self.err)
        if self.exact:
            out[: len(self.exact)] = [fraction_up(q) for q in self.exact]
        return out

    def range_max(self, a: int, b: int) -> tuple[Interval, int, list[int]]:
        """Certified max of S_0 on integers [a, b], its argmax and the overlap set."""
        lo, hi = self.lower()[a:b + 1], self.upper()[a:b + 1]
        best_lo = float(lo.max())
        cand = np.nonzero(hi >= best_lo)[0] + a
        mids = self.values[cand]
        arg = int(cand[int(np.argmax(mids))])
        return Interval(best_lo, float(hi.max())), arg, cand.tolist()

    def range_min(self, a: int, b: int) -> Interval:
        lo, hi = self.lower()[a:b + 1], self.upper()[a:b + 1]
        return Interval(float(lo.min()), float(hi.min()))

    def violations_above(self, a: int, b: int, bound) -> list[int]:
        """Integers in [a, b] where S_0 <= bound cannot be certified."""
        bound = Fraction(bound)
        out = []
        k = self.exact_upto
        for l in range(a, min(b, k) + 1):
            if self.exact[l] > bound:
                out.append(l)
        if b > k:
            start = max(a, k + 1)
            hi = self.upper()[start:b + 1]
            out += (np.nonzero(hi > fraction_down(bound))[0] + start).tolist()
        return out

    def certify_upper(self, a: int, b: int, bound) -> bool:
        return not self.violations_above(a, b, bound)

    def certify_nonneg(self, a: int, b: int) -> bool:
        return bool(np.all(self.lower()[a:b + 1] >= 0.0))

    def export_csv(self, path: str | Path, stride: int = 1000) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["l", "s0_lo", "s0_hi"])
            for l in range(1, self.limit + 1, stride):
                iv = self.at(l)
                w.writerow([l, repr(iv.lo), repr(iv.hi)])
        tmp.replace(path)


def s0_scan(limit: int, table: MertensTable, exact_upto: int = 2000) -> S0Trace:
    """Float scan of the recurrence; the first ``exact_upto`` values are also
    computed exactly so that bounds attained with equality can be certified."""
    if table.limit < limit:
        raise ValueError(f"Mertens table covers {table.limit}, scan needs {limit}")
    m = table.dense()
    mu = mobius_upto(limit)
    spf = smallest_prime_factors(limit)
    S, E = _s0_kernel(m, table.err, mu, spf, limit)
    k = min(exact_upto, limit)
    exact = s0_exact_trace(k) if k > 0 else None
    return S0Trace(limit, S, E, exact)


# maxima of mean values -------------------------------------------------------

FACTOR_ERR = 2.0**-47  # relative error of one float local factor


@dataclass(frozen=True)
class ScanFn:
    name: str
    local: Callable[[np.ndarray, float], np.ndarray]
    norm: str  # mean, sqrt or log
    literal: str | None = None
    description: str = ""


def _g0(p):
    return np.where(p == 2, G0_2.mid, 1.0)


def _g2(p, rho):
    return np.where(p == 2, g2_at_2(Interval.point(rho) if rho is not None else None).mid, 1.0)


def _xi_ratio(p):
    px = p ** XI.mid
    return px / (px - 1.0)


def _half(p):
    return (p - 1.0) / (np.sqrt(p) - 1.0) ** 2


SCANS: dict[str, ScanFn] = {}


def _reg(s: ScanFn) -> None:
    SCANS[s.name] = s


_reg(ScanFn("sigma1", lambda p, r: _half(p), "mean", "6.2359917454422",
            "mu^2 phi / phi_{1/2}^2"))
_reg(ScanFn("sigma2", lambda p, r: _half(p) * _g0(p), "mean", "3.16843122347233",
            "mu^2 phi g0 / phi_{1/2}^2"))
_reg(ScanFn("Sigma1", lambda p, r: _half(p) * _g0(p) ** 2, "mean", "2.06803754617859",
            "mu^2 phi g0^2 / phi_{1/2}^2"))
_reg(ScanFn("aux2", lambda p, r: (p - 1.0) / p * _g0(p) * np.sqrt(p) / (np.sqrt(p) - 1.0)
            * _g2(p, r) * _xi_ratio(p), "mean", "1.90380793763037",
            "mu^2 phi / l [g0 sqrt(l)/phi_{1/2}] [g2 l^xi/phi_xi]"))
_reg(ScanFn("aux3", lambda p, r: (p - 1.0) / p * (_g2(p, r) * _xi_ratio(p)) ** 2, "mean",
            "2.67710025", "mu^2 phi / l [g2 l^xi/phi_xi]^2"))
_reg(ScanFn("Xi1", lambda p, r: (np.sqrt(p) + 1.0) / p, "sqrt", "2.2526506709",
            "mu^2 phi / (l phi_{1/2})"))
_reg(ScanFn("Xi2", lambda p, r: (np.sqrt(p) + 1.0) / p * _g0(p), "sqrt", "1.587160669",
            "mu^2 phi / l^{3/2} [g0 sqrt(l)/phi_{1/2}]"))
_reg(ScanFn("K1", lambda p, r: (p - 1.0) / p**2 * _g2(p, r) * _xi_ratio(p), "log", None,
            "mu^2 phi / l^2 [g2 l^xi/phi_xi]"))
_reg(ScanFn("K2", lambda p, r: (p - 1.0) / p**2 * (_g2(p, r) * _xi_ratio(p)) ** 2, "log", None,
            "mu^2 phi / l^2 [g2 l^xi/phi_xi]^2"))


@numba.njit(cache=True)
def _kahan_prefix(x):
    out = np.empty(x.size)
    s = 0.0
    c = 0.0
    for i in range(x.size):
        y = x[i] - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out


@dataclass
class ScanReport:
    fn_id: str
    limit: int
    argmax: int
    max: Interval
    overlap: list[int]
    checkpoints: dict[int, tuple[int, Interval]] = field(default_factory=dict)
    argmin: int | None = None
    min: Interval | None = None
    rho: float | None = None
    offset: Interval | None = None

    def contains_literal(self, literal: str, rel_tol: float = 1e-12) -> bool:
        x = float(literal)
        slack = rel_tol * abs(x)
        return self.max.lo - slack <= x <= self.max.hi + slack


def scan_values(fn_id: str, limit: int, rho: float | None = None):
    """Prefix sums sum_{l <= n} F(l) for n <= limit, with absolute error bounds."""
    if fn_id not in SCANS:
        raise KeyError(f"unregistered scan function {fn_id!r}; known: {sorted(SCANS)}")
    spec = SCANS[fn_id]
    ps = primes_upto(limit)
    vals, omega = squarefree_product(limit, lambda p: spec.local(p.astype(np.float64), rho), ps)
    vals[0] = 0.0
    pref = _kahan_prefix(vals)
    wmax = float(omega.max()) + 1.0
    # factor errors, Kahan's 2u plus the O(n u^2) term, on a nonnegative sum
    rel = wmax * FACTOR_ERR + 2 * UNIT + 2 * limit * UNIT * UNIT
    return pref, pref * rel * (1 + 1e-9)


def _checkpoints(limit: int) -> list[int]:
    out = [10**k for k in range(1, 20) if 10**k < limit]
    return out + [limit]


def scan_mean(fn_id: str, limit: int, rho: float | None = None,
              offset: Interval | None = None) -> ScanReport:
    """Maximum over integers X <= limit of the normalized mean value.

    ``mean``: S(X)/X, ``sqrt``: S(X)/sqrt(X); both step functions peak at
    integers.  ``log``: max of S(X) - c log X and min of S(X) - c log(X+1),
    the infimum over [X, X+1), with c = ``offset``."""
    spec = SCANS[fn_id]
    pref, perr = scan_values(fn_id, limit, rho)
    n = np.arange(1, limit + 1, dtype=np.float64)
    S, E = pref[1:], perr[1:]
    if spec.norm == "mean":
        lo, hi = vdown(vdown(S - E) / n), vup(vup(S + E) / n)
    elif spec.norm == "sqrt":
        lo, hi = vdown(vdown(S - E) / vup(np.sqrt(n))), vup(vup(S + E) / vdown(np.sqrt(n)))
    elif spec.norm == "log":
        if offset is None:
            raise ValueError("log-offset scans need the coefficient c")
        lgn_lo, lgn_hi = vdown(np.log(n), 4), vup(np.log(n), 4)
        lo = vdown(vdown(S - E) - vup(offset.hi * lgn_hi, 1), 1)
        hi = vup(vup(S + E) - vdown(offset.lo * lgn_lo, 1), 1)
    else:
        raise ValueError(f"unknown normalisation {spec.norm}")

    def best(b):
        seg_lo, seg_hi = lo[:b], hi[:b]
        L = float(seg_lo.max())
        cand = np.nonzero(seg_hi >= L)[0]
        mids = (seg_lo[cand] + seg_hi[cand]) / 2
        arg = int(cand[int(np.argmax(mids))]) + 1
        return arg, Interval(L, float(seg_hi.max())), (cand + 1).tolist()

    arg, mx, overlap = best(limit)
    rep = ScanReport(fn_id, limit, arg, mx, overlap[:64], rho=rho, offset=offset)
    for c in _checkpoints(limit):
        a, v, _ = best(c)
        rep.checkpoints[c] = (a, v)
    if spec.norm == "log":
        l1_lo, l1_hi = vdown(np.log(n + 1.0), 4), vup(np.log(n + 1.0), 4)
        mlo = vdown(vdown(S - E) - vup(offset.hi * l1_hi, 1), 1)
        mhi = vup(vup(S + E) - vdown(offset.lo * l1_lo, 1), 1)
        i = int(np.argmin(mhi))
        rep.argmin = i + 1
        rep.min = Interval(float(mlo.min()), float(mhi[i]))
    return rep


def value_at(fn_id: str, X: int, rho: float | None = None) -> Interval:
    """Normalized mean value at a single integer X (mean and sqrt scans)."""
    spec = SCANS[fn_id]
    pref, perr = scan_values(fn_id, X, rho)
    S, E = float(pref[X]), float(perr[X])
    num = Interval(add_down(S, -E), add_up(S, E))
    if spec.norm == "mean":
        return num / X
    if spec.norm == "sqrt":
        return num / Interval.point(X).sqrt()
    return num
