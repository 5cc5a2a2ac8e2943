"""Summatory functions of the Moebius function weighted by 1/l.

m(t) = sum_{l <= t} mu(l)/l is stored through its residue classes modulo a
small squarefree q0: for each a0 coprime to q0 the table keeps the prefix
sums m(t; a0, q0) at every l = a0 + q0 k, accumulated with Kahan summation.
m(t) itself is recovered from

    m(t) = sum_{d | q0} mu(d)/d * m_{q0}(t/d).

Small tables can also be built exactly over a common primorial denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numba
import numpy as np

from .interval import Interval, add_down, add_up, vdown, vup
from .sieves import build_tables, factorize, primes_upto

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover
    mpz = int

UNIT = 2.0**-53
TABLE_BUDGET = 1 << 28  # float64 entries


def squarefree_divisors(q: int) -> list[int]:
    ps = sorted(factorize(q)) if q > 1 else []
    out = []
    for r in range(len(ps) + 1):
        for c in combinations(ps, r):
            out.append(math.prod(c))
    return sorted(out)


def _mobius_small(n: int) -> int:
    f = factorize(n) if n > 1 else {}
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def mobius_upto(n: int) -> np.ndarray:
    """mu(0..n) as int8 with mu(0) = 0."""
    out = np.zeros(n + 1, dtype=np.int8)
    if n >= 1:
        out[1:] = build_tables(1, n).mu
    return out


@numba.njit(cache=True)
def _class_prefix(mu, q0, residues, K):
    out = np.zeros((residues.size, K))
    n = mu.size - 1
    for r in range(residues.size):
        s = 0.0
        c = 0.0
        for k in range(K):
            ell = residues[r] + q0 * k
            if 0 < ell <= n and mu[ell] != 0:
                y = mu[ell] / ell - c
                t = s + y
                c = (t - s) - y
                s = t
            out[r, k] = s
    return out


@dataclass(frozen=True)
class MertensTable:
    """Residue-class prefix sums of mu(l)/l up to ``limit``.

    ``err`` bounds the absolute error of every recombined m(t)."""
    q0: int
    limit: int
    residues: tuple[int, ...]
    classes: np.ndarray  # shape (len(residues), limit // q0 + 1)
    err: float

    def m_q0(self, t: int) -> float:
        """m_{q0}(t), the sum over l <= t coprime to q0."""
        if t < 1:
            return 0.0
        if t > self.limit:
            raise ValueError(f"t={t} beyond table limit {self.limit}")
        s = 0.0
        for r, a in enumerate(self.residues):
            if t >= a:
                s += self.classes[r, (t - a) // self.q0]
        return s

    def m(self, t) -> float:
        t = math.floor(t)
        return sum(_mobius_small(d) / d * self.m_q0(t // d) for d in squarefree_divisors(self.q0))

    def m_interval(self, t) -> Interval:
        v = self.m(t)
        return Interval(add_down(v, -self.err), add_up(v, self.err))

    def dense(self) -> np.ndarray:
        """m(t) for every integer 0 <= t <= limit (error at most ``err``)."""
        t = np.arange(self.limit + 1)
        mq = np.zeros(self.limit + 1)
        for r, a in enumerate(self.residues):
            ok = t >= a
            mq[ok] += self.classes[r, (t[ok] - a) // self.q0]
        out = np.zeros(self.limit + 1)
        for d in squarefree_divisors(self.q0):
            out += _mobius_small(d) / d * mq[t // d]
        return out

    def m2_dense(self) -> np.ndarray:
        """m_2(t) = sum over odd l <= t, for every t <= limit."""
        if self.q0 % 2:
            raise ValueError("odd q0 cannot separate the even integers")
        t = np.arange(self.limit + 1)
        mq = np.zeros(self.limit + 1)
        for r, a in enumerate(self.residues):
            ok = t >= a
            mq[ok] += self.classes[r, (t[ok] - a) // self.q0]
        out = np.zeros(self.limit + 1)
        for d in squarefree_divisors(self.q0 // 2):
            out += _mobius_small(d) / d * mq[t // d]
        return out


def build_mertens(limit: int, q0: int = 6, budget: int = TABLE_BUDGET) -> MertensTable:
    if q0 < 1 or q0 > 30 or _mobius_small(q0) == 0:
        raise ValueError(f"q0 must be squarefree and at most 30, got {q0}")
    if limit < 1:
        raise ValueError("limit must be positive")
    residues = tuple(a for a in range(q0) if math.gcd(a, q0) == 1)
    K = limit // q0 + 1
    if K * len(residues) > budget:
        raise MemoryError(f"{K * len(residues)} table entries exceed budget {budget}")
    mu = mobius_upto(limit)
    classes = _class_prefix(mu, q0, np.array(residues, dtype=np.int64), K)
    classes.setflags(write=False)
    # each class: rounding of 1/l plus Kahan's 2u bound, over sum |terms| <= H_limit;
    # the recombination adds a few roundings of values of size <= 2
    harm = math.log(limit) + 1.0
    ndiv = len(squarefree_divisors(q0))
    per_class = (4 * UNIT + 2 * limit * UNIT * UNIT) * harm
    err = ndiv * (len(residues) * per_class + 8 * UNIT * 2)
    return MertensTable(q0, limit, residues, classes, err)


# exact route ------------------------------------------------------------------

@dataclass(frozen=True)
class ExactMertens:
    """m(t) = num[t] / den exactly, den the product of the primes <= limit."""
    limit: int
    den: int
    num: tuple

    def m(self, t) -> Fraction:
        t = math.floor(t)
        if t < 1:
            return Fraction(0)
        if t > self.limit:
            raise ValueError(f"t={t} beyond exact table limit {self.limit}")
        return Fraction(int(self.num[t]), self.den)


def build_exact(limit: int) -> ExactMertens:
    if limit > 20000:
        raise MemoryError("exact tables are kept below 2*10^4; use verify_recombination for more")
    mu = mobius_upto(limit).tolist()
    P = mpz(math.prod(primes_upto(limit).tolist()))
    acc = mpz(0)
    num = [acc]
    for ell in range(1, limit + 1):
        if mu[ell]:
            acc = acc + mu[ell] * (P // ell)
        num.append(acc)
    return ExactMertens(limit, int(P), tuple(num))


def verify_recombination(limit: int, q0: int = 6, table: MertensTable | None = None,
                         stride: int = 997) -> dict:
    """Exact check of the residue-class recombination for every t <= limit.

    Numerators over den = product of primes <= limit are streamed with one
    cursor per divisor d of q0.  When a float table is supplied its m(t) is
    also compared with the exact value at every ``stride``-th t; the
    largest absolute gap is reported."""
    mu = mobius_upto(limit).tolist()
    P = mpz(math.prod(primes_upto(limit).tolist()))
    divs = squarefree_divisors(q0)
    weight = {d: _mobius_small(d) * (q0 // d) for d in divs}
    coprime = [bool(mu[l]) and math.gcd(l, q0) == 1 for l in range(limit + 1)]
    pos = {d: 0 for d in divs}
    rec = mpz(0)  # q0 * den * (recombined m)
    direct = mpz(0)  # q0 * den * m
    worst = 0.0
    for t in range(1, limit + 1):
        for d in divs:
            while pos[d] < t // d:
                pos[d] += 1
                ell = pos[d]
                if coprime[ell]:
                    rec += weight[d] * mu[ell] * (P // ell)
        if mu[t]:
            direct += q0 * mu[t] * (P // t)
        if rec != direct:
            return {"ok": False, "first_failure": t, "limit": limit, "max_float_gap": worst}
        if table is not None and (t % stride == 0 or t == limit):
            exact = int(direct) / (int(P) * q0)  # correctly rounded
            gap = abs(table.m(t) - exact)
            worst = max(worst, float(gap))
            if gap > table.err + math.ulp(exact):
                return {"ok": False, "first_failure": t, "limit": limit, "max_float_gap": worst}
    return {"ok": True, "first_failure": None, "limit": limit, "max_float_gap": worst}


# m_q -----------------------------------------------------------------------------

@dataclass(frozen=True)
class MqValue:
    exact: Fraction | None
    enclosure: Interval

    @property
    def lo(self) -> float:
        return self.enclosure.lo

    @property
    def hi(self) -> float:
        return self.enclosure.hi


def _exact_value(v: Fraction) -> MqValue:
    return MqValue(v, Interval.point(v))


def smooth_numbers(q: int, X) -> list[int]:
    """All k <= X whose prime factors divide q, by DFS over exponent vectors."""
    ps = sorted(factorize(q)) if q > 1 else []
    out = []

    def walk(i, k):
        if i == len(ps):
            out.append(k)
            return
        while k <= X:
            walk(i + 1, k)
            k *= ps[i]
    walk(0, 1)
    return sorted(out)


def m_q_direct(X, q: int) -> Fraction:
    t = math.floor(X)
    if t < 1:
        return Fraction(0)
    mu = mobius_upto(t).tolist()
    return sum((Fraction(mu[l], l) for l in range(1, t + 1) if mu[l] and math.gcd(l, q) == 1),
               Fraction(0))


def m_q(X, q: int, source: MertensTable | ExactMertens | None = None) -> MqValue:
    """m_q(X) = sum_{l <= X, (l, q) = 1} mu(l)/l.

    Without ``source`` the sum is exact; otherwise m_q(X) = sum_{k | q^oo} m(X/k)/k."""
    if X < 0:
        raise ValueError("X must be nonnegative")
    if q < 1:
        raise ValueError("q must be positive")
    if source is None:
        return _exact_value(m_q_direct(X, q))
    ks = smooth_numbers(q, X)
    if isinstance(source, ExactMertens):
        return _exact_value(sum((source.m(Fraction(X) / k) / k for k in ks), Fraction(0)))
    lo = hi = 0.0
    for k in ks:
        v = source.m_interval(math.floor(X / k)) / k if k > 1 else source.m_interval(math.floor(X))
        lo, hi = add_down(lo, v.lo), add_up(hi, v.hi)
    return MqValue(None, Interval(lo, hi))


def m_q_eps(X, q: int, eps) -> MqValue:
    """m_q(X; 1+eps) by direct summation."""
    eps_f = Fraction(eps)
    if eps_f < 0 or eps_f > Fraction(4, 25):
        raise ValueError("eps must lie in [0, 4/25]")
    if eps_f == 0:
        return m_q(X, q)
    t = math.floor(X)
    if t < 1:
        return _exact_value(Fraction(0))
    mu = mobius_upto(t)
    ell = np.arange(1, t + 1)
    keep = (mu[1:] != 0) & (np.gcd(ell, q) == 1)
    ell, sgn = ell[keep].astype(float), mu[1:][keep].astype(float)
    s = Interval.point(1) + Interval.point(eps_f)
    logs_lo, logs_hi = vdown(np.log(ell), 4), vup(np.log(ell), 4)
    tlo = np.where(ell == 1, 1.0, vdown(np.exp(-s.hi * logs_hi), 6))
    thi = np.where(ell == 1, 1.0, vup(np.exp(-s.lo * logs_lo), 6))
    pos = sgn > 0
    lo_terms = np.where(pos, tlo, -thi)
    hi_terms = np.where(pos, thi, -tlo)
    lo = math.nextafter(math.fsum(lo_terms.tolist()), -math.inf)
    hi = math.nextafter(math.fsum(hi_terms.tolist()), math.inf)
    return MqValue(None, Interval(lo, hi))


# desk checks of the explicit bounds --------------------------------------------

def _exact_prefix(limit: int) -> list[Fraction]:
    mu = mobius_upto(limit).tolist()
    out = [Fraction(0)]
    for l in range(1, limit + 1):
        out.append(out[-1] + Fraction(mu[l], l) if mu[l] else out[-1])
    return out


def check_sqrt_bound(table: MertensTable, exact_upto: int = 2000) -> dict:
    """|m(X)| <= sqrt(2/X) for 0 < X <= limit.

    On [k, k+1) the worst case is |m(k)| against sqrt(2/(k+1)); equality at
    k = 1 forces exact arithmetic for small k."""
    n = min(exact_upto, table.limit)
    ex = _exact_prefix(n)
    for k in range(1, n + 1):
        if ex[k] * ex[k] * (k + 1) > 2:
            return {"ok": False, "at": k}
    if table.limit > n:
        k = np.arange(n + 1, table.limit + 1)
        m = np.abs(table.dense()[n + 1:]) + table.err
        cap = vdown(np.sqrt(vdown(2.0 / (k + 1.0))), 2)
        bad = np.nonzero(m > cap)[0]
        if bad.size:
            return {"ok": False, "at": int(k[bad[0]])}
    return {"ok": True, "at": None}


def check_log_bound(table: MertensTable, H: Interval, start: int, which: str = "m") -> dict:
    """|m(X)| <= H/log X (or the same for m_2) for start <= X <= limit."""
    vals = table.dense() if which == "m" else table.m2_dense()
    k = np.arange(start, table.limit + 1)
    m = np.abs(vals[start:]) + table.err
    cap = vdown(H.lo / vup(np.log(k + 1.0), 4))
    bad = np.nonzero(m > cap)[0]
    worst = float(np.max(m * np.log(k + 1.0))) if k.size else 0.0
    return {"ok": not bad.size, "at": int(k[bad[0]]) if bad.size else None,
            "max_abs_m_times_log": worst}


def lemma_coprime_extremes(t_lo: float = 10.9, t_hi: int = 47,
                           special: tuple[int, ...] = (1, 11, 13, 17)) -> tuple[Fraction, Fraction]:
    """Exact min of m_l(t) over t_lo < t < t_hi and squarefree l whose part
    built from primes below t_hi is not in ``special``, and the max over the rest.

    Only gcd(l, prod_{p < t_hi} p) matters, so l runs over those divisors."""
    ps = primes_upto(t_hi - 1).tolist()
    ts = range(math.floor(t_lo), t_hi)  # floor(t) for t in (t_lo, t_hi)
    mu = mobius_upto(t_hi).tolist()
    lo, hi = None, None
    for r in range(len(ps) + 1):
        for c in combinations(ps, r):
            g = math.prod(c)
            s = Fraction(0)
            vals = {}
            for l in range(1, t_hi):
                if mu[l] and math.gcd(l, g) == 1:
                    s += Fraction(mu[l], l)
                vals[l] = s
            seq = [vals[t] for t in ts]
            if g in special:
                v = max(seq)
                hi = v if hi is None else max(hi, v)
            else:
                v = min(seq)
                lo = v if lo is None else min(lo, v)
    return lo, hi
