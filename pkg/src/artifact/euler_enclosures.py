"""Certified Euler products and prime sums for declaratively specified local
factors, with truncation tails from :mod:`artifact.prime_tails`.

Local factors are small expression trees over the prime ``p`` and the
exponent ``xi``.  The same tree is evaluated either on a scalar
:class:`Interval` or, vectorised, on (lo, hi) numpy arrays over a block of
primes.  Products are accumulated as sums of log1p, reduced with
``math.fsum`` so the result does not depend on the order of the primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .interval import TRANSCENDENTAL_ULPS, Interval, coerce, vdown, vup
from .prime_tails import THETA_THRESHOLD, b_kappa, c_kappa, sum_tail, tail_factor
from .sieves import XI, primes_upto, theta_floor

BLOCK = 1 << 20


# expression trees ------------------------------------------------------------

class Expr:
    def __add__(self, o): return Node("add", self, wrap(o))
    def __radd__(self, o): return Node("add", wrap(o), self)
    def __sub__(self, o): return Node("sub", self, wrap(o))
    def __rsub__(self, o): return Node("sub", wrap(o), self)
    def __mul__(self, o): return Node("mul", self, wrap(o))
    def __rmul__(self, o): return Node("mul", wrap(o), self)
    def __truediv__(self, o): return Node("div", self, wrap(o))
    def __rtruediv__(self, o): return Node("div", wrap(o), self)
    def __pow__(self, o): return Node("pow", self, wrap(o))
    def __neg__(self): return Node("sub", Const(Fraction(0)), self)


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Fraction

    def __str__(self):
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"({v})"


@dataclass(frozen=True, eq=False)
class Node(Expr):
    op: str
    a: Expr
    b: Expr | None = None

    def __str__(self):
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
        if self.op in sym:
            return f"({self.a} {sym[self.op]} {self.b})"
        return f"{self.op}({self.a})"


def wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(Fraction(x))


def esqrt(e) -> Expr:
    return Node("sqrt", wrap(e))


def elog(e) -> Expr:
    return Node("log", wrap(e))


P = Var("p")
X = Var("xi")


def eval_scalar(e: Expr, p, xi: Interval = XI) -> Interval:
    """Evaluate on scalar intervals."""
    if isinstance(e, Var):
        return coerce(p) if e.name == "p" else xi
    if isinstance(e, Const):
        return Interval.point(e.value)
    a = eval_scalar(e.a, p, xi)
    if e.op == "sqrt":
        return a.sqrt()
    if e.op == "log":
        return a.log()
    if e.op == "pow" and isinstance(e.b, Const) and e.b.value.denominator == 1:
        return a ** int(e.b.value)
    b = eval_scalar(e.b, p, xi)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "div":
        return a / b
    if e.op == "pow":
        return a.rpow(b)
    raise ValueError(f"unknown node {e.op}")


def _vmul(a, b):
    alo, ahi = a
    blo, bhi = b
    c = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
    return vdown(np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3]))), \
        vup(np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3])))


def _vdiv(a, b):
    alo, ahi = a
    blo, bhi = b
    if np.any((blo <= 0) & (bhi >= 0)):
        raise ZeroDivisionError("local factor divides by an interval containing 0")
    c = (alo / blo, alo / bhi, ahi / blo, ahi / bhi)
    return vdown(np.minimum(np.minimum(c[0], c[1]), np.minimum(c[2], c[3]))), \
        vup(np.maximum(np.maximum(c[0], c[1]), np.maximum(c[2], c[3])))


def _vlog(a):
    lo, hi = a
    if np.any(lo <= 0):
        raise ValueError("log of non-positive local value")
    return vdown(np.log(lo), TRANSCENDENTAL_ULPS), vup(np.log(hi), TRANSCENDENTAL_ULPS)


def _vexp(a):
    lo, hi = a
    return np.maximum(vdown(np.exp(lo), TRANSCENDENTAL_ULPS), 0.0), vup(np.exp(hi), TRANSCENDENTAL_ULPS)


def eval_vector(e: Expr, p: np.ndarray, xi: Interval = XI):
    """Evaluate on a float array of primes; returns certified (lo, hi) arrays."""
    if isinstance(e, Var):
        if e.name == "p":
            return p, p
        return np.full_like(p, xi.lo), np.full_like(p, xi.hi)
    if isinstance(e, Const):
        c = Interval.point(e.value)
        return np.full_like(p, c.lo), np.full_like(p, c.hi)
    a = eval_vector(e.a, p, xi)
    if e.op == "sqrt":
        return np.maximum(vdown(np.sqrt(a[0])), 0.0), vup(np.sqrt(a[1]))
    if e.op == "log":
        return _vlog(a)
    if e.op == "pow" and isinstance(e.b, Const) and e.b.value.denominator == 1 and e.b.value > 0:
        n = int(e.b.value)
        out = a
        for _ in range(n - 1):
            out = _vmul(out, a)
        return out
    b = eval_vector(e.b, p, xi)
    if e.op == "add":
        return vdown(a[0] + b[0]), vup(a[1] + b[1])
    if e.op == "sub":
        return vdown(a[0] - b[1]), vup(a[1] - b[0])
    if e.op == "mul":
        return _vmul(a, b)
    if e.op == "div":
        return _vdiv(a, b)
    if e.op == "pow":
        return _vexp(_vmul(b, _vlog(a)))
    raise ValueError(f"unknown node {e.op}")


# specifications -------------------------------------------------------------

TailFn = Callable[[int], Interval]


@dataclass(frozen=True)
class MultFnSpec:
    """prod_{p >= start} (1 + v_p) with |v_p| <= b_M p^-kappa for p > M."""
    name: str
    v: Expr
    kappa: Expr
    b_M: TailFn
    sign: str  # nonneg, nonpos or both
    start: int = 3
    literal: str | None = None  # truncated value at M = 10^8, as printed
    description: str = ""

    def kappa_iv(self) -> Interval:
        return eval_scalar(self.kappa, 2)


@dataclass(frozen=True)
class SumTail:
    """One side of a prime-sum tail: 0 <= +-term(p) <= c_M log p / p^kappa for p > M."""
    side: str  # upper or lower
    kappa: Expr
    c_M: TailFn


@dataclass(frozen=True)
class SumSpec:
    """sum_{p >= start} term(p); ``tails`` bound what p > M can add or remove."""
    name: str
    term: Expr
    tails: tuple[SumTail, ...]
    start: int = 2
    literal: str | None = None
    description: str = ""


@dataclass
class PrimeSource:
    """Primes up to ``limit`` with cached pi(M) and floor(theta(M))."""
    limit: int
    primes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.primes = primes_upto(self.limit)

    def upto(self, M: int) -> np.ndarray:
        if M > self.limit:
            raise ValueError(f"prime source covers {self.limit}, asked for {M}")
        return self.primes[: int(np.searchsorted(self.primes, M, side="right"))]

    def pi(self, M: int) -> int:
        return int(self.upto(M).size)

    def theta_floor(self, M: int) -> int:
        return theta_floor(M, self.upto(M))


def _source(M: int, source: PrimeSource | None) -> PrimeSource:
    if source is not None and source.limit >= M:
        return source
    return PrimeSource(M)


def _fsum_down(xs: np.ndarray) -> float:
    return math.nextafter(math.fsum(xs.tolist()), -math.inf)


def _fsum_up(xs: np.ndarray) -> float:
    return math.nextafter(math.fsum(xs.tolist()), math.inf)


def _blocks(ps: np.ndarray, order: str):
    if order == "descending":
        ps = ps[::-1]
    elif order != "ascending":
        raise ValueError(f"unknown order {order!r}")
    for i in range(0, ps.size, BLOCK):
        yield ps[i:i + BLOCK].astype(np.float64)


def log_truncated_product(spec: MultFnSpec, M: int, source: PrimeSource | None = None,
                          order: str = "ascending") -> Interval:
    src = _source(M, source)
    ps = src.upto(M)
    ps = ps[ps >= spec.start]
    lo_parts, hi_parts = [], []
    for block in _blocks(ps, order):
        vlo, vhi = eval_vector(spec.v, block)
        if np.any(vlo <= -1):
            raise ValueError(f"{spec.name}: local factor not positive")
        lo_parts.append(_fsum_down(vdown(np.log1p(vlo), TRANSCENDENTAL_ULPS)))
        hi_parts.append(_fsum_up(vup(np.log1p(vhi), TRANSCENDENTAL_ULPS)))
    out = Interval(0.0, 0.0)
    for a, b in zip(lo_parts, hi_parts):
        out = out + Interval(a, b)
    return out


def truncated_product(spec: MultFnSpec, M: int, source: PrimeSource | None = None,
                      order: str = "ascending") -> Interval:
    """prod_{start <= p <= M} (1 + v_p)."""
    return log_truncated_product(spec, M, source, order).exp()


def product_tail_range(spec: MultFnSpec, M: int, piM: int) -> Interval:
    """Multiplicative range of prod_{p > M}(1 + v_p)."""
    kappa = spec.kappa_iv()
    B = b_kappa(kappa, M, piM)
    return tail_factor(Interval(1.0, 1.0), spec.b_M(M), B, kappa, M, spec.sign)


def enclose_product(spec: MultFnSpec, M: int, source: PrimeSource | None = None) -> Interval:
    """Enclosure of the infinite product prod_{p >= start}(1 + v_p)."""
    src = _source(M, source)
    return truncated_product(spec, M, src) * product_tail_range(spec, M, src.pi(M))


def truncated_sum(spec: SumSpec, M: int, source: PrimeSource | None = None,
                  order: str = "ascending") -> Interval:
    src = _source(M, source)
    ps = src.upto(M)
    ps = ps[ps >= spec.start]
    out = Interval(0.0, 0.0)
    for block in _blocks(ps, order):
        tlo, thi = eval_vector(spec.term, block)
        out = out + Interval(_fsum_down(tlo), _fsum_up(thi))
    return out


def enclose_prime_sum(spec: SumSpec, M: int, source: PrimeSource | None = None) -> tuple[Interval, int]:
    """Enclosure of the infinite prime sum.

    C_kappa needs M > 3 594 641; below that the explicit sum is carried up to
    the first admissible cutoff.  Returns (enclosure, cutoff actually used)."""
    Mc = max(M, THETA_THRESHOLD + 1)
    src = _source(Mc, source)
    out = truncated_sum(spec, Mc, src)
    th = src.theta_floor(Mc)
    for t in spec.tails:
        C = c_kappa(eval_scalar(t.kappa, 2), Mc, th)
        out = sum_tail(out, t.c_M(Mc), C, "nonneg" if t.side == "upper" else "nonpos")
    return out, Mc


def verify_majorant(spec: MultFnSpec | SumSpec, M: int, window: int = 10**4) -> bool:
    """Check the tail majorants and sign conditions on the primes in (M, M + window]."""
    ps = primes_upto(M + window)
    ps = ps[ps > M].astype(np.float64)
    if isinstance(spec, MultFnSpec):
        lo, hi = eval_vector(spec.v, ps)
        if spec.sign == "nonneg" and np.any(lo < 0):
            return False
        if spec.sign == "nonpos" and np.any(hi > 0):
            return False
        mag = np.maximum(np.abs(lo), np.abs(hi)) * ps ** spec.kappa_iv().hi
        return bool(np.all(mag <= spec.b_M(M).lo))
    lo, hi = eval_vector(spec.term, ps)
    ok_up = ok_down = False
    for t in spec.tails:
        cap = t.c_M(M).lo * np.log(ps) / ps ** eval_scalar(t.kappa, 2).lo
        if t.side == "upper":
            ok_up = bool(np.all(hi <= cap))
        else:
            ok_down = bool(np.all(-lo <= cap))
    ok_up = ok_up or bool(np.all(hi <= 0))
    ok_down = ok_down or bool(np.all(lo >= 0))
    return ok_up and ok_down


# the registry ---------------------------------------------------------------

def _Mi(M: int) -> Interval:
    return Interval.point(M)


def cm(d: Fraction) -> TailFn:
    def f(M):
        m = _Mi(M)
        return (2 + m.rpow(d - Fraction(1, 2)) + m.rpow(d - 1)) / (1 - m.rpow(Fraction(-1, 2)))
    return f


def _const(c) -> TailFn:
    return lambda M: Interval.point(c)


def _b_p1(M):
    return 2 / (1 - _Mi(M).rpow(Fraction(-1, 2)))


def _b_p2(M):
    m = _Mi(M)
    return (1 + m.rpow(Fraction(1, 2) - XI)) / (1 - m.rpow(-XI))


def _b_p2d(M):
    m = _Mi(M)
    return (1 + m.rpow(Fraction(-1, 6)) + m.rpow(Fraction(1, 2) - XI) + m.rpow(Fraction(-2, 3))) / (1 - m.rpow(-XI))


def _b_p3(M):
    m = _Mi(M)
    return (2 + m.rpow(XI - 2)) / (1 - m.rpow(-XI)) ** 2


def _b_p3s(M):
    m = _Mi(M)
    return 2 / (1 - m.rpow(-XI)) ** 2 / (1 - m.rpow(Fraction(-1, 2)))


def _b_p1xd(M):
    m = _Mi(M)
    return 1 + m.rpow(Fraction(-1, 6)) + m.rpow(Fraction(-2, 3))


def _b_p0(M):
    return 1 / (1 - _Mi(M).rpow(-XI))


def _b_p1lx(M):
    m = _Mi(M)
    return 1 / ((1 - m.rpow(-XI)) * (1 - m.rpow(Fraction(-1, 2))))


def _b_ppd(M):
    return 1 / (1 - _Mi(M).rpow(Fraction(-1, 2)))


def _c_asum(M):
    m = _Mi(M)
    return 3 / ((1 - 1 / m) * (1 - 1 / m**2))


def _sumx_den(M):
    m = _Mi(M)
    return (1 - m.rpow(-XI) - 1 / m**2) * (1 - 1 / m)


def _c_asumx(M):
    m = _Mi(M)
    return (2 + 2 * m.rpow(XI - 2)) / ((1 - 2 * m.rpow(-XI) - 1 / m**2) * (1 - 1 / m))


SQ = esqrt(P)
H = Fraction(1, 2)


def _delta_family(d: Fraction) -> Expr:
    return (2 * P ** (1 - d) + SQ + 1) / (P ** (2 - 2 * d) * (SQ - 1))


PRODUCTS: dict[str, MultFnSpec] = {}
SUMS: dict[str, SumSpec] = {}


def register(spec):
    (PRODUCTS if isinstance(spec, MultFnSpec) else SUMS)[spec.name] = spec
    return spec


register(MultFnSpec("P1_M", (2 * P - SQ - 1) / (P**2 * (SQ - 1)), wrap(Fraction(3, 2)), _b_p1,
                    "nonneg", literal="2.90950563", description="sigma_1 mean value, leading product"))
for _name, _d, _lit in (("P1_delta1_M", Fraction(1, 3), "62.357582"),
                        ("P1_delta2_M", Fraction(5, 12), "306.1036494"),
                        ("P1_delta3_M", Fraction(4, 9), "707.85717")):
    register(MultFnSpec(_name, _delta_family(_d), wrap(Fraction(3, 2) - _d), cm(_d), "nonneg",
                        literal=_lit, description=f"sigma_1 error product, delta={_d}"))
register(MultFnSpec("P2", (P ** (X + H) + P - P**X - P ** (X - H)) / (P**2 * (P**X - 1)),
                    wrap(Fraction(3, 2)), _b_p2, "nonneg", literal="1.638009774"))
register(MultFnSpec("P2_delta",
                    (P ** (Fraction(1, 6) + X) + P**X + P ** Fraction(2, 3) + P ** (X - H))
                    / (P ** Fraction(4, 3) * (P**X - 1)),
                    wrap(Fraction(7, 6)), _b_p2d, "nonneg", literal="13.81614454"))
_P3 = (2 * P ** (1 + X) - 2 * P ** (2 * X) - P + P ** (2 * X - 1)) / (P**2 * (P**X - 1) ** 2)
_P3S = (2 * P**X - P ** (2 * X - 1) - 1) / ((P**X - 1) ** 2 * (SQ - 1))
register(MultFnSpec("P3", _P3, 1 + X, _b_p3, "nonneg", literal="1.031648197"))
register(MultFnSpec("P3_spec", _P3S, H + X, _b_p3s, "nonneg", literal="3.191814808"))
register(MultFnSpec("P1x", (P - SQ - 1) / P ** Fraction(5, 2), wrap(Fraction(3, 2)), _const(1),
                    "nonneg", literal="1.2159031"))
register(MultFnSpec("P1x_delta", (P ** Fraction(2, 3) + SQ + 1) / P ** Fraction(11, 6),
                    wrap(Fraction(7, 6)), _b_p1xd, "nonneg", literal="7.26497961"))
register(MultFnSpec("P0_LX", (P ** (2 - X) - 2 * P - 1) / (P ** (3 - X) * (P**X - 1)), 1 + X,
                    _b_p0, "both", literal="0.694045937",
                    description="local factor as printed (constant term -1)"))
register(MultFnSpec("P0_LX_corrected", (P ** (2 - X) - 2 * P + 1) / (P ** (3 - X) * (P**X - 1)),
                    1 + X, _b_p0, "both",
                    description="(1 - 1/p)(1 + f(p)) - 1 for the K_1 integrand"))
register(MultFnSpec("P1_LX", (P ** (1 - X) - 1) / (P ** (1 - X) * (P**X - 1) * (SQ - 1)), H + X,
                    _b_p1lx, "nonneg", literal="1.079535589"))
register(MultFnSpec("AP0_LX", (2 * P ** (2 - X) - 2 * P - P ** (2 - 2 * X) + 1)
                    / (P ** (3 - 2 * X) * (P**X - 1) ** 2), 1 + X, _b_p3, "nonneg",
                    literal="1.031648197"))
register(MultFnSpec("AP1_LX", _P3S, H + X, _b_p3s, "nonneg", literal="3.191814808"))
register(MultFnSpec("APROD", -2 / P**2 + 1 / P**3, wrap(2), _const(2), "nonpos", start=2,
                    literal="0.40282372"))
register(MultFnSpec("PPdelta", 1 / (P ** Fraction(3, 2) - P), wrap(Fraction(3, 2)), _b_ppd,
                    "nonneg", start=2, literal="4.94778677"))

register(SumSpec("ASUM", (3 * P - 2) * elog(P) / ((P - 1) * (P**2 + P - 1)),
                 (SumTail("upper", wrap(2), _c_asum),), start=2, literal="2.046752376",
                 description="literal is gamma plus the sum"))
# the terms stay positive until p is about 1.5e13, so both sides of the tail are needed
register(SumSpec("Sumx", -(P**2 - 3 * P ** (1 + X) + 2 * P**X) * elog(P)
                 / ((P**X * (P - 1) + P**2 * (P**X - 1)) * (P - 1)),
                 (SumTail("upper", wrap(2), lambda M: 3 / _sumx_den(M)),
                  SumTail("lower", 1 + X, lambda M: 1 / _sumx_den(M))),
                 start=3, literal="0.656118309"))
register(SumSpec("ASumx", -(2 * P ** (2 + X) - 3 * P ** (1 + 2 * X) - P**2 + 2 * P ** (2 * X)) * elog(P)
                 / ((P ** (2 + 2 * X) - 2 * P ** (2 + X) + P ** (1 + 2 * X) + P**2 - P ** (2 * X)) * (P - 1)),
                 (SumTail("lower", 1 + X, _c_asumx),), start=3, literal="0.3611216153"))


def registry_table() -> list[dict]:
    """Printable description of every registered product and sum."""
    rows = []
    for s in PRODUCTS.values():
        rows.append({"name": s.name, "kind": "product", "local": f"1 + {s.v}", "kappa": str(s.kappa),
                     "sign": s.sign, "start": s.start, "literal_1e8": s.literal})
    for s in SUMS.values():
        tails = ", ".join(f"{t.side} kappa={t.kappa}" for t in s.tails)
        rows.append({"name": s.name, "kind": "sum", "term": str(s.term), "tails": tails,
                     "start": s.start, "literal_1e8": s.literal})
    return rows
