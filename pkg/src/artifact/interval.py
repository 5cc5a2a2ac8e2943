"""Outward-rounded interval arithmetic on hardware doubles.

Basic operations (+, -, *, /, sqrt) use error-free transformations to find
the sign of the rounding error, so each bound moves by at most one ulp and
exact results stay exact.  Transcendentals are evaluated in round-to-nearest
and widened by ``TRANSCENDENTAL_ULPS`` ulps on each side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_DOWN, ROUND_FLOOR, Decimal
from fractions import Fraction
from typing import Union

import numpy as np

TRANSCENDENTAL_ULPS = 4

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1
_SAFE_HI = 2.0**995
_SAFE_LO = 2.0**-969

Number = Union[int, float, Fraction]


class IntervalDomainError(ValueError):
    pass


def next_up(x: float, k: int = 1) -> float:
    for _ in range(k):
        x = math.nextafter(x, _INF)
    return x


def next_down(x: float, k: int = 1) -> float:
    for _ in range(k):
        x = math.nextafter(x, -_INF)
    return x


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_err(a: float, b: float, p: float) -> float:
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _safe(*xs: float) -> bool:
    for x in xs:
        ax = abs(x)
        if ax != 0.0 and (ax > _SAFE_HI or ax < _SAFE_LO):
            return False
    return True


def add_down(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s) or not _safe(a, b, s):
        return next_down(s)
    return next_down(s) if _two_sum_err(a, b, s) < 0 else s


def add_up(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s) or not _safe(a, b, s):
        return next_up(s)
    return next_up(s) if _two_sum_err(a, b, s) > 0 else s


def mul_down(a: float, b: float) -> float:
    p = a * b
    if not math.isfinite(p) or not _safe(a, b, p) or (p == 0.0 and a != 0.0 and b != 0.0):
        return next_down(p)
    return next_down(p) if _two_prod_err(a, b, p) < 0 else p


def mul_up(a: float, b: float) -> float:
    p = a * b
    if not math.isfinite(p) or not _safe(a, b, p) or (p == 0.0 and a != 0.0 and b != 0.0):
        return next_up(p)
    return next_up(p) if _two_prod_err(a, b, p) > 0 else p


def _div_residual_sign(a: float, b: float, q: float) -> float:
    # sign of a/b - q, via r = a - q*b computed exactly
    p = q * b
    r = (a - p) - _two_prod_err(q, b, p)
    return r if b > 0 else -r


def div_down(a: float, b: float) -> float:
    q = a / b
    if not math.isfinite(q) or not _safe(a, b, q) or (q == 0.0 and a != 0.0):
        return next_down(q)
    return next_down(q) if _div_residual_sign(a, b, q) < 0 else q


def div_up(a: float, b: float) -> float:
    q = a / b
    if not math.isfinite(q) or not _safe(a, b, q) or (q == 0.0 and a != 0.0):
        return next_up(q)
    return next_up(q) if _div_residual_sign(a, b, q) > 0 else q


def _sqrt_dir(x: float, s: float) -> float:
    p = s * s
    return (x - p) - _two_prod_err(s, s, p)


def sqrt_down(x: float) -> float:
    s = math.sqrt(x)
    if s == 0.0 or not _safe(x, s):
        return max(0.0, next_down(s))
    return next_down(s) if _sqrt_dir(x, s) < 0 else s


def sqrt_up(x: float) -> float:
    s = math.sqrt(x)
    if s == 0.0 or not _safe(x, s):
        return next_up(s) if x > 0 else s
    return next_up(s) if _sqrt_dir(x, s) > 0 else s


def fraction_down(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) <= q else next_down(f)


def fraction_up(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else next_up(f)


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise IntervalDomainError("NaN bound")
        if self.lo > self.hi:
            raise IntervalDomainError(f"empty interval [{self.lo}, {self.hi}]")

    # construction -------------------------------------------------------

    @classmethod
    def point(cls, x: Number) -> "Interval":
        if isinstance(x, float):
            return cls(x, x)
        q = Fraction(x)
        return cls(fraction_down(q), fraction_up(q))

    @classmethod
    def exact(cls, text: str | Number) -> "Interval":
        """Enclose an exact rational given as int, Fraction or decimal string."""
        return cls.point(Fraction(text))

    @classmethod
    def around(cls, text: str, radius: str) -> "Interval":
        """Enclose ``text +- radius`` (both decimal strings)."""
        c, r = Fraction(text), Fraction(radius)
        return cls(fraction_down(c - r), fraction_up(c + r))

    @classmethod
    def hull_of(cls, *xs: "Interval | Number") -> "Interval":
        ivs = [coerce(x) for x in xs]
        return cls(min(i.lo for i in ivs), max(i.hi for i in ivs))

    # queries ------------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: "Interval | Number") -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        q = Fraction(x)
        above = self.lo == -_INF or Fraction(self.lo) <= q
        return above and (self.hi == _INF or q <= Fraction(self.hi))

    def subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        o = coerce(other)
        return Interval(add_down(self.lo, o.lo), add_up(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = coerce(other)
        return Interval(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))

    def __rsub__(self, other):
        return coerce(other) - self

    def __mul__(self, other):
        o = coerce(other)
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        pairs = ((a, c), (a, d), (b, c), (b, d))
        return Interval(min(mul_down(x, y) for x, y in pairs),
                        max(mul_up(x, y) for x, y in pairs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by interval containing 0: {o!r}")
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        pairs = ((a, c), (a, d), (b, c), (b, d))
        return Interval(min(div_down(x, y) for x, y in pairs),
                        max(div_up(x, y) for x, y in pairs))

    def __rtruediv__(self, other):
        return coerce(other) / self

    def __pow__(self, e):
        if isinstance(e, int):
            return self._ipow(e)
        if isinstance(e, Fraction) and e.denominator == 1:
            return self._ipow(int(e))
        return self.rpow(e)

    def __rpow__(self, base):
        return coerce(base).rpow(self)

    def _ipow(self, n: int) -> "Interval":
        if n < 0:
            return 1 / self._ipow(-n)
        if n == 0:
            return Interval(1.0, 1.0)
        if n % 2 == 0 and self.lo < 0.0 < self.hi:
            m = abs(self)
            r = m._ipow(n)
            return Interval(0.0, r.hi)
        if n % 2 == 0 and self.hi <= 0.0:
            return (-self)._ipow(n)
        result = Interval(1.0, 1.0)
        base = self
        k = n
        # monotone on the relevant branch, so repeated multiplication is sound
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def rpow(self, e: "Interval | Number") -> "Interval":
        """x**e for x > 0 and real e, enclosed via the four corners."""
        if self.lo <= 0.0:
            if self.lo == 0.0 and coerce(e).lo > 0:
                pos = Interval(math.ulp(0.0), max(self.hi, math.ulp(0.0)))
                r = pos.rpow(e)
                return Interval(0.0, r.hi)
            raise IntervalDomainError(f"real power needs positive base, got lo={self.lo}")
        ei = coerce(e)
        vals = []
        for x in (self.lo, self.hi):
            for y in (ei.lo, ei.hi):
                vals.append(_pow_enclosure(x, y))
        return Interval(min(v[0] for v in vals), max(v[1] for v in vals))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def max(self, other) -> "Interval":
        o = coerce(other)
        return Interval(max(self.lo, o.lo), max(self.hi, o.hi))

    def min(self, other) -> "Interval":
        o = coerce(other)
        return Interval(min(self.lo, o.lo), min(self.hi, o.hi))

    def hull(self, other) -> "Interval":
        o = coerce(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    # unary functions ------------------------------------------------------

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise IntervalDomainError(f"sqrt of negative bound {self.lo}")
        return Interval(sqrt_down(self.lo), sqrt_up(self.hi))

    def exp(self) -> "Interval":
        return Interval(_exp_down(self.lo), _exp_up(self.hi))

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise IntervalDomainError(f"log of non-positive bound {self.lo}")
        return Interval(_log_down(self.lo), _log_up(self.hi))

    def log1p(self) -> "Interval":
        if self.lo <= -1:
            raise IntervalDomainError(f"log1p needs lo > -1, got {self.lo}")
        return Interval(_widen_down(math.log1p(self.lo), self.lo == 0.0),
                        _widen_up(math.log1p(self.hi), self.hi == 0.0))


def coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Interval.point(x)
    if isinstance(x, (np.floating, np.integer)):
        return Interval.point(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to Interval")


def _widen_down(v: float, exact: bool = False) -> float:
    return v if exact else next_down(v, TRANSCENDENTAL_ULPS)


def _widen_up(v: float, exact: bool = False) -> float:
    return v if exact else next_up(v, TRANSCENDENTAL_ULPS)


def _exp_down(x: float) -> float:
    if x == -_INF:
        return 0.0
    return max(0.0, _widen_down(math.exp(x), x == 0.0))


def _exp_up(x: float) -> float:
    try:
        return _widen_up(math.exp(x), x == 0.0)
    except OverflowError:
        return _INF


def _log_down(x: float) -> float:
    return _widen_down(math.log(x), x == 1.0)


def _log_up(x: float) -> float:
    return _widen_up(math.log(x), x == 1.0)


def _pow_enclosure(x: float, y: float) -> tuple[float, float]:
    if y == 0.0 or x == 1.0:
        return 1.0, 1.0
    if y == 1.0:
        return x, x
    if y == 0.5:
        return sqrt_down(x), sqrt_up(x)
    v = math.pow(x, y)
    return max(0.0, next_down(v, TRANSCENDENTAL_ULPS)), next_up(v, TRANSCENDENTAL_ULPS)


# convenience wrappers ------------------------------------------------------

def iv(x) -> Interval:
    if isinstance(x, str):
        return Interval.exact(x)
    return coerce(x)


def sqrt(x) -> Interval:
    return coerce(x).sqrt()


def exp(x) -> Interval:
    return coerce(x).exp()


def log(x) -> Interval:
    return coerce(x).log()


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operator {op!r}")


def iv_fn(a: Interval, fn: str, exponent=None) -> Interval:
    if fn == "exp":
        return a.exp()
    if fn == "log":
        return a.log()
    if fn == "sqrt":
        return a.sqrt()
    if fn == "pow":
        return a ** exponent
    raise ValueError(f"unknown function {fn!r}")


# mathematical constants, enclosed from long decimal expansions
EULER_GAMMA = Interval.around("0.5772156649015328606065120900824024310422", "1e-40")
PI = Interval.around("3.1415926535897932384626433832795028841972", "1e-40")
LOG2 = Interval.around("0.6931471805599453094172321214581765680755", "1e-40")
LOG10 = Interval.around("2.3025850929940456840179914546843642076011", "1e-40")
SQRT2 = sqrt(2)


# vectorised helpers for (lo, hi) numpy pairs -------------------------------

def vdown(a: np.ndarray, k: int = 1) -> np.ndarray:
    for _ in range(k):
        a = np.nextafter(a, -np.inf)
    return a


def vup(a: np.ndarray, k: int = 1) -> np.ndarray:
    for _ in range(k):
        a = np.nextafter(a, np.inf)
    return a


# decimal reporting layer ---------------------------------------------------

_MODES = {"up": ROUND_CEILING, "down": ROUND_FLOOR, "toward-zero": ROUND_DOWN}


def round_decimal(x: float, d: int, mode: str) -> float:
    """Round to a multiple of 10**-d in decimal space.

    The shortest round-trip decimal of ``x`` is rounded, so the float result
    compares correctly against ``x`` and the operation is idempotent.
    """
    if d < 0:
        raise ValueError("digit count must be non-negative")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot round non-finite value {x!r}")
    if mode not in _MODES:
        raise ValueError(f"unknown rounding mode {mode!r}")
    q = Decimal(repr(x)).quantize(Decimal(1).scaleb(-d), rounding=_MODES[mode])
    return float(q)


def decimal_text(x: float, d: int, mode: str) -> str:
    x = float(x)
    q = Decimal(repr(x)).quantize(Decimal(1).scaleb(-d), rounding=_MODES[mode])
    return format(q, "f")


def round_up(x, d: int = 4) -> float:
    return round_decimal(x, d, "up")


def round_down(x, d: int = 4) -> float:
    return round_decimal(x, d, "down")


def trunc(x, d: int = 4) -> float:
    return round_decimal(x, d, "toward-zero")


def upper(x, d: int = 4) -> float:
    return round_up(coerce(x).hi, d)


def lower(x, d: int = 4) -> float:
    return round_down(coerce(x).lo, d)


def report(x: Interval, d: int = 4) -> tuple[float, float]:
    return lower(x, d), upper(x, d)
