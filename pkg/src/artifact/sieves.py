"""Prime sieves, per-integer arithmetic tables and the small multiplicative
weights (phi_s, sigma_s, g0, g2) used throughout the package."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .interval import LOG10, Interval, coerce, sqrt

SEGMENT_SIZE = 1 << 22
MEMORY_BUDGET = 1 << 27  # integers per monolithic table
SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
                61, 67, 71, 73, 79)  # the 22 primes below 80
CACHE_MAGIC = b"PTAB"
CACHE_VERSION = 1

# constants of the m(X) / m_2(X) estimates
H1 = Interval.exact(Fraction(10032, 10**6))
H2 = Interval.exact(Fraction(296, 10**4))
RHO = H2 / H1
XI = 1 - 1 / (12 * LOG10)
G0_2 = sqrt(3) * (sqrt(2) - 1) / 2


def g2_at_2(rho: Interval | None = None) -> Interval:
    """g2(2) = rho (1 - 2^-xi); ``rho`` defaults to H2/H1."""
    r = RHO if rho is None else coerce(rho)
    return r * (1 - Interval.point(2) ** (-XI))


G2_2 = g2_at_2()


def primes_upto(n: int) -> np.ndarray:
    """All primes <= n as int64, by an odd-only sieve of Eratosthenes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    size = (n - 1) // 2  # index i <-> 2i+1, i >= 1
    flags = np.ones(size + 1, dtype=bool)
    flags[0] = False
    for i in range(1, (math.isqrt(n) - 1) // 2 + 1):
        if flags[i]:
            p = 2 * i + 1
            flags[(p * p) // 2::p] = False
    odd = 2 * np.nonzero(flags)[0].astype(np.int64) + 1
    return np.concatenate([np.array([2], dtype=np.int64), odd])


@dataclass(frozen=True)
class PrimeTables:
    lo: int
    hi: int
    mu: np.ndarray      # int8
    phi: np.ndarray     # int64
    mask: np.ndarray    # uint32, bit i set when SMALL_PRIMES[i] divides n
    primes: np.ndarray  # int64, the primes in [lo, hi]

    def index(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(f"{n} outside table range [{self.lo}, {self.hi}]")
        return n - self.lo

    def mu_of(self, n: int) -> int:
        return int(self.mu[self.index(n)])

    def phi_of(self, n: int) -> int:
        return int(self.phi[self.index(n)])

    def mask_of(self, n: int) -> set[int]:
        m = int(self.mask[self.index(n)])
        return {p for i, p in enumerate(SMALL_PRIMES) if m >> i & 1}


def build_tables(lo: int, hi: int, budget: int = MEMORY_BUDGET) -> PrimeTables:
    """Exact mu, phi, small-prime masks and primes for every n in [lo, hi]."""
    if not 1 <= lo <= hi:
        raise ValueError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    if hi - lo + 1 > budget:
        raise MemoryError(f"range of {hi - lo + 1} integers exceeds budget {budget}; "
                          "use iter_segments() to build it in pieces")
    n = np.arange(lo, hi + 1, dtype=np.int64)
    rem = n.copy()
    phi = n.copy()
    mu = np.ones(n.size, dtype=np.int8)
    mask = np.zeros(n.size, dtype=np.uint32)
    bits = {p: i for i, p in enumerate(SMALL_PRIMES)}
    for p in primes_upto(math.isqrt(hi)).tolist():
        start = -(-lo // p) * p
        if start > hi:
            continue
        sl = slice(start - lo, None, p)
        mu[sl] = -mu[sl]
        phi[sl] = phi[sl] // p * (p - 1)
        if p in bits:
            mask[sl] |= np.uint32(1 << bits[p])
        pk = p
        while pk <= hi:
            s = -(-lo // pk) * pk
            if s > hi:
                break
            rem[s - lo::pk] //= p
            if pk > p:
                mu[s - lo::pk] = 0
            pk *= p
    big = rem > 1
    mu[big] = -mu[big]
    phi[big] = phi[big] // rem[big] * (rem[big] - 1)
    for p, i in bits.items():
        # primes below 80 that exceed sqrt(hi) are caught by the cofactor
        hit = big & (rem == p)
        mask[hit] |= np.uint32(1 << i)
    primes = n[(phi == n - 1) & (n >= 2)]
    for arr in (mu, phi, mask, primes):
        arr.setflags(write=False)
    return PrimeTables(lo, hi, mu, phi, mask, primes)


def iter_segments(lo: int, hi: int, size: int = SEGMENT_SIZE):
    start = lo
    while start <= hi:
        end = min(hi, start + size - 1)
        yield build_tables(start, end)
        start = end + 1


def prime_count(M: int) -> int:
    return int(primes_upto(M).size)


def theta_enclosure(M: int, primes: np.ndarray | None = None) -> Interval:
    """Certified enclosure of theta(M) = sum of log p over p <= M."""
    ps = primes_upto(M) if primes is None else primes[primes <= M]
    logs = np.log(ps.astype(np.float64))
    lo = np.nextafter(np.nextafter(logs, -np.inf), -np.inf)
    hi = np.nextafter(np.nextafter(logs, np.inf), np.inf)
    s_lo, s_hi = math.fsum(lo.tolist()), math.fsum(hi.tolist())
    return Interval(math.nextafter(s_lo, -math.inf), math.nextafter(s_hi, math.inf))


def theta_floor(M: int, primes: np.ndarray | None = None) -> int:
    """An integer certified to be <= theta(M) (equal to the floor unless the
    enclosure straddles an integer)."""
    return math.floor(theta_enclosure(M, primes).lo)


def factorize(q: int) -> dict[int, int]:
    if q < 1:
        raise ValueError("q must be positive")
    out: dict[int, int] = {}
    d = 2
    while d * d <= q:
        while q % d == 0:
            out[d] = out.get(d, 0) + 1
            q //= d
        d += 1 if d == 2 else 2
    if q > 1:
        out[q] = out.get(q, 0) + 1
    return out


def eval_g(q: int, which: str, rho=None) -> Interval:
    if which not in ("g0", "g2"):
        raise ValueError(f"unknown weight {which!r}")
    if q < 1:
        raise ValueError("q must be positive")
    if q % 2:
        return Interval(1.0, 1.0)
    return G0_2 if which == "g0" else g2_at_2(rho)


def eval_phi_s(q: int, s) -> Interval:
    """phi_s(q) = q^s prod_{p|q} (1 - p^-s)."""
    s = coerce(s)
    out = Interval.point(q) ** s
    for p in factorize(q):
        out = out * (1 - Interval.point(p) ** (-s))
    return out


def eval_sigma_s(q: int, s) -> Interval:
    s = coerce(s)
    out = Interval.point(q) ** s
    for p in factorize(q):
        out = out * (1 + Interval.point(p) ** (-s))
    return out


def squarefree_product(N: int, local, primes: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Values of the multiplicative function supported on squarefree n <= N
    with f(p) = local(p); ``local`` maps an int64 prime array to floats.

    Returns (values, omega) where omega counts prime factors, which bounds
    the number of rounded multiplications behind each value."""
    ps = primes_upto(N) if primes is None else primes[primes <= N]
    vals = np.ones(N + 1, dtype=np.float64)
    omega = np.zeros(N + 1, dtype=np.int8)
    vals[0] = 0.0
    loc = np.asarray(local(ps), dtype=np.float64)
    for p, f in zip(ps.tolist(), loc.tolist()):
        vals[p::p] *= f
        omega[p::p] += 1
        if p * p <= N:
            vals[p * p::p * p] = 0.0
    return vals, omega


def save_tables(t: PrimeTables, path: str | Path) -> None:
    """Binary cache: magic, version, lo, hi (little-endian u32/u64), then the
    mu (i1), phi (i8) and mask (u4) columns, each of hi-lo+1 records."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(np.array([CACHE_VERSION], dtype="<u4").tobytes())
        fh.write(np.array([t.lo, t.hi], dtype="<u8").tobytes())
        fh.write(t.mu.astype("<i1").tobytes())
        fh.write(t.phi.astype("<i8").tobytes())
        fh.write(t.mask.astype("<u4").tobytes())
    tmp.replace(path)


def load_tables(path: str | Path) -> PrimeTables:
    raw = Path(path).read_bytes()
    if raw[:4] != CACHE_MAGIC:
        raise ValueError("not a prime table cache file")
    version = int(np.frombuffer(raw, dtype="<u4", count=1, offset=4)[0])
    if version != CACHE_VERSION:
        raise ValueError(f"unsupported cache version {version}")
    lo, hi = (int(v) for v in np.frombuffer(raw, dtype="<u8", count=2, offset=8))
    k = hi - lo + 1
    off = 24
    mu = np.frombuffer(raw, dtype="<i1", count=k, offset=off).astype(np.int8)
    off += k
    phi = np.frombuffer(raw, dtype="<i8", count=k, offset=off).astype(np.int64)
    off += 8 * k
    mask = np.frombuffer(raw, dtype="<u4", count=k, offset=off).astype(np.uint32)
    n = np.arange(lo, hi + 1, dtype=np.int64)
    primes = n[(phi == n - 1) & (n >= 2)]
    for arr in (mu, phi, mask, primes):
        arr.setflags(write=False)
    return PrimeTables(lo, hi, mu, phi, mask, primes)
