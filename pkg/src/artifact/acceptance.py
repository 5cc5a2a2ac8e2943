"""The acceptance checks, shared by the test suite and ``artifact verify``.

Each check returns one or more ``Outcome`` records.  Checks listed in
``KNOWN_FAILURES`` fail for reasons recorded in the decision notes; they
are reported as FAIL rather than loosened.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .bounds_pipeline import LedgerConfig, build_ledger, threshold_sums, u_bound
from .epsilon_bounds import AbCoefficients, omega1, omega2, omega_table, s_eps_bruteforce
from .euler_enclosures import PRODUCTS, SUMS, PrimeSource, enclose_prime_sum, enclose_product, truncated_product
from .interval import EULER_GAMMA, Interval, decimal_text
from .mertens import build_mertens, verify_recombination
from .s0_direct import s0_brute_trace, s0_exact_trace, s0_scan, scan_mean

KNOWN_FAILURES = {
    "3.upper-0.445",   # S_0(757) = 0.44530923... > 0.445
    "4.aux2",          # the printed maximum needs rho rounded to 2.951
    "4.aux3",
    "4.xi1-argmax",    # the Xi scans keep growing past 10^6
    "4.xi2-argmax",
    "4.xi2-value",     # the printed maximum sits 1.1e-5 relative below the scanned value
    "5.APROD",         # the printed W is about 6% below prod(1 - 2/p^2 + 1/p^3)
    "6.APROD",
    "6.P1_delta2_M",   # printed values carry the drift of a 53-bit interval product
    "6.P3_spec",
    "6.AP1_LX",
    "7.threshold-S1",  # the printed S1 is its upper 12-digit rounding, 9e-13 above the sum
}


@dataclass(frozen=True)
class Outcome:
    key: str
    passed: bool
    detail: str
    seconds: float = 0.0

    @property
    def known(self) -> bool:
        return self.key in KNOWN_FAILURES

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.key}] {self.detail} ({self.seconds:.1f}s)"


@dataclass(frozen=True)
class Scale:
    s0_limit: int = 10**6
    scan_limit: int = 2 * 10**6
    product_M: int = 10**5
    samples: int = 200
    interval_checks: int = 10**5
    seed: int = 20240601
    full_M: bool = False
    full_scan: bool = False


class _Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t


# 1 -------------------------------------------------------------------------

def oracle_equivalence(limit: int = 2000) -> list[Outcome]:
    with _Timer() as t:
        brute = s0_brute_trace(limit)
        exact = s0_exact_trace(limit)
        same = brute == exact
        table = build_mertens(max(limit, 10))
        fl = s0_scan(limit, table, exact_upto=0)
        miss = [x for x in range(1, limit + 1) if not fl.at(x).contains(exact[x])]
    ok = same and not miss and t.s < 10
    return [Outcome("1.oracle", ok, f"exact recurrence == brute force on [1, {limit}]: {same}; "
                    f"float enclosures missing exact value: {len(miss)}; limit 10s", t.s)]


# 2 -------------------------------------------------------------------------

def mertens_recombination(limit: int = 10**5) -> list[Outcome]:
    with _Timer() as t:
        table = build_mertens(limit)
        res = verify_recombination(limit, 6, table)
    ok = res["ok"] and t.s < 5
    return [Outcome("2.mertens", ok, f"q0=6 recombination exact for t <= {limit}: {res['ok']}; "
                    f"max float gap {res['max_float_gap']:.2e}; limit 5s", t.s)]


# 3 -------------------------------------------------------------------------

def s0_bracket(limit: int = 10**6) -> list[Outcome]:
    with _Timer() as t:
        table = build_mertens(limit)
        tr = s0_scan(limit, table)
    out = []
    nonneg = tr.certify_nonneg(1, limit)
    out.append(Outcome("3.nonneg", nonneg, f"S_0(X) >= 0 on [1, {limit}]", t.s))
    bad = tr.violations_above(422, limit, Fraction(445, 1000))
    mx, arg, _ = tr.range_max(422, limit)
    out.append(Outcome("3.upper-0.445", not bad,
                       f"S_0 <= 0.445 on [422, {limit}]: {len(bad)} violations {bad[:5]}; "
                       f"max {mx.hi:.9f} at {arg}"))
    hit = [x for x in range(1300, 1351) if tr.at(x).lo > 0.44455]
    out.append(Outcome("3.peak-1321", bool(hit), f"S_0 > 0.44455 somewhere in [1300, 1350]: {hit[:3]}"))
    b1 = tr.violations_above(2, limit, Fraction(19, 30))
    out.append(Outcome("3.upper-19/30", not b1, f"S_0 <= 19/30 on [2, {limit}] (equality at 5)"))
    b2 = tr.violations_above(6, limit, Fraction(528, 1000))
    mx6, arg6, _ = tr.range_max(6, limit)
    out.append(Outcome("3.upper-0.528", not b2,
                       f"S_0 <= 0.528 on [6, {limit}]; max {mx6.hi:.6f} at {arg6}"))
    return out


# 4 -------------------------------------------------------------------------

def maxima_scans(limit: int = 2 * 10**6) -> list[Outcome]:
    out = []
    with _Timer() as t:
        reps = {f: scan_mean(f, 10**5) for f in ("sigma1", "sigma2", "Sigma1")}
    lits = {"sigma1": "6.2359917454422", "sigma2": "3.16843122347233", "Sigma1": "2.06803754617859"}
    ok = all(r.argmax == 42 and r.contains_literal(lits[f]) for f, r in reps.items())
    out.append(Outcome("4.sigma-42", ok, "argmax 42 and literal contained for "
                       + ", ".join(f"{f}={r.max.hi:.14f}" for f, r in reps.items()), t.s))
    for fn, arg, lit in (("aux2", 6, "1.90380793763037"), ("aux3", 2, "2.67710025")):
        r = scan_mean(fn, 10**5)
        out.append(Outcome(f"4.{fn}", r.argmax == arg and r.contains_literal(lit),
                           f"exact rho: argmax {r.argmax} (want {arg}), max {r.max.hi:.14f} vs {lit}"))
        r2 = scan_mean(fn, 10**5, rho=2.951)
        out.append(Outcome(f"4.{fn}-rho2.951", r2.argmax == arg and r2.contains_literal(lit),
                           f"rho = 2.951: argmax {r2.argmax}, max {r2.max.hi:.14f}"))
    with _Timer() as t:
        for fn, arg, lit, cp in (("Xi1", 978_118, "2.2526506709", 10**6),
                                 ("Xi2", 478_671, "1.587160669", 5 * 10**5)):
            r = scan_mean(fn, limit)
            out.append(Outcome(f"4.{fn.lower()}-argmax", r.argmax == arg and r.contains_literal(lit, 1e-10),
                               f"argmax over [1, {limit}] is {r.argmax} (want {arg}), "
                               f"max {r.max.hi:.10f} vs {lit}"))
            c = scan_mean(fn, cp) if cp not in r.checkpoints else None
            a, v = (c.argmax, c.max) if c else r.checkpoints[cp]
            out.append(Outcome(f"4.{fn.lower()}-at-{cp}", a == arg,
                               f"argmax over [1, {cp}] is {a} (want {arg})"))
            out.append(Outcome(f"4.{fn.lower()}-value", v.contains(Fraction(lit)) or
                               abs(v.hi - float(lit)) <= 1e-10 * float(lit),
                               f"max over [1, {cp}] is [{v.lo:.12f}, {v.hi:.12f}] vs {lit}"))
    return out


# 5 -------------------------------------------------------------------------

def product_containment(M: int = 10**5) -> list[Outcome]:
    with _Timer() as t:
        src = PrimeSource(3_594_642)
        res = {n: enclose_product(s, M, src) for n, s in PRODUCTS.items() if s.literal}
        sums = {n: enclose_prime_sum(s, M, src)[0] for n, s in SUMS.items()}
    sums["ASUM"] = EULER_GAMMA + sums["ASUM"]  # the printed value includes gamma
    miss = [n for n, v in res.items() if n != "APROD" and not v.contains(Fraction(PRODUCTS[n].literal))]
    miss += [n for n, v in sums.items() if not v.contains(Fraction(SUMS[n].literal))]
    out = [Outcome("5.products", not miss, f"{len(res) - 1 + len(sums)} enclosures at M={M} contain "
                   f"their printed values; missing: {miss}", t.s)]
    w = res["APROD"]
    out.append(Outcome("5.APROD", w.contains(Fraction("0.40282372")),
                       f"W enclosure [{w.lo:.9f}, {w.hi:.9f}] vs printed 0.40282372"))
    return out


# 6 -------------------------------------------------------------------------

def full_m_products(M: int = 10**8) -> list[Outcome]:
    out = []
    src = PrimeSource(M)
    for n, s in PRODUCTS.items():
        if not s.literal:
            continue
        with _Timer() as t:
            v = truncated_product(s, M, src)
        lit = Fraction(s.literal)
        ulp = Fraction(1, 10 ** len(s.literal.split(".")[1]))
        ok = Fraction(v.lo) <= lit + ulp and lit - ulp <= Fraction(v.hi)
        out.append(Outcome(f"6.{n}", ok, f"truncated product at M={M}: [{v.lo:.10f}, {v.hi:.10f}] "
                           f"vs {s.literal} +- {float(ulp):g}", t.s))
    return out


# 7 -------------------------------------------------------------------------

def threshold_and_bounds() -> list[Outcome]:
    out = []
    with _Timer() as t:
        s1, s2 = threshold_sums(80)
    narrow = s1.width < 1e-6 * s1.lo and s2.width < 1e-6 * s2.lo and t.s < 30
    out.append(Outcome("7.threshold-width", narrow, f"relative widths {s1.width / s1.lo:.1e}, "
                       f"{s2.width / s2.lo:.1e}; limit 1e-6 and 30s", t.s))
    for name, v, lit in (("S1", s1, "0.333415398793"), ("S2", s2, "41346.25411")):
        out.append(Outcome(f"7.threshold-{name}", v.contains(Fraction(lit)),
                           f"{name} = [{v.lo!r}, {v.hi!r}] contains {lit}"))
    digits = len("333415398793")
    up = decimal_text(s1.hi, digits, "up")
    out.append(Outcome("7.threshold-S1-rounded", up == "0.333415398793",
                       f"S1 rounded up to {digits} digits is {up}"))
    full = LedgerConfig(products="computed", threshold="computed")
    a = build_ledger(full)["Bound4"]
    b = build_ledger(full)["Bound4"]
    out.append(Outcome("7.bound4-determinism", a == b and a.lo == b.lo and a.hi == b.hi,
                       f"Bound4 = [{a.lo!r}, {a.hi!r}] on two runs"))
    led = build_ledger(LedgerConfig(products="pinned"))
    with _Timer() as t:
        rows = []
        for args, lit in ((("1.2", 9, 12, 0, 30), "0.59751334145858"),
                          (("2.2", 12, 16, 0, 61), "0.4987002674334"),
                          (("5.2", 16, 33, 0, 80), "0.4669804238966")):
            u = u_bound(Interval.exact(args[0]), *args[1:], led, rounded=True)
            rows.append((lit, u, abs(u.hi - float(lit)) <= 1e-9 or u.contains(Fraction(lit))))
    out.append(Outcome("7.u-bound", all(r[2] for r in rows),
                       "; ".join(f"{lit}: [{u.lo:.13f}, {u.hi:.13f}]" for lit, u, _ in rows), t.s))
    return out


# 8 -------------------------------------------------------------------------

def optimizer_parity(variant: str = "sage") -> list[Outcome]:
    led = build_ledger(LedgerConfig(products="pinned"))
    with _Timer() as t:
        rows = omega_table(led, variant, "min-gap")
    off = [(r["S"], r["T"], r["R"], r["R_ref"]) for r in rows if abs(r["R"] - r["R_ref"]) > 2]
    worst = max(abs(r["R"] - r["R_ref"]) for r in rows)
    return [Outcome(f"8.optimizer-{variant}", not off,
                    f"{len(rows)} (S, T) cells, min-gap R within 2 of the table (worst {worst}); "
                    f"off: {off}", t.s)]


# 9 -------------------------------------------------------------------------

def end_to_end(samples: int = 200, seed: int = 20240601) -> list[Outcome]:
    led = build_ledger(LedgerConfig(products="pinned"))
    ab = AbCoefficients.from_ledger(led)
    S, R = 25, 43
    bound = max(omega1(R, 422, 10**7, led, ab).hi, omega2(R, S, 422, 10**7, led, ab).hi)
    rng = random.Random(seed)
    worst, neg, over = 0.0, 0, 0
    with _Timer() as t:
        for _ in range(samples):
            X = rng.randint(422, 2500)
            e = rng.uniform(0.0, 1 / 25)
            v = s_eps_bruteforce(X, e)
            worst = max(worst, v.hi)
            neg += v.hi < 0
            over += v.hi > bound
    return [Outcome("9.domination", neg == 0 and over == 0,
                    f"{samples} samples X in [422, 2500], eps <= 1/25: max S_eps {worst:.6f} "
                    f"<= max(Omega1, Omega2) = {bound:.6f}; negatives {neg}", t.s)]


# 10 ------------------------------------------------------------------------

_BINARY = {"add": lambda a, b: a + b, "sub": lambda a, b: a - b,
           "mul": lambda a, b: a * b, "div": lambda a, b: a / b}


def interval_soundness(n: int = 10**5, seed: int = 7) -> list[Outcome]:
    mpmath.mp.prec = 200
    rng = random.Random(seed)
    mp = mpmath.mpf
    bad = 0

    def rand_iv(positive=False):
        a = rng.uniform(-50, 50) if not positive else rng.uniform(1e-6, 50)
        if rng.random() < 0.3:
            a *= 10.0 ** rng.randint(-12, 12)
            if positive:
                a = abs(a) + 1e-300
        w = abs(a) * rng.choice([0.0, 1e-16, 1e-8, 1e-3, 0.5]) if rng.random() < 0.9 else rng.uniform(0, 3)
        lo, hi = a, a + w
        if positive:
            lo = max(lo, 1e-300)
        return Interval(lo, hi)

    def pick(x: Interval):
        r = rng.random()
        return mp(x.lo) if r < 0.3 else mp(x.hi) if r < 0.6 else mp(x.lo) + (mp(x.hi) - mp(x.lo)) * mp(rng.random())

    def inside(z: Interval, v) -> bool:
        return mp(z.lo) <= v <= mp(z.hi)

    ops = ("add", "sub", "mul", "div", "sqrt", "exp", "log", "log1p", "rpow", "ipow")
    with _Timer() as t:
        for k in range(n):
            op = ops[k % len(ops)]
            if op in ("add", "sub", "mul", "div"):
                a, b = rand_iv(), rand_iv(positive=(op == "div"))
                x, y = pick(a), pick(b)
                f = _BINARY[op]
                z, v = f(a, b), f(x, y)
            elif op == "exp":
                a = Interval(*sorted((rng.uniform(-700, 700), rng.uniform(-700, 700))))
                if a.width > 5:
                    a = Interval(a.lo, a.lo + rng.uniform(0, 5))
                z, v = a.exp(), mpmath.exp(pick(a))
            elif op == "log1p":
                a = Interval(*sorted((rng.uniform(-0.999, 50), rng.uniform(-0.999, 50))))
                z, v = a.log1p(), mpmath.log1p(pick(a))
            elif op == "rpow":
                a = rand_iv(positive=True)
                e = Interval(*sorted((rng.uniform(-3, 3), rng.uniform(-3, 3))))
                if a.hi > 1e6 or a.lo < 1e-6:
                    a = Interval(0.5, 2.0)
                z, v = a.rpow(e), pick(a) ** pick(e)
            elif op == "ipow":
                a, m = rand_iv(), rng.randint(0, 7)
                if max(abs(a.lo), abs(a.hi)) > 1e20:
                    a = Interval(-3.0, 2.0)
                z, v = a ** m, pick(a) ** m
            else:
                a = rand_iv(positive=True)
                z = a.sqrt() if op == "sqrt" else a.log()
                v = (mpmath.sqrt if op == "sqrt" else mpmath.log)(pick(a))
            if not inside(z, v):
                bad += 1
    return [Outcome("10.intervals", bad == 0, f"{n} random containment checks over {len(ops)} operations, "
                    f"{bad} violations", t.s)]


ALL = {
    1: oracle_equivalence, 2: mertens_recombination, 3: s0_bracket, 4: maxima_scans,
    5: product_containment, 6: full_m_products, 7: threshold_and_bounds, 8: optimizer_parity,
    9: end_to_end, 10: interval_soundness,
}


def run_all(scale: Scale = Scale(), only: list[int] | None = None) -> list[Outcome]:
    out: list[Outcome] = []
    for k, fn in ALL.items():
        if only and k not in only:
            continue
        if k == 3:
            out += fn(11 * 10**6 if scale.full_scan else scale.s0_limit)
        elif k == 4:
            out += fn(scale.scan_limit)
        elif k == 5:
            out += fn(scale.product_M)
        elif k == 6:
            if scale.full_M:
                out += fn()
        elif k == 8:
            out += fn("sage") + fn("display")
        elif k == 9:
            out += fn(scale.samples, scale.seed)
        elif k == 10:
            out += fn(scale.interval_checks)
        else:
            out += fn()
    return out
