"""Constant ledger, mean-value enclosures and the S_0 bound table.

Every named constant of the S_0 / S_eps bounds is an entry of a
``ConstantLedger``.  Entries are evaluated in dependency order from three
kinds of input: Euler products computed here (``computed@M``), values the
reference computation hard-codes (``paper-pinned``) and maxima re-scanned
at desk scale (``desk-scanned@limit``).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import TopologicalSorter
from pathlib import Path
from typing import Callable

import numba
import numpy as np

from .euler_enclosures import (PRODUCTS, SUMS, PrimeSource, enclose_prime_sum, enclose_product,
                               eval_scalar, product_tail_range)
from .interval import EULER_GAMMA, LOG2, LOG10, PI, SQRT2, Interval, coerce, decimal_text, log, sqrt
from .mertens import lemma_coprime_extremes, mobius_upto
from .prime_tails import c_kappa, sum_tail
from .s0_direct import scan_mean
from .sieves import G0_2, RHO, XI, factorize, g2_at_2, primes_upto

UNIT = 2.0**-53
PINNED_M = 10**8
PI_PINNED_M = 5_761_455        # pi(10^8)
THETA_FLOOR_PINNED_M = 99_987_730  # floor(theta(10^8))
THRESHOLD_PRIMES = tuple(primes_upto(80).tolist())
LEDGER_SCHEMA = 1

COMPUTED, PINNED, SCANNED = "computed", "paper-pinned", "desk-scanned"


def imax(*xs) -> Interval:
    out = coerce(xs[0])
    for x in xs[1:]:
        out = out.max(x)
    return out


def delta_constant(d) -> Interval:
    """max(gamma, 1 / (d e^{gamma d + 1}))."""
    d = coerce(d)
    return imax(EULER_GAMMA, 1 / (d * (EULER_GAMMA * d + 1).exp()))


# ---------------------------------------------------------------------------
# ledger

@dataclass(frozen=True)
class LedgerEntry:
    name: str
    value: Interval
    provenance: str
    digits: int
    literal: str | None = None
    role: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "lo": self.value.lo, "hi": self.value.hi,
                "digits": self.digits, "provenance": self.provenance,
                "literal": self.literal, "role": self.role,
                "lower": decimal_text(self.value.lo, self.digits, "down"),
                "upper": decimal_text(self.value.hi, self.digits, "up")}


@dataclass
class ConstantLedger:
    entries: dict[str, LedgerEntry] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> Interval:
        return self.entries[name].value

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def entry(self, name: str) -> LedgerEntry:
        return self.entries[name]

    def to_json(self) -> dict:
        return {"schema": LEDGER_SCHEMA, "config": self.config,
                "entries": [e.to_json() for e in self.entries.values()]}

    def export_json(self, path: str | Path) -> None:
        write_atomic(path, json.dumps(self.to_json(), indent=2) + "\n")

    def table(self) -> str:
        rows = [("name", "lower", "upper", "provenance", "literal")]
        for e in self.entries.values():
            j = e.to_json()
            rows.append((e.name, j["lower"], j["upper"], e.provenance, e.literal or ""))
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# mean values

@dataclass(frozen=True)
class MeanValueSpec:
    """Bound sum_{l <= X} mu^2(l) f(l) <= X^{1-alpha} (leading + err X^-e).

    ``f2`` is f(2) 2^alpha.  Route ``convolution`` takes the error exponent
    e = delta, route ``edge`` takes e = 1/2 - alpha with weight ``w_edge``
    built from E1, E2.  The lemma constant is max(bound at T, scanned max)."""
    name: str
    alpha: Fraction
    f2: Interval
    product: str
    error_product: str
    route: str = "convolution"
    delta: Fraction | None = None
    T: int = 0
    scan: str | None = None
    scan_literal: str | None = None

    def validate(self) -> None:
        if self.route == "convolution":
            if self.delta is None or not 0 < self.delta < Fraction(1, 2) or self.alpha > Fraction(1, 2):
                raise ValueError(f"{self.name}: need alpha <= 1/2 and 0 < delta < 1/2")
        elif self.route == "edge":
            if self.alpha >= Fraction(1, 2):
                raise ValueError(f"{self.name}: edge route needs alpha < 1/2")
        else:
            raise ValueError(f"unknown route {self.route!r}")

    def factor_at_2(self) -> Interval:
        return 1 - (1 - self.f2) / 2 - self.f2 / 4

    def error_factor_at_2(self) -> Interval:
        d = self.delta
        return 1 + abs(1 - self.f2) / Interval.point(2).rpow(1 - d) + abs(self.f2) / Interval.point(2).rpow(2 - 2 * d)

    def exponent(self) -> Fraction:
        return self.delta if self.route == "convolution" else Fraction(1, 2) - self.alpha


E1 = Interval.exact("1.044")
E2 = Interval.exact("0.232")
SQ2M1 = SQRT2 - 1


def edge_weight(f2: Interval) -> Interval:
    """w' at an odd modulus: (sqrt2-1)/(sqrt2-1+|f2-1|) (E1 + |f2-1| E2/(sqrt2-1))."""
    d = abs(f2 - 1)
    return SQ2M1 / (SQ2M1 + d) * (E1 + d * E2 / SQ2M1)


def mean_value_enclosure(spec: MeanValueSpec, product: Interval, error_product: Interval
                         ) -> tuple[Interval, Interval]:
    """(leading, error coefficient) from the two Euler product enclosures."""
    spec.validate()
    a = spec.alpha
    lead = spec.factor_at_2() * product / (1 - Interval.point(a))
    if spec.route == "convolution":
        d = spec.delta
        k = (2 - 2 * a - d) / (1 - a - d)
        err = Interval.point(k) * delta_constant(d) * spec.error_factor_at_2() * error_product
    else:
        k = 1 + (2 - 2 * a) / (1 - 2 * a)
        err = Interval.point(k) * edge_weight(spec.f2) * error_product
    return lead, err


def mean_value_bound(spec: MeanValueSpec, product: Interval, error_product: Interval,
                     T=None) -> Interval:
    lead, err = mean_value_enclosure(spec, product, error_product)
    T = coerce(spec.T if T is None else T)
    return lead + err * T.rpow(-spec.exponent())


def _sq2m1_sq():
    return SQ2M1 * SQ2M1


G2_2 = g2_at_2()
F2_AUX2 = G0_2 * G2_2 * (1 + (Interval.point(2).rpow(XI - Fraction(1, 2)) + 1) / (Interval.point(2).rpow(XI) - 1))
F2_AUX3 = G2_2 * G2_2 * Interval.point(2).rpow(2 * XI - 1) / (Interval.point(2).rpow(XI) - 1) ** 2

MEAN_VALUES: dict[str, MeanValueSpec] = {s.name: s for s in (
    MeanValueSpec("TH1", Fraction(0), G0_2 * G0_2 / _sq2m1_sq(), "P1_M", "P1_delta2_M",
                  delta=Fraction(5, 12), T=4 * 10**9, scan="Sigma1", scan_literal="2.06803754617859"),
    MeanValueSpec("THx1", Fraction(0), 1 / _sq2m1_sq(), "P1_M", "P1_delta2_M",
                  delta=Fraction(5, 12), T=4 * 10**9, scan="sigma1", scan_literal="6.2359917454422"),
    MeanValueSpec("THx2", Fraction(0), G0_2 / _sq2m1_sq(), "P1_M", "P1_delta2_M",
                  delta=Fraction(5, 12), T=4 * 10**9, scan="sigma2", scan_literal="3.16843122347233"),
    MeanValueSpec("TH2", Fraction(0), F2_AUX2, "P2", "P2_delta",
                  delta=Fraction(1, 3), T=10**7, scan="aux2", scan_literal="1.90380793763037"),
    MeanValueSpec("TH3", Fraction(0), F2_AUX3, "P3", "P3_spec", route="edge",
                  T=10**6, scan="aux3", scan_literal="2.67710025"),
    MeanValueSpec("THxxx_aux11", Fraction(1, 2), (SQRT2 + 1) / 2 * SQRT2, "P1x", "P1x_delta",
                  delta=Fraction(1, 3), T=5 * 10**6, scan="Xi1", scan_literal="2.2526506709"),
    MeanValueSpec("THx_aux11", Fraction(1, 2), G0_2 * (SQRT2 + 1) / 2 * SQRT2, "P1x", "P1x_delta",
                  delta=Fraction(1, 3), T=5 * 10**6, scan="Xi2", scan_literal="1.587160669"),
)}

PRODUCT_NAMES = ("P1_M", "P1_delta1_M", "P1_delta2_M", "P1_delta3_M", "P2", "P2_delta", "P3",
                 "P3_spec", "P1x", "P1x_delta", "P0_LX", "P0_LX_corrected", "P1_LX", "AP0_LX",
                 "AP1_LX", "APROD", "PPdelta")
SUM_NAMES = ("ASUM", "Sumx", "ASumx")


def pinned_product(name: str) -> Interval:
    """The printed truncated product at M = 10^8 times the certified tail range there."""
    spec = PRODUCTS[name]
    if spec.literal is None:
        raise KeyError(f"{name} has no printed value")
    return Interval.exact(spec.literal) * product_tail_range(spec, PINNED_M, PI_PINNED_M)


@dataclass(frozen=True)
class LedgerConfig:
    M: int = 10**5
    products: str = "computed"  # computed or pinned
    scan_limit: int = 0         # 0 keeps the pinned scan maxima
    digits: int = 4
    threads: int = 1
    threshold: str = "pinned"   # pinned or computed threshold sums


def _compute_products(cfg: LedgerConfig) -> tuple[dict[str, Interval], dict[str, Interval], int]:
    src = PrimeSource(max(cfg.M, 3_594_642))
    with ThreadPoolExecutor(max_workers=max(1, cfg.threads)) as ex:
        prods = dict(zip(PRODUCT_NAMES, ex.map(lambda n: enclose_product(PRODUCTS[n], cfg.M, src),
                                               PRODUCT_NAMES)))
        sums_mc = list(ex.map(lambda n: enclose_prime_sum(SUMS[n], cfg.M, src), SUM_NAMES))
    sums = {n: v for n, (v, _) in zip(SUM_NAMES, sums_mc)}
    return prods, sums, sums_mc[0][1]


def _pinned_sums() -> dict[str, Interval]:
    out = {}
    for n in SUM_NAMES:
        spec = SUMS[n]
        v = Interval.exact(spec.literal)
        if n == "ASUM":
            v = v - EULER_GAMMA  # the printed value already contains gamma
        for t in spec.tails:
            C = c_kappa(eval_scalar(t.kappa, 2), PINNED_M, THETA_FLOOR_PINNED_M)
            v = sum_tail(v, t.c_M(PINNED_M), C, "nonneg" if t.side == "upper" else "nonpos")
        out[n] = v
    return out


Rule = tuple[tuple[str, ...], Callable[..., Interval], str]


def _rules() -> dict[str, Rule]:
    """name -> (dependencies, function of those values, role)."""
    ln10 = LOG10
    r: dict[str, Rule] = {}

    def add(name, deps, fn, role=""):
        r[name] = (tuple(deps), fn, role)

    add("c_1", ("F2_LX", "P0_LX"), lambda F, P: F * P, "K_1 leading constant, local factor as printed")
    add("lc1", ("c_1",), lambda c: Interval(c.lo, c.lo), "lower end of c_1")
    add("uc1", ("c_1",), lambda c: Interval(c.hi, c.hi), "upper end of c_1")
    add("c_1_corrected", ("F2_LX", "P0_LX_corrected"), lambda F, P: F * P,
        "K_1 leading constant with the local factor's constant term +1")
    add("c_2", ("AF2_LX", "AP0_LX"), lambda F, P: F * P, "K_2 leading constant")
    add("lc2", ("c_2",), lambda c: Interval(c.lo, c.lo))
    add("uc2", ("c_2",), lambda c: Interval(c.hi, c.hi))
    add("loglemma1_1", ("uc1",), lambda u: u)
    add("loglemma1_2", ("logmx",), lambda m: m / (12 * ln10))
    add("loglemma2", ("uc2", "log2mx"), lambda u, m: u / (12 * ln10) + m / (12 * ln10) ** 2)
    add("L1", ("TH2",), lambda t: 2 * t / 2 / ln10 / 12 + t / ln10 / 12, "Sigma_2 coefficient")
    add("L2", ("TH3",), lambda t: t * (1 / (12 * ln10) - 1 / (12 * ln10) ** 2) + t / (12 * ln10) ** 2,
        "Sigma_3 coefficient")
    add("W2", ("E1", "E2"), lambda e1, e2: SQ2M1 / (SQ2M1 + Fraction(1, 2)) * (e1 + e2 / 2 / SQ2M1),
        "odd-modulus weight of G_q")
    add("G1", ("W2", "P"), lambda w, p: w * p, "G_q error constant, q odd")
    add("G2", ("E2", "P"), lambda e, p: e * p, "G_q error constant, q even")
    add("Z_80", (), lambda: Interval.exact("80.9999"))
    add("Thresh33_1", ("TH1", "H1", "L1", "L2", "Z_80"),
        lambda t, h, l1, l2, z: 2 * t / z + 2 * SQRT2 * h * l1 / z.sqrt() + h * h * l2)
    add("Thresh33_2", ("W", "S11_80", "S12_80", "G1", "G2"),
        lambda w, s1, s2, g1, g2: w * (s1 + LOG2) + (g2 * s2 + g1 * (1 + SQRT2)) / sqrt(10**33))
    add("Bound4", ("Thresh33_1", "Thresh33_2"), lambda a, b: a + b, "S_0 bound for X >= 10^33")
    add("ax_1", ("Harm1", "Harm2"),
        lambda h1, h2: (6 / PI**2 * log(Fraction(109, 50)) + h2 - h1) / 30)
    add("ax_2", (), lambda: Interval.exact(Fraction(2323, 30030)).max(Interval.exact(Fraction(57731, 570570))),
        "max of the two printed extremes")
    add("ax_2_recomputed", (), _ax2_recomputed, "max of the exact coprime extremes")
    add("subs", (), lambda: 1 - Interval.exact("0.1012"))
    add("c", (), lambda: Interval.exact("0.001"), "Bohr constant")
    add("value1", (), lambda: Interval.exact("9.1"))
    add("Fx1_2", (), lambda: MEAN_VALUES["THx1"].factor_at_2())
    add("F1_2", (), lambda: MEAN_VALUES["TH1"].factor_at_2())
    add("F2_2", (), lambda: MEAN_VALUES["TH2"].factor_at_2())
    add("F3_2", (), lambda: MEAN_VALUES["TH3"].factor_at_2())
    add("W3", (), lambda: edge_weight(F2_AUX3), "edge weight of the m_2 mean value")
    add("F2_LX", (), lambda: _f2_lx_factor(1))
    add("AF2_LX", (), lambda: _f2_lx_factor(2))
    return r


def _f2_lx_factor(power: int) -> Interval:
    two_xi = Interval.point(2).rpow(XI)
    f = G2_2**power / 4 * two_xi**power / (two_xi - 1) ** power
    return 1 - (1 - 2 * f) / 2 - f / 2


def _ax2_recomputed() -> Interval:
    lo, hi = lemma_coprime_extremes()
    return Interval.exact(-lo).max(Interval.exact(hi))


PINNED_LITERALS = {
    "E1": "1.044", "E2": "0.232", "H1": "0.010032", "H2": "0.0296",
    "Harm1": "1.040", "Harm2": "1.048", "Harm1_a": "0.578", "Harm2_a": "1.166",
    "logmx": "1.29424331261228", "logmm": "0.505508801388535",
    "log2mx": "1.29424331261228", "log2mm": "0.505508801388535",
    "S11_80": "0.333415398793", "S12_80": "41346.25411",
    "Bound0": "0.445", "Bound1": "0.59751334145858", "Bound2": "0.4987002674334",
    "Bound3": "0.4669804238966",
}


def build_ledger(cfg: LedgerConfig = LedgerConfig()) -> ConstantLedger:
    """Evaluate every constant in dependency order."""
    led = ConstantLedger(config={"M": cfg.M, "products": cfg.products, "scan_limit": cfg.scan_limit,
                                 "digits": cfg.digits, "threshold": cfg.threshold})
    d = cfg.digits
    values: dict[str, LedgerEntry] = {}

    def put(name, value, prov, literal=None, role=""):
        values[name] = LedgerEntry(name, value, prov, d, literal, role)

    for name, lit in PINNED_LITERALS.items():
        put(name, Interval.exact(lit), PINNED, lit)
    put("xi", XI, "exact", role="1 - 1/(12 log 10)")
    put("rho", RHO, "exact", role="H2/H1")

    if cfg.products == "computed":
        prods, sums, mc = _compute_products(cfg)
        prov, sprov = f"{COMPUTED}@M={cfg.M}", f"{COMPUTED}@M={mc}"
    elif cfg.products == "pinned":
        prods = {n: pinned_product(n) for n in PRODUCT_NAMES if PRODUCTS[n].literal}
        prods["P0_LX_corrected"] = enclose_product(PRODUCTS["P0_LX_corrected"], cfg.M)
        sums = _pinned_sums()
        prov = sprov = PINNED
    else:
        raise ValueError(f"products must be computed or pinned, not {cfg.products!r}")
    for n, v in prods.items():
        p = prov if not (n == "P0_LX_corrected" and prov == PINNED) else f"{COMPUTED}@M={cfg.M}"
        put(n, v, p, PRODUCTS[n].literal)
    for n, v in sums.items():
        if n == "ASUM":
            continue
        put(n, v, sprov, SUMS[n].literal)
    put("W", prods["APROD"], values["APROD"].provenance, "0.40282372", "prod (1 - 2/p^2 + 1/p^3)")
    put("P", prods["PPdelta"], values["PPdelta"].provenance, None, "prod (1 + 1/(p^1.5 - p))")
    put("ASUM", EULER_GAMMA + sums["ASUM"], sprov, "2.046752376",
        "gamma + sum (3p-2) log p / ((p-1)(p^2+p-1))")

    for name, spec in MEAN_VALUES.items():
        v = mean_value_bound(spec, prods[spec.product], prods[spec.error_product])
        put("v_" + name, v, values[spec.product].provenance, role=f"analytic bound at T={spec.T}")
        if cfg.scan_limit:
            rep = scan_mean(spec.scan, cfg.scan_limit)
            m, mprov = rep.max, f"{SCANNED}@limit={cfg.scan_limit}"
        else:
            m, mprov = Interval.exact(spec.scan_literal), PINNED
        put("mx_" + name, m, mprov, spec.scan_literal, f"max over X <= {cfg.scan_limit or spec.T}")
        put(name, v.max(m), values["v_" + name].provenance if v.hi >= m.hi else mprov)

    if cfg.threshold == "computed":
        s1, s2 = threshold_sums(80)
        put("S11_80", s1, COMPUTED, PINNED_LITERALS["S11_80"])
        put("S12_80", s2, COMPUTED, PINNED_LITERALS["S12_80"])

    rules = _rules()
    order = TopologicalSorter({n: set(deps) for n, (deps, _, _) in rules.items()}).static_order()
    for name in order:
        if name in values:
            continue
        if name not in rules:
            raise KeyError(f"unresolved ledger dependency {name!r}")
        deps, fn, role = rules[name]
        v = fn(*(values[x].value for x in deps))
        provs = {p for x in deps for p in values[x].provenance.split(" + ")} - {"derived", "exact"}
        prov = " + ".join(sorted(provs)) or "derived"
        put(name, v, prov, role=role)
    led.entries = values
    return led


# ---------------------------------------------------------------------------
# S_0 pieces

def tail_lemma(X, D, ledger: ConstantLedger) -> Interval:
    """2 TH1 (D/X) + 2 sqrt2 H1 L1 sqrt(D/X) + H1^2 L2, for X >= D >= 0."""
    X, D = coerce(X), coerce(D)
    if X.lo <= 0 or D.lo < 0 or D.hi > X.lo:
        raise ValueError("tail_lemma needs X >= D >= 0 and X > 0")
    r = D / X
    h = ledger["H1"]
    return 2 * ledger["TH1"] * r + 2 * SQRT2 * h * ledger["L1"] * r.sqrt() + h * h * ledger["L2"]


def _radical(q: int) -> list[int]:
    return sorted(factorize(q)) if q > 1 else []


def getgq(q: int, X, ledger: ConstantLedger) -> tuple[Interval, Interval]:
    """(main, err) with G_q(X) in main + [-err, err]."""
    X = coerce(X)
    if X.lo <= 0:
        raise ValueError("X must be positive")
    r, c, t = Interval.point(1), Interval.point(0), Interval.point(1)
    for p in _radical(q):
        pi = Interval.point(p)
        den = pi * pi + pi - 1
        r = r * pi * pi / den
        c = c + (pi - 1) * pi.log() / den
        p32 = pi.rpow(Fraction(3, 2))
        t = t * p32 / (p32 - pi + 1)
    main = ledger["W"] * r * (X.log() + c + ledger["ASUM"])
    err = (ledger["G2"] if q % 2 == 0 else ledger["G1"]) * t / X.sqrt()
    return main, err


# threshold sums ---------------------------------------------------------------

def _squarefree_terms(j: int) -> tuple[np.ndarray, np.ndarray]:
    """Prime masks and mu(m)/m for squarefree m <= j."""
    masks, vals = [], []
    for m in range(1, j + 1):
        x, mask, mu = m, 0, 1
        for i, p in enumerate(THRESHOLD_PRIMES):
            if x % p == 0:
                x //= p
                if x % p == 0:
                    mu = 0
                    break
                mask |= 1 << i
                mu = -mu
        if mu:
            masks.append(mask)
            vals.append(mu / m)
    return np.array(masks, dtype=np.int64), np.array(vals)


@numba.njit(cache=True)
def _subset_tables(k, f1, f2, pr):
    n = 1 << k
    w1, w2, nv = np.empty(n), np.empty(n), np.empty(n)
    om = np.empty(n, np.int64)
    w1[0] = w2[0] = nv[0] = 1.0
    om[0] = 0
    for N in range(1, n):
        b = 0
        while not (N >> b) & 1:
            b += 1
        M = N & (N - 1)
        w1[N] = w1[M] * f1[b]
        w2[N] = w2[M] * f2[b]
        nv[N] = nv[M] * pr[b]
        om[N] = om[M] + 1
    return w1, w2, nv, om


@numba.njit(cache=True)
def _inner_sums(k, masks, vals, w1, w2, nv, om, cap, em):
    """sum over n | Pi(j), n <= cap of w(n) m_n(j)^2 for both weights, with error bounds."""
    u = 2.0**-53
    s1 = s2 = e1 = e2 = 0.0
    cnt = 0
    for N in range(1 << k):
        if nv[N] > cap:
            continue
        mv = 0.0
        for i in range(masks.size):
            if masks[i] & N == 0:
                mv += vals[i]
        sq = mv * mv
        dsq = 2 * abs(mv) * em + em * em + u * sq
        t1, t2 = w1[N] * sq, w2[N] * sq
        rel = (3 * om[N] + 5) * u
        e1 += w1[N] * dsq + rel * t1
        e2 += w2[N] * dsq + rel * t2
        s1 += t1
        s2 += t2
        cnt += 1
    e1 += cnt * u * s1
    e2 += cnt * u * s2
    return s1, s2, e1 * (1 + 1e-9), e2 * (1 + 1e-9)


_TABLES: dict = {}


def _tables():
    if not _TABLES:
        pr = np.array(THRESHOLD_PRIMES, dtype=np.float64)
        f1 = (pr - 1) / pr**2
        f2 = (pr - 1) / (pr * np.sqrt(pr))
        _TABLES["t"] = _subset_tables(len(pr), f1, f2, pr)
    return _TABLES["t"]


def _prefactors(j: int) -> tuple[Interval, Interval]:
    r, t = Interval.point(1), Interval.point(1)
    for p in THRESHOLD_PRIMES:
        if p > j:
            break
        pi = Interval.point(p)
        r = r * pi * pi / (pi * pi + pi - 1)
        p32 = pi.rpow(Fraction(3, 2))
        t = t * p32 / (p32 - pi + 1)
    return r * (Interval.point(j + 1) / j).log(), t * (sqrt(j + 1) + sqrt(j))


def threshold_terms(j: int, cap: float = math.inf) -> tuple[Interval, Interval]:
    """The j-th terms of S1 and S2, with n restricted to n <= cap."""
    if not 2 <= j <= 80:
        raise ValueError(f"j must lie in [2, 80], got {j}")
    w1, w2, nv, om = _tables()
    k = sum(1 for p in THRESHOLD_PRIMES if p <= j)
    masks, vals = _squarefree_terms(j)
    em = (vals.size + 1) * UNIT * float(np.abs(vals).sum()) * (1 + 1e-9)
    # n is formed in floating point with relative error below 22u, so the
    # widened cap keeps every n <= cap (and perhaps a few more nonnegative terms)
    c = cap * (1 + 2.0**-40) if math.isfinite(cap) else math.inf
    s1, s2, e1, e2 = _inner_sums(k, masks, vals, w1, w2, nv, om, c, em)
    a, b = _prefactors(j)
    return a * Interval(s1 - e1, s1 + e1), b * Interval(s2 - e2, s2 + e2)


def threshold_sums(J: int, cap: float = math.inf) -> tuple[Interval, Interval]:
    """(S1, S2) summed over 1 < j <= J; ``cap`` bounds n (inf drops the condition)."""
    if J > 80:
        raise ValueError("threshold sums are set up for J <= 80")
    S1, S2 = Interval.point(0), Interval.point(0)
    for j in range(2, J + 1):
        a, b = threshold_terms(j, cap)
        S1, S2 = S1 + a, S2 + b
    return S1, S2


def threshold_inner_exact(j: int) -> Fraction:
    """Exact inner sum of the j-th S1 term, over all n | Pi(j)."""
    ps = [p for p in THRESHOLD_PRIMES if p <= j]
    mu = mobius_upto(j)
    out1 = Fraction(0)
    for N in range(1 << len(ps)):
        n = math.prod(p for i, p in enumerate(ps) if N >> i & 1)
        w = Fraction(math.prod(p - 1 for i, p in enumerate(ps) if N >> i & 1), n * n)
        m = sum(Fraction(int(mu[k]), k) for k in range(1, j + 1) if math.gcd(k, n) == 1)
        out1 += w * m * m
    return out1


def u_bound(eta, u: int, v: int, k: int, J: int, ledger: ConstantLedger,
            rounded: bool = False) -> Interval:
    """U(eta; u, v; k, J): bound for S_0(X) on [eta^k 10^u, eta^(k+1) 10^u).

    ``rounded`` replaces each scalar coefficient by its upper 4-digit
    decimal, as the printed bound table does."""
    eta = coerce(eta)
    if not eta.lo > 1:
        raise ValueError("eta must exceed 1")
    if not u < v <= 33:
        raise ValueError("need u < v <= 33")
    if not 2 <= J <= 80:
        raise ValueError("need 2 <= J <= 80")
    kmax = math.floor((v - u) * math.log(10) / math.log(eta.mid))
    if not 0 <= k <= kmax:
        raise ValueError(f"k must lie in [0, {kmax}]")
    h = ledger["H1"]
    coef = {"a": 2 * ledger["TH1"], "b": 2 * SQRT2 * h * ledger["L1"], "c": h * h * ledger["L2"],
            "W": ledger["W"], "g1": ledger["G1"] * (1 + SQRT2), "g2": ledger["G2"]}
    if rounded:
        coef = {n: Interval.exact(decimal_text(x.hi, 4, "up")) for n, x in coef.items()}
    low = eta.rpow(k) * Interval.point(10**u)
    high = eta.rpow(k + 1) * Interval.point(10**u)
    Z = Interval.point(J) + Interval.exact("0.9999")
    out = coef["a"] / Z + coef["b"] / Z.sqrt() + coef["c"] + coef["W"] * LOG2 + coef["g1"] / low.sqrt()
    S1, S2 = Interval.point(0), Interval.point(0)
    for j in range(2, J + 1):
        a, b = threshold_terms(j, (high / j).hi)
        S1, S2 = S1 + a, S2 + b
    return out + coef["W"] * S1 + coef["g2"] * S2 / low.sqrt()


THETA_BRACKETS = {(422, 10**7): "Bound0", (10**7, 10**12): "Bound1", (10**12, 10**16): "Bound2",
                  (10**16, 10**33): "Bound3", (10**33, math.inf): "Bound4"}


def theta(T, T0, ledger: ConstantLedger) -> Interval:
    """The S_0 bound valid on [T, T0)."""
    key = (T, math.inf if T0 is None else T0)
    if key not in THETA_BRACKETS:
        raise KeyError(f"unknown bracket {key}; known: {sorted(THETA_BRACKETS)}")
    return ledger[THETA_BRACKETS[key]]


# ---------------------------------------------------------------------------
# checks

def harmonic_window(lo: int = 10**3, hi: int = 10**6) -> tuple[Interval, Interval]:
    """Enclosures of the min and max of sum_{l <= X} mu^2(l)/l - (6/pi^2) log X over lo <= X <= hi.

    The function decreases between integers, so the max is taken at integers
    and the inf over [n, n+1) is the value at n minus (6/pi^2) log(n+1)."""
    mu = mobius_upto(hi + 1)
    n = np.arange(hi + 2, dtype=np.float64)
    terms = np.where(mu != 0, 1.0 / np.maximum(n, 1.0), 0.0)
    terms[0] = 0.0
    pref = np.cumsum(terms)
    err = pref * (hi + 2) * UNIT * 1.01
    c = 6 / PI**2
    x = np.arange(lo, hi + 1)
    S, E = pref[lo:hi + 1], err[lo:hi + 1]
    logx, logx1 = np.log(x.astype(float)), np.log(x + 1.0)
    slack = 8 * UNIT * (np.abs(S) + c.hi * logx1) + E
    vmax = S - c.mid * logx
    vmin = S - c.mid * logx1
    i, k = int(np.argmax(vmax)), int(np.argmin(vmin))
    cw = c.width * float(logx1.max())
    mx = Interval(float(vmax[i] - slack[i] - cw), float(vmax[i] + slack[i] + cw))
    mn = Interval(float(vmin[k] - slack[k] - cw), float(vmin[k] + slack[k] + cw))
    return mn, mx


def log_offset_report(limit: int, ledger: ConstantLedger) -> dict:
    """Desk re-scan of the two logarithmic offset pairs; reports whether they coincide."""
    out = {}
    for fn, cname, names in (("K1", "c_1_corrected", ("logmx", "logmm")), ("K2", "c_2", ("log2mx", "log2mm"))):
        rep = scan_mean(fn, limit, offset=ledger[cname])
        out[fn] = {"max": rep.max, "argmax": rep.argmax, "min": rep.min, "argmin": rep.argmin,
                   "pinned": (ledger[names[0]], ledger[names[1]])}
    a, b = out["K1"], out["K2"]
    out["coincide"] = bool(a["max"].hi >= b["max"].lo and b["max"].hi >= a["max"].lo
                           and a["min"].hi >= b["min"].lo and b["min"].hi >= a["min"].lo)
    return out
