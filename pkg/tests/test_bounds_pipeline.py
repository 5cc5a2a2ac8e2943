import json
import math
from fractions import Fraction

import numpy as np
import pytest

from artifact.bounds_pipeline import (MEAN_VALUES, PINNED_LITERALS, THETA_BRACKETS, ConstantLedger,
                                      LedgerConfig, MeanValueSpec, build_ledger, delta_constant,
                                      edge_weight, getgq, harmonic_window, log_offset_report,
                                      mean_value_bound, tail_lemma, theta, threshold_inner_exact,
                                      threshold_sums, threshold_terms, u_bound)
from artifact.interval import EULER_GAMMA, Interval
from artifact.sieves import squarefree_product


@pytest.fixture(scope="module")
def computed():
    return build_ledger(LedgerConfig(products="computed"))


def test_ledger_names_present(pinned_ledger):
    for name in ("H1", "H2", "E1", "E2", "xi", "TH1", "THx1", "THx2", "TH2", "TH3", "L1", "L2",
                 "THx_aux11", "THxxx_aux11", "lc1", "uc1", "logmx", "logmm", "lc2", "uc2",
                 "log2mx", "log2mm", "loglemma1_1", "loglemma1_2", "loglemma2", "W", "ASUM",
                 "G1", "G2", "ax_1", "ax_2", "subs", "value1", "Harm1", "Harm2", "S11_80",
                 "S12_80", "Bound0", "Bound1", "Bound2", "Bound3", "Bound4", "Z_80", "c"):
        assert name in pinned_ledger, name


def test_pinned_literals_are_carried(pinned_ledger):
    for name, lit in PINNED_LITERALS.items():
        e = pinned_ledger.entry(name)
        assert e.value.contains(Fraction(lit)), name
        assert e.provenance == "paper-pinned"


def test_scan_maxima_dominate(pinned_ledger):
    # TH2 and TH3 are the scanned maxima, TH1 the product bound at T
    assert pinned_ledger["TH2"].hi == pytest.approx(1.90380793763037, rel=1e-15)
    assert pinned_ledger["TH3"].hi == pytest.approx(2.67710025, rel=1e-15)
    assert 2.1204 < pinned_ledger["TH1"].hi < 2.1206


def test_derived_values(pinned_ledger):
    assert pinned_ledger["L1"].hi == pytest.approx(0.13780221365, rel=1e-10)
    assert pinned_ledger["L2"].hi == pytest.approx(0.09688748884, rel=1e-10)
    assert pinned_ledger["ax_2_recomputed"].contains(Fraction(69, 455))
    assert pinned_ledger["ax_2"].hi < pinned_ledger["ax_2_recomputed"].lo
    assert pinned_ledger["Z_80"].contains(Fraction("80.9999"))


def test_sign_typo_in_c1(pinned_ledger):
    # the printed c_1 uses P0_LX; the sign-corrected product gives a larger c_1
    assert 0.6030 < pinned_ledger["c_1"].lo <= pinned_ledger["c_1"].hi < 0.6031
    assert 0.7133 < pinned_ledger["c_1_corrected"].lo <= pinned_ledger["c_1_corrected"].hi < 0.7134


def test_computed_w_exceeds_pinned(computed, pinned_ledger):
    assert computed["W"].lo > 0.4282 and pinned_ledger["W"].hi < 0.4029
    assert computed.entry("W").provenance.startswith("computed")
    assert computed["Bound4"].lo > pinned_ledger["Bound4"].hi


def test_computed_products_contain_literals(computed):
    for name in ("P1_M", "P2", "P3", "P1x", "PPdelta"):
        assert computed.entry(name).value.contains(Fraction(computed.entry(name).literal)), name


def test_asum_literal_includes_gamma(computed):
    lit = Fraction("2.046752376")
    assert computed["ASUM"].contains(lit)
    assert not (computed["ASUM"] + EULER_GAMMA).contains(lit)


def test_json_roundtrip(tmp_path, pinned_ledger):
    path = tmp_path / "ledger.json"
    pinned_ledger.export_json(path)
    doc = json.loads(path.read_text())
    assert doc["schema"] == 1
    rows = {r["name"]: r for r in doc["entries"]}
    assert rows["Bound1"]["upper"] == "0.5976" and rows["Bound1"]["provenance"] == "paper-pinned"
    assert rows["W"]["literal"] == "0.40282372"
    assert not (tmp_path / "ledger.json.tmp").exists()
    assert "Bound4" in pinned_ledger.table()


def test_ledger_is_deterministic():
    cfg = LedgerConfig(products="pinned")
    a, b = build_ledger(cfg).to_json(), build_ledger(cfg).to_json()
    assert a == b


def test_mean_value_specs_validate():
    for spec in MEAN_VALUES.values():
        spec.validate()
    bad = MeanValueSpec("x", Fraction(1, 2), Interval(1.0, 1.0), "P1x", "P1x_delta", delta=Fraction(3, 4))
    with pytest.raises(ValueError):
        bad.validate()


def test_mean_value_bound_scan_dominates_for_aux2(pinned_ledger):
    spec = MEAN_VALUES["TH2"]
    v = mean_value_bound(spec, pinned_ledger["P2"], pinned_ledger["P2_delta"])
    assert v.hi < 1.9038079376303
    assert pinned_ledger["TH2"].hi >= v.hi


def test_edge_weight_at_one():
    # f(2) = 1 leaves only E1
    assert edge_weight(Interval(1.0, 1.0)).contains(Fraction("1.044"))
    assert edge_weight(Interval(2.0, 2.0)).lo > 1.044 * 0.29


def test_delta_constant():
    d = delta_constant(Fraction(1, 3))
    assert d.lo > float(EULER_GAMMA.hi)
    assert delta_constant(Fraction(1, 1)).contains(EULER_GAMMA)


def test_tail_lemma_limits(pinned_ledger):
    h = pinned_ledger["H1"]
    base = h * h * pinned_ledger["L2"]
    assert tail_lemma(100, 0, pinned_ledger).hi == pytest.approx(base.hi)
    assert tail_lemma(100, 100, pinned_ledger).lo > 2 * pinned_ledger["TH1"].lo
    with pytest.raises(ValueError):
        tail_lemma(10, 11, pinned_ledger)


def test_getgq_error_weights(pinned_ledger):
    m1, e1 = getgq(1, 10**6, pinned_ledger)
    m2, e2 = getgq(2, 10**6, pinned_ledger)
    assert e1.hi == pytest.approx(pinned_ledger["G1"].hi / 1000)
    assert e2.lo > pinned_ledger["G2"].lo / 1000
    assert m2.hi < m1.lo
    with pytest.raises(ValueError):
        getgq(3, 0, pinned_ledger)


def _g_direct(X, q):
    v, _ = squarefree_product(X, lambda p: (p - 1.0) / p**2)
    n = np.arange(X + 1)
    return math.fsum(v[np.gcd(n, q) == 1].tolist())


@pytest.mark.parametrize("X", [10**3, 10**5])
@pytest.mark.parametrize("q", [1, 2, 3, 6, 30])
def test_getgq_brackets_direct_sum_with_computed_w(computed, X, q):
    m, e = getgq(q, X, computed)
    assert m.lo - e.hi <= _g_direct(X, q) <= m.hi + e.hi


def test_getgq_misses_direct_sum_with_printed_w(pinned_ledger):
    m, e = getgq(1, 10**5, pinned_ledger)
    assert _g_direct(10**5, 1) > m.hi + e.hi


@pytest.mark.parametrize("j", [2, 3, 5, 7, 12, 16])
def test_threshold_terms_against_exact(j):
    from artifact.bounds_pipeline import _prefactors
    a, _ = threshold_terms(j)
    pre, _ = _prefactors(j)
    exact = threshold_inner_exact(j)
    assert (pre * Interval.point(exact)).hi >= a.lo and a.hi >= (pre * Interval.point(exact)).lo


def test_threshold_cap_is_monotone():
    full = threshold_sums(30)
    capped = threshold_sums(30, cap=1e6)
    assert capped[0].hi <= full[0].hi and capped[1].hi <= full[1].hi
    with pytest.raises(ValueError):
        threshold_sums(81)
    with pytest.raises(ValueError):
        threshold_terms(1)


def test_threshold_sums_at_80():
    s1, s2 = threshold_sums(80)
    assert s1.contains(Fraction("0.3334153987921"))
    assert s2.contains(Fraction("41346.25411"))


def test_u_bound_reproduces_bound1(pinned_ledger):
    u = u_bound(Interval.exact("1.2"), 9, 12, 0, 30, pinned_ledger, rounded=True)
    assert abs(u.hi - 0.59751334145858) < 1e-9
    with pytest.raises(ValueError):
        u_bound(Interval.exact("1.2"), 9, 12, 10**4, 30, pinned_ledger)
    with pytest.raises(ValueError):
        u_bound(1.0, 9, 12, 0, 30, pinned_ledger)


def test_theta_brackets(pinned_ledger):
    assert theta(422, 10**7, pinned_ledger).contains(Fraction("0.445"))
    assert theta(10**33, None, pinned_ledger) == pinned_ledger["Bound4"]
    assert len(THETA_BRACKETS) == 5
    with pytest.raises(KeyError):
        theta(1, 2, pinned_ledger)


def test_harmonic_window_inside_pinned_range():
    mn, mx = harmonic_window(10**3, 10**5)
    assert mn.lo > 1.040 and mx.hi < 1.048


def test_log_offset_report(pinned_ledger):
    rep = log_offset_report(10**4, pinned_ledger)
    assert set(rep) >= {"K1", "K2"}
    assert "coincide" in rep


def test_ledger_type():
    assert isinstance(build_ledger(LedgerConfig(products="pinned")), ConstantLedger)
    assert math.isfinite(build_ledger(LedgerConfig(products="pinned"))["Bound4"].hi)
