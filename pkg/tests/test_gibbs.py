import math

import pytest
from hypothesis import given, strategies as st

from betathermo import presets
from betathermo.digits import DigitSeq, expand_one
from betathermo.errors import NotEventuallyPeriodic, NotInLanguage, WindowTooSmall
from betathermo.gibbs import (ALL, INCONCLUSIVE_VERDICT, NOT_WEAK_GIBBS, WEAK_GIBBS, classify,
                              cylinder_estimate, cylinder_estimates, envelope_constants,
                              k_envelope, make_witnesses, mme_oracle, perron_data,
                              weak_gibbs_defect)
from betathermo.language import as_automaton, enumerate_words, zbar
from betathermo.thermo import Potential

from conftest import oracle_words

GOLDEN = DigitSeq((1, 0), 2, period=(0, 2))
TRIBONACCI = DigitSeq((1, 1, 0), 2, period=(0, 3))
RATIONAL = expand_one("3/2", 40)
ZERO = Potential.zero(2)
SQRT5 = 5 ** 0.5


def test_mme_oracle_golden():
    assert mme_oracle(GOLDEN, (1,)) == pytest.approx((5 - SQRT5) / 10, abs=1e-14)
    assert mme_oracle(GOLDEN, (0,)) == pytest.approx((5 + SQRT5) / 10, abs=1e-14)
    assert mme_oracle(GOLDEN, (1, 1)) == 0.0
    assert perron_data(GOLDEN).eigenvalue == pytest.approx((1 + SQRT5) / 2, abs=1e-14)


def test_mme_oracle_needs_period():
    with pytest.raises(NotEventuallyPeriodic):
        mme_oracle(RATIONAL, (1,))


@pytest.mark.parametrize("digits", [GOLDEN, TRIBONACCI, expand_one("1+sqrt 2", 8)],
                         ids=["golden", "tribonacci", "1+sqrt2"])
def test_mme_is_shift_invariant_probability(digits):
    b = digits.alphabet
    for m in range(1, 6):
        words = list(enumerate_words(digits, m))
        assert math.fsum(mme_oracle(digits, u) for u in words) == pytest.approx(1, abs=1e-12)
        for u in words:
            right = math.fsum(mme_oracle(digits, u + (a,)) for a in range(b))
            left = math.fsum(mme_oracle(digits, (a,) + u) for a in range(b))
            assert right == pytest.approx(mme_oracle(digits, u), abs=1e-12)
            assert left == pytest.approx(mme_oracle(digits, u), abs=1e-12)


def test_estimate_equals_frequency_count_for_zero_potential():
    # with phi = 0 each window ratio is a plain frequency over L_{2n+1}
    n, u = 4, (1, 0, 1)
    words = oracle_words(GOLDEN, 2 * n + 1)
    est = cylinder_estimate(ZERO, u, n, GOLDEN)
    for j, ratio in est.ratios.items():
        hits = sum(w[j + n:j + n + 3] == u for w in words)
        assert ratio == pytest.approx(hits / len(words), rel=1e-12)


def test_estimate_examples():
    assert cylinder_estimate(ZERO, (1, 1), 8, GOLDEN).value == 0.0
    assert cylinder_estimate(ZERO, (1,), 15, GOLDEN).value == pytest.approx((5 - SQRT5) / 10, abs=0.01)
    with pytest.raises(NotInLanguage):
        cylinder_estimate(ZERO, (2,), 4, GOLDEN)
    with pytest.raises(WindowTooSmall):
        cylinder_estimate(ZERO, (0,) * 6, 2, GOLDEN)


@given(st.integers(1, 6), st.integers(3, 12), st.sampled_from(["golden", "3/2", "tribonacci"]),
       st.booleans())
def test_normalization(m, n, name, indicator):
    digits = {"golden": GOLDEN, "3/2": RATIONAL, "tribonacci": TRIBONACCI}[name]
    phi = Potential.indicator(2, 1, 0.6) if indicator else ZERO
    total = math.fsum(e.value for e in cylinder_estimates(phi, m, n, digits).values())
    assert total == pytest.approx(1, abs=1e-12)


def test_shift_consistency():
    phi = Potential.indicator(2, 1, 0.4)
    for u in [(1,), (0, 1), (1, 0, 0, 1)]:
        ratios = cylinder_estimate(phi, u, 30, GOLDEN).ratios
        # whole window inside [-5, 5], at least 25 sites from the padding
        central = [ratios[j] for j in range(-5, 7 - len(u))]
        assert max(central) - min(central) <= 1e-9


def test_estimates_approach_oracle():
    errs = [max(abs(cylinder_estimate(ZERO, u, n, TRIBONACCI).value - mme_oracle(TRIBONACCI, u))
                for u in enumerate_words(TRIBONACCI, 3)) for n in (5, 10, 15)]
    assert errs[0] > errs[1] > errs[2]


def test_witness_padding_identity():
    w = presets.witness(64)
    family = make_witnesses(w, 12)
    for word, padded in zip(family.words, family.padded):
        a = cylinder_estimate(ZERO, word, 12, w, windows=ALL).value
        b = cylinder_estimate(ZERO, padded, 12, w, windows=ALL).value
        assert a / b == pytest.approx(1, abs=1e-6)


def test_witness_families():
    w = presets.witness(64)
    fam = make_witnesses(w, 40)
    assert fam.lengths == (1, 4, 9, 18, 35) and fam.zeros == (2, 4, 8, 16, 32)
    assert all(r >= 0.5 for r in fam.ratios) and fam.positive
    golden = make_witnesses(GOLDEN, 20)
    assert golden.a == 0 and not golden.positive
    assert all(r <= 1 / m for r, m in zip(golden.ratios, golden.lengths))
    single = make_witnesses(GOLDEN, 1)
    assert single.words == ((1,),) and single.zeros == (zbar(GOLDEN, 1),)


def test_golden_oracle_defects():
    ds = [weak_gibbs_defect(ZERO, m, 15, GOLDEN, oracle=True).defect for m in range(1, 16)]
    assert ds[14] <= 0.15
    # once every pair of boundary states is realized (m >= number of folded states) D_m = K/m
    states = as_automaton(GOLDEN).num_states
    assert all(a > b for a, b in zip(ds[states - 1:], ds[states:]))
    assert ds[14] * 15 == pytest.approx(ds[states - 1] * states, rel=1e-9)


def test_estimated_defect_tracks_oracle():
    est = weak_gibbs_defect(ZERO, 4, 15, GOLDEN)
    exact = weak_gibbs_defect(ZERO, 4, 15, GOLDEN, oracle=True)
    assert abs(est.defect - exact.defect) <= est.p_uncertainty + 0.02
    assert est.lower <= est.defect <= est.upper
    assert not est.anomalies


def test_defect_correction_for_wide_window():
    phi = Potential.from_function(2, (-1, 1), lambda w: 0.5 * w[0] * w[2])
    rep = weak_gibbs_defect(phi, 3, 8, GOLDEN)
    # sites 0 and 2 each see one outside coordinate with oscillation 0.5
    assert rep.correction == pytest.approx(1.0 / 3)


def test_oracle_mode_requires_zero_potential():
    with pytest.raises(ValueError):
        weak_gibbs_defect(Potential.indicator(2), 2, 8, GOLDEN, oracle=True)


def test_envelope_constants_zero_potential():
    aut = as_automaton(GOLDEN)
    k_plus, k_minus = envelope_constants(aut, (1, 0), 0.0, 0.05)
    assert k_plus == pytest.approx(3 * math.exp(0.5))
    # z(10) = 0 for golden (c_3 = 1)
    assert k_minus == pytest.approx(2 ** -1 / (9 * math.exp(0.5)))


def test_envelope_golden_single_letter():
    env = k_envelope(ZERO, (1,), GOLDEN, 0.01, n=15)
    assert env.contained and env.lower <= env.measured <= env.upper


def test_envelope_witness_deep_zero_run():
    w = presets.witness(64)
    env = k_envelope(ZERO, (1, 0, 0, 1), w, 0.05, n=12)
    assert env.k_minus < 2 ** -4 and env.contained


def test_classify_examples():
    assert classify(GOLDEN, 40, m=6, n=10).verdict == WEAK_GIBBS
    rep = classify(presets.witness(64), 64, m=12, n=12)
    assert rep.verdict == NOT_WEAK_GIBBS and rep.zbar_certified
    assert all(r.defect >= 0.1 * rep.p_hat for r in rep.witness_defects)
    assert classify(GOLDEN, 3).verdict == INCONCLUSIVE_VERDICT
    assert classify(RATIONAL, 40, m=4, n=8).verdict == INCONCLUSIVE_VERDICT
