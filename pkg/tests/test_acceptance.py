"""The nine acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary).
Criteria marked ``xfail(strict=True)`` are unattainable as stated; the
test still evaluates and asserts the full criterion.
"""

import math
from fractions import Fraction
from itertools import product

import pytest

from betathermo import presets
from betathermo.digits import beta_from_digits, expand_one
from betathermo.gibbs import (NOT_WEAK_GIBBS, WEAK_GIBBS, classify, cylinder_estimate, k_envelope,
                              mme_oracle, weak_gibbs_defect)
from betathermo.language import (as_automaton, count_words, enumerate_words, is_member,
                                 is_member_oracle, suffix_info, walk, zbar_profile,
                                 zero_run_after)
from betathermo.thermo import (FULL, Potential, check_hat_upper, check_hat_lower, log_xi_constrained,
                               log_xi_full, logsumexp, pressure)

RESULTS: dict = {}

GOLDEN_BETA = (1 + 5 ** 0.5) / 2


def record(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} -- {detail}"
    RESULTS[num] = line
    print(line)


@pytest.fixture(scope="module")
def preset_digits():
    return {"golden": presets.golden(), "3/2": presets.rational(64),
            "tribonacci": presets.tribonacci(), "witness": presets.witness(64)}


def test_criterion_1_expansion():
    golden = expand_one("(1+sqrt 5)/2", 10)
    rational = expand_one("3/2", 64)
    digits_ok = (golden.prefix(10) == (1, 0) * 5 and golden.period == (0, 2)
                 and rational.digits[:9] == (1, 0, 1, 0, 0, 0, 0, 0, 1))
    tol = Fraction(1, 10 ** 9)
    g = beta_from_digits(golden, tol)
    r = beta_from_digits(rational, tol)
    g_lo, g_hi = g.enclosure(64)
    r_lo, r_hi = r.enclosure(64)
    g_err = abs(float(g) - GOLDEN_BETA)
    round_trip = (g_hi - g_lo <= tol and g_err <= 1e-9 and r_hi - r_lo <= tol
                  and r_lo <= Fraction(3, 2) <= r_hi)
    ok = digits_ok and round_trip
    record(1, "expansion correctness", ok,
           f"digits exact={digits_ok}; golden |beta err|={g_err:.1e}; 3/2 enclosure width "
           f"{float(r_hi - r_lo):.1e} contains 1.5={r_lo <= Fraction(3, 2) <= r_hi}")
    assert ok


def test_criterion_2_language_oracle(preset_digits):
    mismatches, checked = 0, 0
    for seq in preset_digits.values():
        aut = as_automaton(seq)
        for n in range(0, 13):
            for w in product(range(seq.alphabet), repeat=n):
                checked += 1
                mismatches += is_member(aut, w) != is_member_oracle(seq, w)
    record(2, "automaton membership vs brute force", mismatches == 0,
           f"{checked} words over 4 presets, {mismatches} mismatches")
    assert mismatches == 0


@pytest.mark.xfail(strict=True, reason="the hat map can be z(c_1)+3 to 1 (3/2: 10000 has 4 "
                                       "preimages, bound 3); see decisions ledger")
def test_criterion_3_prefix_and_hat_bounds(preset_digits):
    closure_bad = suffix_bad = 0
    multiplicity = {}
    for name, seq in preset_digits.items():
        aut = as_automaton(seq)
        c = seq.prefix(13)
        for la in range(0, 13):
            for lb in range(0, 13 - la):
                ab = c[:la] + c[:lb]
                if is_member(aut, ab) and ab != c[:la + lb]:
                    closure_bad += 1
        worst = 0
        for n in range(1, 13):
            images: dict = {}
            for w in enumerate_words(aut, n):
                info = suffix_info(aut, w)
                h = info.hat
                if suffix_info(aut, h).s != () or walk(aut, h)[-1] != 0:
                    suffix_bad += 1
                if info.v + info.s != w or (info.v and walk(aut, info.v)[-1] != 0):
                    suffix_bad += 1
                images[h] = images.get(h, 0) + 1
            worst = max(worst, max(images.values()))
        multiplicity[name] = (worst, zero_run_after(aut, 1) + 2)
    multiplicity_bad = sum(worst > bound for worst, bound in multiplicity.values())
    ok = closure_bad == 0 and suffix_bad == 0 and multiplicity_bad == 0
    detail = ", ".join(f"{k} {w}/{b}" for k, (w, b) in multiplicity.items())
    record(3, "prefix closure, hat-map bounds", ok,
           f"closure violations {closure_bad}; s(hat w) / q(hat w) violations {suffix_bad}; "
           f"max hat preimages / z(c_1)+2: {detail}")
    assert ok


@pytest.mark.xfail(strict=True, reason="|L_n| ~ 1.551 * 1.5^n for beta=3/2, so the n=20 entropy "
                                       "gap is log(1.551)/20 = 0.0219 > 0.02; see decisions ledger")
def test_criterion_4_counting_entropy(preset_digits):
    golden = preset_digits["golden"]
    counts = [count_words(golden, n) for n in range(1, 13)]
    fib = [2, 3]
    while len(fib) < 12:
        fib.append(fib[-1] + fib[-2])
    gaps = {}
    for name, beta in (("golden", GOLDEN_BETA), ("3/2", 1.5)):
        gaps[name] = abs(math.log(count_words(preset_digits[name], 20)) / 20 - math.log(beta))
    ok = counts == fib and all(g <= 0.02 for g in gaps.values())
    record(4, "counting and entropy", ok,
           f"golden counts Fibonacci={counts == fib}; n=20 entropy gaps "
           + ", ".join(f"{k} {v:.6f}" for k, v in gaps.items()) + " (tolerance 0.02)")
    assert ok


def test_criterion_5_pressure_modes(preset_digits):
    zero = Potential.zero(2)
    parts, ok = [], True
    for name, seq in preset_digits.items():
        est = pressure(zero, 15, FULL, seq)
        full, loop = est.extrapolated, est.companion_extrapolated
        raw_full, raw_loop = est.values[-1][1], est.companion[-1][1]
        agree = abs(full - loop) <= 0.05 and abs(raw_full - raw_loop) <= 0.05
        ok &= agree
        msg = f"{name} |full-loop|={abs(full - loop):.4f}"
        if name in ("golden", "3/2"):
            log_beta = math.log(GOLDEN_BETA if name == "golden" else 1.5)
            bracket = (min(full, loop) <= log_beta <= max(full, loop)
                       and raw_loop <= log_beta <= raw_full)
            ok &= bracket
            msg += f" bracket log beta={bracket}"
        parts.append(msg)
    record(5, "pressure: full vs loop words", ok, "; ".join(parts))
    assert ok


@pytest.mark.xfail(strict=True, reason="the hat upper-bound constant z(c_1)+2 inherits the hat-map "
                                       "off-by-one (tribonacci: Xi(0)=14 > 2*6)")
def test_criterion_6_partition_identities(preset_digits):
    worst_identity = 0.0
    violations = {}
    cases = 0
    for name, seq in preset_digits.items():
        aut = as_automaton(seq)
        for phi in (Potential.zero(2), Potential.indicator(2)):
            bad3 = bad4 = 0
            for n in range(1, 9):
                total = log_xi_full(phi, n, aut)
                for m in range(1, 5):
                    words = list(enumerate_words(aut, m))
                    for k in range(-n, n - m + 2):
                        parts = [log_xi_constrained(phi, n, k, k + m - 1, v, False, aut) for v in words]
                        worst_identity = max(worst_identity, abs(math.expm1(logsumexp(parts) - total)))
                        for v in words:
                            cases += 1
                            bad3 += not check_hat_upper(phi, n, k, k + m - 1, v, aut).holds
                            bad4 += not check_hat_lower(phi, n, k, k + m - 1, v, aut).holds
            violations[(name, phi.name)] = (bad3, bad4)
    bad = sum(a + b for a, b in violations.values())
    ok = worst_identity <= 1e-12 and bad == 0
    detail = ", ".join(f"{k[0]}/{k[1]} upper={a} lower={b}" for k, (a, b) in violations.items() if a or b)
    record(6, "partition identity, hat upper/lower bounds", ok,
           f"max relative identity error {worst_identity:.1e}; {cases} cases; violations: "
           f"{detail or 'none'}")
    assert ok


def test_criterion_7_cylinder_oracle(preset_digits):
    golden = preset_digits["golden"]
    zero = Potential.zero(2)
    worst = max(abs(cylinder_estimate(zero, u, 15, golden).value - mme_oracle(golden, u))
                for m in range(1, 5) for u in enumerate_words(golden, m))
    worst_norm = 0.0
    for n in range(1, 16):
        for m in range(1, min(4, 2 * n + 1) + 1):
            total = math.fsum(cylinder_estimate(zero, u, n, golden).value
                              for u in enumerate_words(golden, m))
            worst_norm = max(worst_norm, abs(total - 1))
    ok = worst <= 0.01 and worst_norm <= 1e-12
    record(7, "cylinder estimates vs maximal-entropy oracle", ok,
           f"max |estimate-oracle| at n=15, m<=4: {worst:.2e}; max |sum-1| over n<=15: {worst_norm:.1e}")
    assert ok


def test_criterion_8_weak_gibbs_dichotomy(preset_digits):
    golden, witness = preset_digits["golden"], preset_digits["witness"]
    zero = Potential.zero(2)
    ds = [weak_gibbs_defect(zero, m, 15, golden, oracle=True).defect for m in range(1, 16)]
    # D_m = K_m / m with K_m constant once m reaches the number of folded states
    m0 = as_automaton(golden).num_states
    tail_decreasing = all(a > b for a, b in zip(ds[m0 - 1:], ds[m0:]))
    no_new_highs = all(ds[i] <= max(ds[:i]) for i in range(1, len(ds)))
    golden_ok = tail_decreasing and no_new_highs and ds[-1] <= 0.15

    profile = zbar_profile(witness, 200)
    schedule = witness.schedule
    checkpoints = [schedule.checkpoint(k) for k in range(10) if schedule.checkpoint(k) <= 200]
    ratios = [profile.points[n - 1][2] for n in checkpoints]
    zbar_ok = all(r >= Fraction(2, 5) for r in ratios)

    rep_w = classify(witness, 64, zero, m=12, n=12)
    witness_rows = rep_w.witness_defects
    defect_ok = bool(witness_rows) and all(r.defect >= 0.1 * (rep_w.p_hat - 0) for r in witness_rows)
    rep_g = classify(golden, 64, zero, m=15, n=15)
    verdicts = (rep_g.verdict, rep_w.verdict)
    ok = golden_ok and zbar_ok and defect_ok and verdicts == (WEAK_GIBBS, NOT_WEAK_GIBBS)
    record(8, "weak-Gibbs dichotomy", ok,
           f"golden D_1..D_15 = {', '.join(f'{d:.3f}' for d in ds)} (strictly decreasing from "
           f"m={m0}, D_15={ds[-1]:.4f}); witness min zbar/n at checkpoints {float(min(ratios)):.3f}; "
           f"witness defects {', '.join(f'{r.defect:.3f}' for r in witness_rows)} vs "
           f"0.1*p={0.1 * rep_w.p_hat:.3f}; verdicts {verdicts}")
    assert ok


def test_criterion_9_envelope(preset_digits):
    violations, cases = 0, 0
    for name in ("golden", "3/2"):
        seq = preset_digits[name]
        aut = as_automaton(seq)
        for phi in (Potential.zero(2), Potential.indicator(2)):
            p_hat = pressure(phi, 15, FULL, aut).extrapolated
            for m in range(1, 7):
                for u in enumerate_words(aut, m):
                    cases += 1
                    violations += not k_envelope(phi, u, aut, 0.05, n=12, p_hat=p_hat).contained
    record(9, "K+/K- envelope containment", violations == 0,
           f"{cases} cylinders (golden, 3/2; zero, indicator; |u|<=6, eps=0.05), {violations} violations")
    assert violations == 0
