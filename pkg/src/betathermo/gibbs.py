"""Equilibrium cylinder estimates, weak-Gibbs defects, the K+/K- envelope
and the weak-Gibbs classifier.

The equilibrium state of ``phi`` is approximated at finite ``n`` by
averaging pinned partition-sum ratios ``Xi_[j, j+m-1](u) / Xi`` over window
positions ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotEventuallyPeriodic, NotInLanguage, WindowTooSmall
from .language import (INCONCLUSIVE, POSITIVE_LIMSUP, SUBLINEAR, as_automaton, enumerate_words,
                       is_member, suffix_info, walk, zbar_profile, zero_run_after)
from .thermo import (FULL, OscProfile, Potential, osc_profile, pressure, sharp_energy,
                     transfer_tables)

WEAK_GIBBS = "WeakGibbs"
NOT_WEAK_GIBBS = "NotWeakGibbs-evidence"
INCONCLUSIVE_VERDICT = "Inconclusive"

INTERIOR = "interior"
ALL = "all"

MIN_DEPTH = 4


@dataclass(frozen=True)
class CylinderEstimate:
    """``value`` is the window average; ``ratios`` maps position ``j`` to
    ``Xi_[j, j+m-1](u) / Xi``."""

    word: tuple
    n: int
    value: float
    ratios: dict = field(default_factory=dict, compare=False)
    windows: str = INTERIOR


def _window_positions(m: int, n: int, windows: str) -> range:
    if m > 2 * n + 1:
        raise WindowTooSmall(f"a word of length {m} does not fit in [-{n}, {n}]")
    if windows == INTERIOR:
        return range(-n, n - m + 2)
    if windows == ALL:
        return range(-n, n + 1)
    raise ValueError(f"unknown window mode {windows!r}")


def cylinder_estimate(phi: Potential, u: Sequence[int], n: int, digits,
                      windows: str = INTERIOR) -> CylinderEstimate:
    """Finite-``n`` estimate of the equilibrium measure of the cylinder ``[u]``.

    ``windows="interior"`` averages over the positions with the whole window
    inside ``[-n, n]``; ``windows="all"`` uses every start ``j`` in
    ``[-n, n]`` and lets the window run into the padding zeros.  Words
    outside the language get 0.
    """
    aut = as_automaton(digits)
    u = tuple(u)
    if not u:
        raise ValueError("the cylinder word must be nonempty")
    positions = _window_positions(len(u), n, windows)
    try:
        walk(aut, u)
    except NotInLanguage:
        if not all(0 <= a < aut.alphabet for a in u):
            raise
        return CylinderEstimate(u, n, 0.0, {}, windows)
    tables = transfer_tables(phi, aut, n)
    ratios = {j: math.exp(tables.log_pinned(j, u) - tables.log_total) for j in positions}
    value = math.fsum(ratios.values()) / len(positions)
    return CylinderEstimate(u, n, value, ratios, windows)


def cylinder_estimates(phi: Potential, m: int, n: int, digits,
                       windows: str = INTERIOR) -> dict:
    """Estimates for every word of ``L_m``, keyed by word in lexicographic order."""
    aut = as_automaton(digits)
    return {u: cylinder_estimate(phi, u, n, aut, windows) for u in enumerate_words(aut, m)}


# ---------------------------------------------------------------------------
# measure of maximal entropy on the folded presentation


@dataclass(frozen=True)
class PerronData:
    eigenvalue: float
    left: np.ndarray
    right: np.ndarray
    table: dict


def perron_data(digits) -> PerronData:
    """Perron eigendata of the folded automaton; ``left @ right == 1``."""
    aut = as_automaton(digits)
    if aut.fold is None:
        raise NotEventuallyPeriodic("the oracle needs a certified period to fold the automaton")
    table = aut.table()
    size = aut.num_states
    mat = np.zeros((size, size))
    for s, edges in table.items():
        for t in edges.values():
            mat[s, t] += 1
    vals, vecs = np.linalg.eig(mat)
    k = int(np.argmax(vals.real))
    lam = float(vals[k].real)
    right = np.abs(vecs[:, k].real)
    lvals, lvecs = np.linalg.eig(mat.T)
    left = np.abs(lvecs[:, int(np.argmax(lvals.real))].real)
    left = left / float(left @ right)
    return PerronData(lam, left, right, table)


def mme_oracle(digits, w: Sequence[int]) -> float:
    """Measure of maximal entropy of the cylinder ``[w]`` (float).

    Parry measure of the folded graph pushed to the shift:
    ``sum_i left_i * right_{delta(i, w)} / lambda^|w|``.
    """
    data = perron_data(digits)
    total = 0.0
    for start in data.table:
        s = start
        for a in w:
            s = data.table[s].get(a)
            if s is None:
                break
        else:
            total += data.left[start] * data.right[s]
    return float(total / data.eigenvalue ** len(w))


# ---------------------------------------------------------------------------
# weak-Gibbs defect


def boundary_correction(osc: OscProfile, m: int) -> float:
    """Bound on ``|sum_l phi(T^l x) - sum_l phi(T^l u#)|`` over ``x`` in ``[u]``:
    site ``l`` can only see the coordinates outside ``[0, m-1]``."""
    return math.fsum(d for ell in range(m) for i, d in osc.deltas.items()
                     if not 0 <= ell + i <= m - 1)


@dataclass(frozen=True)
class WordDefect:
    word: tuple
    measure: float
    energy: float      # sum_{l=0}^{m-1} phi(T^l u#)
    defect: float


@dataclass(frozen=True)
class DefectReport:
    """``defect`` is the point value of ``D_m``; ``lower``/``upper`` widen it
    by the cross-cylinder correction (divided by ``m``) and the pressure
    uncertainty."""

    m: int
    n: int
    defect: float
    p_hat: float
    p_uncertainty: float
    correction: float
    lower: float
    upper: float
    mode: str
    table: tuple
    anomalies: tuple = ()

    @property
    def argmax(self) -> tuple:
        return max(self.table, key=lambda r: r.defect).word


def _pressure_hat(phi, n, aut) -> tuple[float, float]:
    est = pressure(phi, n, FULL, aut)
    return est.extrapolated, est.uncertainty


def _word_defect(phi, u, measure, p_hat):
    m = len(u)
    energy = sharp_energy(phi, u, 0)
    return WordDefect(u, measure, energy, abs(math.log(measure) / m - (energy - m * p_hat) / m))


def weak_gibbs_defect(phi: Potential, m: int, n: int, digits, *, oracle: bool = False,
                      p_hat: float | None = None, p_uncertainty: float = 0.0,
                      words: Sequence[Sequence[int]] | None = None) -> DefectReport:
    """``D_m = max_u |(1/m) ln nu(u) - (1/m) sum_{l<m} (phi - p)(T^l u#)|``.

    ``oracle=True`` (zero potential and a certified period only) replaces the
    estimates by the measure of maximal entropy and ``p`` by the log of the
    Perron eigenvalue.  ``words`` restricts the maximum to the given words.
    """
    aut = as_automaton(digits)
    osc = osc_profile(phi)
    if oracle:
        if any(v != 0.0 for v in phi.values):
            raise ValueError("oracle mode only covers the zero potential")
        data = perron_data(aut)
        p_hat, p_uncertainty = math.log(data.eigenvalue), 0.0

        def measure(u):
            return mme_oracle(aut, u)
    else:
        if p_hat is None:
            p_hat, p_uncertainty = _pressure_hat(phi, n, aut)

        def measure(u):
            return cylinder_estimate(phi, u, n, aut).value

    rows, anomalies = [], []
    for u in (enumerate_words(aut, m) if words is None else map(tuple, words)):
        if len(u) != m:
            raise ValueError(f"word {u} does not have length {m}")
        nu = measure(u)
        if nu <= 0.0:
            anomalies.append(u)
            continue
        rows.append(_word_defect(phi, u, nu, p_hat))
    rows.sort(key=lambda r: r.word)
    d = max((r.defect for r in rows), default=0.0)
    corr = boundary_correction(osc, m) / m
    return DefectReport(m, n, d, p_hat, p_uncertainty, corr,
                        max(0.0, d - corr - p_uncertainty), d + corr + p_uncertainty,
                        "oracle" if oracle else "estimate", tuple(rows), tuple(anomalies))


# ---------------------------------------------------------------------------
# K+/K- envelope


@dataclass(frozen=True)
class Envelope:
    word: tuple
    m: int
    epsilon: float
    k_plus: float
    k_minus: float
    g: float
    measured: float
    contained: bool

    @property
    def lower(self) -> float:
        return self.k_minus * self.g

    @property
    def upper(self) -> float:
        return self.k_plus * self.g


def envelope_constants(aut, u: Sequence[int], norm: float, epsilon: float) -> tuple[float, float]:
    m = len(u)
    z1 = zero_run_after(aut, 1)
    zu = suffix_info(aut, u).z
    k_plus = (z1 + 2) * math.exp(3 * norm) * math.exp(5 * m * epsilon)
    k_minus = (aut.alphabet ** -(zu + 1) * math.exp(-(zu + 2) * norm)
               / ((z1 + 2) ** 2 * math.exp(5 * m * epsilon + 3 * norm)))
    return k_plus, k_minus


def k_envelope(phi: Potential, u: Sequence[int], digits, epsilon: float = 0.05, *, n: int = 12,
               p_hat: float | None = None, measured: float | None = None) -> Envelope:
    """Envelope constants for ``[u]`` and whether ``K- G <= nu <= K+ G`` with
    ``G = exp(sum_{j=1}^m phi(T^j u#) - m p)``."""
    aut = as_automaton(digits)
    u = tuple(u)
    walk(aut, u)
    m = len(u)
    k_plus, k_minus = envelope_constants(aut, u, osc_profile(phi).norm, epsilon)
    if p_hat is None:
        p_hat = _pressure_hat(phi, n, aut)[0]
    if measured is None:
        measured = cylinder_estimate(phi, u, n, aut).value
    g = math.exp(sharp_energy(phi, u, 1) - m * p_hat)
    return Envelope(u, m, epsilon, k_plus, k_minus, g, measured,
                    k_minus * g <= measured <= k_plus * g)


# ---------------------------------------------------------------------------
# witnesses and classification


@dataclass(frozen=True)
class WitnessFamily:
    """Record-setting prefixes ``w^k`` of ``c`` (each has a longer zero run
    after it than any shorter prefix) and their zero-padded versions."""

    words: tuple
    lengths: tuple
    zeros: tuple
    ratios: tuple
    padded: tuple
    a: float           # asymptotic z/m: 0 when zbar is bounded
    positive: bool


def make_witnesses(digits, depth: int) -> WitnessFamily:
    aut = as_automaton(digits)
    if depth < 1:
        raise ValueError("depth must be positive")
    aut.check_length(depth)
    words, zeros, padded = [], [], []
    best = -1
    for m in range(1, depth + 1):
        z = zero_run_after(aut, m)
        if m == 1 or z > best:
            best = max(best, z)
            w = tuple(aut.c(i) for i in range(m))
            wt = w + (0,) * z
            aut.check_length(len(wt))
            if not (is_member(aut, w) and is_member(aut, wt)):
                raise AssertionError("witness outside the language")
            words.append(w)
            zeros.append(z)
            padded.append(wt)
    lengths = tuple(len(w) for w in words)
    ratios = tuple(z / m for z, m in zip(zeros, lengths))
    profile = zbar_profile(aut, depth)
    if profile.verdict == SUBLINEAR:
        a = 0.0
    elif profile.verdict == POSITIVE_LIMSUP:
        a = float(profile.limsup)
    else:
        a = float(profile.trend or 0.0)
    return WitnessFamily(tuple(words), lengths, tuple(zeros), ratios, tuple(padded), a, a > 0)


@dataclass(frozen=True)
class WitnessDefect:
    word: tuple
    m: int
    z: int
    measure: float
    defect: float
    predicted_lower: float   # (z/m)(p - phi(0) - 6 eps)


@dataclass
class GibbsReport:
    verdict: str
    reason: str
    p_hat: float
    p_uncertainty: float
    zbar_verdict: str
    zbar_certified: bool
    defects: list = field(default_factory=list)             # DefectReport per m
    witnesses: WitnessFamily | None = None
    witness_defects: list = field(default_factory=list)
    epsilon: float = 0.05


def witness_defects(phi: Potential, family: WitnessFamily, n: int, digits, p_hat: float,
                    epsilon: float = 0.05, m_max: int | None = None) -> list:
    aut = as_automaton(digits)
    phi0 = phi.value((0,) * phi.width)
    out = []
    for w, z in zip(family.words, family.zeros):
        m = len(w)
        if (m_max is not None and m > m_max) or m > 2 * n + 1:
            continue
        nu = cylinder_estimate(phi, w, n, aut).value
        row = _word_defect(phi, w, nu, p_hat)
        out.append(WitnessDefect(w, m, z, nu, row.defect, z / m * (p_hat - phi0 - 6 * epsilon)))
    return out


def classify(digits, depth: int, phi: Potential | None = None, *, m: int = 12, n: int = 12,
             epsilon: float = 0.05, curve: Sequence[int] | None = None) -> GibbsReport:
    """Weak-Gibbs verdict from the zero-run profile plus numerical evidence.

    ``WeakGibbs`` needs a certified bounded ``zbar``.  ``NotWeakGibbs-evidence``
    needs linear ``zbar`` from a generative pattern and a positive defect at
    every witness of length ``<= m``.  Anything else is ``Inconclusive``.
    """
    aut = as_automaton(digits)
    if phi is None:
        phi = Potential.zero(aut.alphabet)
    if depth < MIN_DEPTH:
        return GibbsReport(INCONCLUSIVE_VERDICT, f"depth {depth} < {MIN_DEPTH} is too shallow",
                           math.nan, math.nan, INCONCLUSIVE, False, epsilon=epsilon)
    if not aut.unbounded:
        # zero runs past the last known nonzero digit have unknown length
        last = max(i for i, d in enumerate(aut.digits.digits) if d)
        depth = min(depth, aut.depth, last)
    profile = zbar_profile(aut, depth)
    p_hat, p_unc = _pressure_hat(phi, n, aut)
    certified = profile.verdict in (SUBLINEAR, POSITIVE_LIMSUP)
    report = GibbsReport(INCONCLUSIVE_VERDICT, "", p_hat, p_unc, profile.verdict, certified,
                         epsilon=epsilon)

    if profile.verdict == SUBLINEAR:
        zero_phi = all(v == 0.0 for v in phi.values)
        for mm in (curve or range(1, m + 1)):
            report.defects.append(weak_gibbs_defect(phi, mm, n, aut, oracle=zero_phi,
                                                    p_hat=None if zero_phi else p_hat,
                                                    p_uncertainty=p_unc))
        report.verdict = WEAK_GIBBS
        report.reason = f"zero runs bounded by {profile.bound}"
        return report

    family = make_witnesses(aut, depth)
    report.witnesses = family
    report.witness_defects = witness_defects(phi, family, n, aut, p_hat, epsilon, m_max=m)
    if profile.verdict == POSITIVE_LIMSUP:
        rows = report.witness_defects
        if rows and all(r.defect - p_unc > 0 for r in rows):
            report.verdict = NOT_WEAK_GIBBS
            report.reason = (f"zbar(n)/n has limsup {profile.limsup} and the defect stays "
                             f">= {min(r.defect for r in rows):.4g} at the witnesses")
        else:
            report.reason = "linear zero runs but no positive defect at the witnesses"
        return report
    report.reason = (f"no certificate for zbar; empirical max zbar(n)/n over the upper half "
                     f"is {profile.trend:.4g}")
    return report
