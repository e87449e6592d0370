"""The language of the beta-shift and its prefix automaton.

States ``q_j`` record the length ``j`` of the longest suffix of the word
read so far that is a prefix of ``c``.  From ``q_j`` the letter ``c_{j+1}``
advances along the spine to ``q_{j+1}``, every smaller letter falls back to
``q_0``, and larger letters are rejected.  (The fall-back edges from
``q_{j-1}`` carry the ``c_j`` labels ``0, ..., c_j - 1``.)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence, Union

from .digits import DigitSeq
from .errors import DepthExceeded, NotInLanguage

Word = tuple

SUBLINEAR = "certified-sublinear"
POSITIVE_LIMSUP = "positive-limsup-evidence"
INCONCLUSIVE = "inconclusive"


def failure_table(c: Sequence[int]) -> tuple[int, ...]:
    """``fail[k]`` = length of the longest proper border of ``c[:k]``."""
    fail = [0] * (len(c) + 1)
    k = 0
    for i in range(1, len(c)):
        while k and c[i] != c[k]:
            k = fail[k]
        if c[i] == c[k]:
            k += 1
        fail[i + 1] = k
    return tuple(fail)


@dataclass(frozen=True)
class PrefixAutomaton:
    """Deterministic presentation of the beta-shift read from ``q_0``.

    ``fold = (base, period)`` identifies ``q_{base+period+j}`` with
    ``q_{base+j}``; ``base >= 1`` so that ``q_0`` (the state meaning
    "empty suffix") is never merged with another state.
    """

    digits: DigitSeq
    fold: tuple | None
    failure: tuple
    _spine: tuple = field(repr=False)

    @property
    def depth(self) -> int:
        return self.digits.depth

    @property
    def alphabet(self) -> int:
        return self.digits.alphabet

    @property
    def unbounded(self) -> bool:
        return self.digits.generative

    @property
    def num_states(self) -> int | None:
        if self.fold is not None:
            return self.fold[0] + self.fold[1]
        return None

    def c(self, j: int) -> int:
        """``c_{j+1}``, the spine label leaving ``q_j``."""
        if j < len(self._spine):
            return self._spine[j]
        return self.digits.digit(j)

    def step(self, state: int, letter: int) -> int | None:
        """Canonical (folded when possible) successor, ``None`` on reject."""
        cj = self.c(state)
        if letter == cj:
            nxt = state + 1
            if self.fold is not None and nxt >= self.fold[0] + self.fold[1]:
                nxt -= self.fold[1]
            return nxt
        if letter < cj:
            return 0
        return None

    def step_unfolded(self, j: int, letter: int) -> int | None:
        cj = self.c(j)
        if letter == cj:
            return j + 1
        if letter < cj:
            return 0
        return None

    def table(self) -> dict:
        """Materialized transitions over the explicit state set."""
        top = self.num_states if self.fold is not None else self.depth
        out = {}
        for s in range(top):
            out[s] = {a: self.step(s, a) for a in range(self.alphabet) if self.step(s, a) is not None}
        return out

    def check_length(self, n: int) -> None:
        if n > self.depth and not self.unbounded:
            raise DepthExceeded(f"words of length {n} need {n} digits; only {self.depth} known")

    def failure_upto(self, n: int) -> tuple:
        if n < len(self.failure):
            return self.failure
        return failure_table(self.digits.prefix(n))


def build_automaton(digits: DigitSeq) -> PrefixAutomaton:
    """Prefix automaton for ``digits``; folded when a period is certified."""
    fold = None
    if digits.period is not None:
        p, q = digits.period
        base = max(p, 1)
        # q_{base+q} must behave exactly like q_base: same spine label forever
        for j in range(base, base + q + 1):
            if digits.digit(j + q) != digits.digit(j):
                raise ValueError("period certificate incompatible with folding")
        fold = (base, q)
    spine_len = digits.depth
    if digits.generative:
        spine_len = max(spine_len, 256)
    spine = digits.prefix(spine_len)
    return PrefixAutomaton(digits, fold, failure_table(digits.digits), spine)


@lru_cache(maxsize=128)
def _cached_automaton(digits: DigitSeq) -> PrefixAutomaton:
    return build_automaton(digits)


def as_automaton(obj: Union[DigitSeq, PrefixAutomaton]) -> PrefixAutomaton:
    if isinstance(obj, PrefixAutomaton):
        return obj
    return _cached_automaton(obj)


def _as_digits(obj) -> DigitSeq:
    return obj.digits if isinstance(obj, PrefixAutomaton) else obj


# ---------------------------------------------------------------------------
# membership


def walk(aut: PrefixAutomaton, w: Sequence[int]) -> list[int]:
    """Unfolded states ``q(w_1..w_i)`` for ``i = 0..|w|``; raises on rejection."""
    aut.check_length(len(w))
    states = [0]
    j = 0
    for i, a in enumerate(w):
        if not 0 <= a < aut.alphabet:
            raise NotInLanguage(f"letter {a} at index {i} is outside the alphabet", i, i)
        nxt = aut.step_unfolded(j, a)
        if nxt is None:
            raise NotInLanguage(
                f"suffix starting at index {i - j} exceeds the prefix of c at index {i}",
                position=i, suffix_start=i - j)
        j = nxt
        states.append(j)
    return states


def is_member(aut: Union[DigitSeq, PrefixAutomaton], w: Sequence[int]) -> bool:
    aut = as_automaton(aut)
    aut.check_length(len(w))
    try:
        walk(aut, w)
    except NotInLanguage:
        return False
    return True


def is_member_oracle(digits: DigitSeq, w: Sequence[int]) -> bool:
    """Brute force: every suffix of ``w`` is ``<=`` the equally long prefix of c."""
    digits = _as_digits(digits)
    n = len(w)
    if n > digits.depth and not digits.generative:
        raise DepthExceeded(f"oracle needs {n} digits; only {digits.depth} known")
    c = digits.prefix(n)
    if any(not 0 <= a < digits.alphabet for a in w):
        return False
    for k in range(n):
        if tuple(w[k:]) > c[:n - k]:
            return False
    return True


def end_state(aut: Union[DigitSeq, PrefixAutomaton], w: Sequence[int]) -> int:
    """Index ``j`` of the end vertex ``q_j`` of the path presenting ``w``."""
    return walk(as_automaton(aut), w)[-1]


# ---------------------------------------------------------------------------
# counting and enumeration


def count_words(aut: Union[DigitSeq, PrefixAutomaton], n: int) -> int:
    """``|L_n|`` by a dynamic program over automaton states."""
    aut = as_automaton(aut)
    aut.check_length(n)
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, k in counts.items():
            for a in range(aut.alphabet):
                t = aut.step(s, a)
                if t is not None:
                    nxt[t] = nxt.get(t, 0) + k
        counts = nxt
    return sum(counts.values())


def enumerate_words(aut: Union[DigitSeq, PrefixAutomaton], n: int) -> Iterator[Word]:
    """Yield ``L_n`` in lexicographic order."""
    aut = as_automaton(aut)
    aut.check_length(n)

    def rec(state, prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for a in range(aut.alphabet):
            t = aut.step(state, a)
            if t is not None:
                prefix.append(a)
                yield from rec(t, prefix)
                prefix.pop()

    return rec(0, [])


def all_words(alphabet: int, n: int) -> Iterator[Word]:
    return product(range(alphabet), repeat=n)


# ---------------------------------------------------------------------------
# suffix, hat and zero runs


@dataclass(frozen=True)
class SuffixInfo:
    """``w = v + s`` with ``s`` the longest suffix that is a prefix of c."""

    word: Word
    s: Word
    v: Word
    z: int
    hat: Word


def longest_prefix_suffix(aut: PrefixAutomaton, w: Sequence[int]) -> int:
    """``|s(w)|`` via a KMP scan of ``w`` against ``c``."""
    fail = aut.failure_upto(len(w) + 1)
    k = 0
    for a in w:
        while k and aut.c(k) != a:
            k = fail[k]
        if aut.c(k) == a:
            k += 1
    return k


def zero_run_after(aut: Union[DigitSeq, PrefixAutomaton], length: int) -> int:
    """``z`` of the prefix ``c_1..c_length``: zeros of c right after it."""
    if length == 0:
        return 0
    aut = as_automaton(aut)
    run = 0
    while aut.c(length + run) == 0:
        run += 1
    return run


def hat_prefix(u: Sequence[int]) -> Word:
    """Decrement the last nonzero letter of ``u``."""
    u = list(u)
    for i in range(len(u) - 1, -1, -1):
        if u[i]:
            u[i] -= 1
            return tuple(u)
    return tuple(u)


def suffix_info(aut: Union[DigitSeq, PrefixAutomaton], w: Sequence[int]) -> SuffixInfo:
    aut = as_automaton(aut)
    w = tuple(w)
    walk(aut, w)
    k = longest_prefix_suffix(aut, w)
    v, s = w[:len(w) - k], w[len(w) - k:]
    if not s:
        return SuffixInfo(w, (), v, 0, w)
    return SuffixInfo(w, s, v, zero_run_after(aut, k), v + hat_prefix(s))


def hat(aut: Union[DigitSeq, PrefixAutomaton], w: Sequence[int]) -> Word:
    return suffix_info(aut, w).hat


def hat_multiplicity(aut: Union[DigitSeq, PrefixAutomaton], n: int) -> tuple[int, Word]:
    """Largest number of words of ``L_n`` sharing one hat image, and that image."""
    aut = as_automaton(aut)
    counts: dict = {}
    for w in enumerate_words(aut, n):
        h = hat(aut, w)
        counts[h] = counts.get(h, 0) + 1
    image = max(sorted(counts), key=counts.get)
    return counts[image], image


def zbar(digits: Union[DigitSeq, PrefixAutomaton], n: int) -> int:
    """``max z(u)`` over prefixes ``u`` of c with ``|u| <= n``."""
    aut = as_automaton(digits)
    return max((zero_run_after(aut, ell) for ell in range(n + 1)), default=0)


@dataclass(frozen=True)
class ZbarProfile:
    points: tuple  # (n, zbar(n), zbar(n)/n as Fraction)
    verdict: str
    bound: int | None = None          # sup zbar when certified sublinear
    limsup: Fraction | None = None    # certified lower bound on the limsup
    trend: float | None = None        # empirical max ratio over the upper half

    def ratios(self) -> list[tuple[int, Fraction]]:
        return [(n, r) for n, _, r in self.points]


def zbar_profile(digits: Union[DigitSeq, PrefixAutomaton], N: int) -> ZbarProfile:
    aut = as_automaton(digits)
    seq = aut.digits
    if N < 1:
        raise ValueError("N must be positive")
    points = []
    best = 0
    for n in range(1, N + 1):
        best = max(best, zero_run_after(aut, n))
        points.append((n, best, Fraction(best, n)))
    points = tuple(points)
    if seq.period is not None:
        p, q = seq.period
        bound = max(zero_run_after(aut, ell) for ell in range(p + q + 1))
        return ZbarProfile(points, SUBLINEAR, bound=bound)
    if seq.schedule is not None and seq.schedule.limsup_ratio() > 0:
        return ZbarProfile(points, POSITIVE_LIMSUP, limsup=seq.schedule.limsup_ratio())
    upper = [float(r) for n, _, r in points if n > N // 2]
    return ZbarProfile(points, INCONCLUSIVE, trend=max(upper) if upper else None)
