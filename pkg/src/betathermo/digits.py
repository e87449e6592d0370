"""Quasi-greedy beta-expansion of 1: computation, admissibility, inversion.

The expansion ``c = (c_1, c_2, ...)`` is produced by

    r_0 = 1,  c_{i+1} = ceil(beta * r_i) - 1,  r_{i+1} = beta * r_i - c_{i+1}

which keeps every remainder in ``(0, 1]`` and never ends in zeros only.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

import sympy

from .errors import DepthExceeded, IntegerBeta, NoRoot, PrecisionExhausted
from .numbers import (
    START_PRECISION,
    CertifiedReal,
    FieldElement,
    NumberField,
    iround,
    parse_beta,
    precision_cap,
)

COMPUTED = "computed-from-beta"
USER = "user-supplied"


@dataclass(frozen=True)
class ZeroRunSchedule:
    """Generative digit pattern ``1 0^L0 1 0^L1 1 0^L2 ...`` on the alphabet
    {0, 1} with ``L_k = scale * growth**k``.

    With ``growth >= 2`` the zero runs dominate the prefix length, so
    ``zbar(n)/n`` has a positive limsup (equal to ``growth - 1``).
    """

    scale: int
    growth: int

    def __post_init__(self):
        if self.scale < 1 or self.growth < 1:
            raise ValueError("schedule needs scale >= 1 and growth >= 1")

    def run(self, k: int) -> int:
        return self.scale * self.growth ** k

    def checkpoint(self, k: int) -> int:
        """Length of the prefix ending with the (k+1)-th one."""
        return k + 1 + sum(self.run(j) for j in range(k))

    def prefix(self, n: int) -> tuple[int, ...]:
        out: list[int] = []
        k = 0
        while len(out) < n:
            out.append(1)
            out.extend([0] * self.run(k))
            k += 1
        return tuple(out[:n])

    def digit(self, i: int) -> int:
        pos, k = 0, 0
        while True:
            if i == pos:
                return 1
            end = pos + self.run(k)
            if i <= end:
                return 0
            pos, k = end + 1, k + 1

    def limsup_ratio(self) -> Fraction:
        """Limit of ``z/m`` along the checkpoints."""
        if self.growth == 1:
            return Fraction(0)
        return Fraction(self.growth - 1)

    def describe(self) -> str:
        return f"{self.scale}*{self.growth}^k"


@dataclass(frozen=True)
class DigitSeq:
    """A certified prefix ``(c_1, ..., c_N)`` of the expansion of 1.

    ``period = (p, q)`` certifies ``c_{i+q} = c_i`` for ``i > p`` (the
    digits ``digits[p:p+q]`` repeat forever).  ``schedule`` certifies a
    generative zero-run pattern.  Either makes every digit available.
    """

    digits: tuple
    alphabet: int
    source: str = USER
    period: tuple | None = None
    schedule: ZeroRunSchedule | None = None

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        object.__setattr__(self, "digits", digits)
        b = self.alphabet
        if b < 2:
            raise ValueError("alphabet size must be at least 2")
        if not digits:
            raise ValueError("digit sequence is empty")
        for i, d in enumerate(digits):
            if not 0 <= d < b:
                raise ValueError(f"digit {d} at index {i} outside alphabet 0..{b - 1}")
        if digits[0] != b - 1:
            raise ValueError(f"first digit must be alphabet-1 = {b - 1}, got {digits[0]}")
        if self.period is not None and self.schedule is not None:
            raise ValueError("a sequence cannot carry both a period and a schedule")
        if self.period is not None:
            p, q = (int(v) for v in self.period)
            object.__setattr__(self, "period", (p, q))
            if p < 0 or q < 1 or p + q > len(digits):
                raise ValueError(f"period {(p, q)} needs p >= 0, q >= 1, p+q <= {len(digits)}")
            for i in range(p + q, len(digits)):
                if digits[i] != digits[i - q]:
                    raise ValueError(f"digit at index {i} breaks the declared period {(p, q)}")
            block = digits[p:p + q]
            if not any(block):
                raise ValueError("periodic part is all zeros; the expansion cannot end in zeros")
            if all(d == b - 1 for d in digits[:p + q]):
                raise IntegerBeta(f"digits ({b - 1})^inf describe the integer beta = {b}")
        if self.schedule is not None:
            if b != 2:
                raise ValueError("zero-run schedules live on the alphabet {0, 1}")
            if digits != self.schedule.prefix(len(digits)):
                raise ValueError("explicit digits disagree with the schedule")

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def generative(self) -> bool:
        return self.period is not None or self.schedule is not None

    def digit(self, i: int) -> int:
        """``c_{i+1}`` (0-based index)."""
        if i < len(self.digits):
            return self.digits[i]
        if self.period is not None:
            p, q = self.period
            return self.digits[p + (i - p) % q]
        if self.schedule is not None:
            return self.schedule.digit(i)
        raise DepthExceeded(f"digit c_{i + 1} requested but only {self.depth} digits are known")

    def prefix(self, n: int) -> tuple[int, ...]:
        if n <= len(self.digits):
            return self.digits[:n]
        if self.schedule is not None:
            return self.schedule.prefix(n)
        return tuple(self.digit(i) for i in range(n))

    def extended(self, n: int) -> "DigitSeq":
        """Same sequence with at least ``n`` explicit digits."""
        if n <= self.depth:
            return self
        return DigitSeq(self.prefix(n), self.alphabet, self.source, self.period, self.schedule)


# ---------------------------------------------------------------------------
# expansion


def _key(r):
    return r.coeffs if isinstance(r, FieldElement) else r


def _expand_exact(x, depth: int) -> DigitSeq:
    one = x.field.element([1]) if isinstance(x, FieldElement) else Fraction(1)
    r = one
    seen = {_key(r): 0}
    digits: list[int] = []
    period = None
    while len(digits) < depth:
        if period is not None:
            digits.append(digits[len(digits) - period[1]])
            continue
        t = x * r
        c = (t.ceil() if isinstance(t, FieldElement) else math.ceil(t)) - 1
        digits.append(c)
        r = t - c
        k = _key(r)
        if k in seen:
            period = (seen[k], len(digits) - seen[k])
        else:
            seen[k] = len(digits)
    return DigitSeq(tuple(digits), digits[0] + 1, COMPUTED, period=period)


class _Ambiguous(Exception):
    def __init__(self, index: int):
        self.index = index


def _expand_interval_at(beta: CertifiedReal, depth: int, bits: int) -> list[int]:
    blo, bhi = beta.enclosure(bits)
    rlo, rhi = Fraction(1), Fraction(1)
    digits = []
    for i in range(depth):
        products = (blo * rlo, blo * rhi, bhi * rlo, bhi * rhi)
        plo, phi = min(products), max(products)
        clo, chi = math.ceil(plo) - 1, math.ceil(phi) - 1
        if clo != chi:
            raise _Ambiguous(i)
        digits.append(clo)
        rlo, rhi = iround((plo - clo, phi - clo), bits)
    return digits


def _expand_interval(beta: CertifiedReal, depth: int) -> DigitSeq:
    cap = precision_cap()
    if beta.refine is None:
        # the enclosure is fixed; only rounding noise can be removed
        width = max(beta.width, Fraction(1, 1 << cap))
        need = -math.floor(math.log2(width)) + depth * max(1, math.ceil(math.log2(float(beta.hi)))) + 16
        schedule = [min(max(START_PRECISION, need), cap)]
    else:
        schedule, bits = [], START_PRECISION
        while bits <= cap:
            schedule.append(bits)
            bits *= 2
    failed_at = 0
    for bits in schedule:
        try:
            digits = _expand_interval_at(beta, depth, bits)
        except _Ambiguous as exc:
            failed_at = exc.index
            continue
        return DigitSeq(tuple(digits), digits[0] + 1, COMPUTED)
    raise PrecisionExhausted(
        f"digit c_{failed_at + 1} is ambiguous: ceil(beta*r) jumps inside the enclosure "
        f"at {schedule[-1]} bits of working precision")


def expand_one(beta: Union[CertifiedReal, str, int, Fraction], depth: int) -> DigitSeq:
    """First ``depth`` digits of the quasi-greedy expansion of 1 in base beta.

    Exact input (rational or algebraic) is expanded exactly and reports a
    periodicity certificate when a remainder repeats.  Interval input is
    expanded with outward rounding; precision doubles up to the cap while
    a ceiling is ambiguous.
    """
    if isinstance(beta, str):
        beta = parse_beta(beta)
    elif not isinstance(beta, CertifiedReal):
        beta = CertifiedReal.rational(beta)
    if depth < 1:
        raise ValueError("depth must be positive")
    if beta.is_integer():
        raise IntegerBeta(f"beta = {beta.describe()} is an integer (full shift)")
    if beta.hi <= 1 or (beta.is_exact and beta.ceil() <= 1):
        raise ValueError("beta must exceed 1")
    if beta.exact is not None:
        return _expand_exact(beta.exact, depth)
    return _expand_interval(beta, depth)


def suspected_period(seq: DigitSeq, min_repeats: int = 3) -> tuple[int, int] | None:
    """Smallest ``(p, q)`` such that the explicit digits look eventually
    periodic with at least ``min_repeats`` full periods.  Never a certificate."""
    d = seq.digits
    n = len(d)
    for total in range(1, n + 1):
        for q in range(1, total + 1):
            p = total - q
            if n - p < min_repeats * q:
                continue
            if all(d[i] == d[i - q] for i in range(p + q, n)):
                return (p, q)
    return None


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Admissibility:
    """Outcome of the lexicographic check ``T^k c <= c``.

    On failure ``shift`` is ``k`` and ``position`` the 0-based index into
    the digits of the first letter where the shifted sequence is larger.
    """

    ok: bool
    shift: int | None = None
    position: int | None = None
    warnings: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_admissible(seq: DigitSeq) -> Admissibility:
    n = seq.depth
    if seq.period is not None:
        p, q = seq.period
        n = max(n, 2 * (p + q))
    elif seq.schedule is not None:
        n = max(n, 64)
    c = seq.prefix(n)
    for k in range(1, n):
        for i in range(n - k):
            a, b = c[k + i], c[i]
            if a > b:
                return Admissibility(False, k, k + i)
            if a < b:
                break
    warnings = []
    if not seq.generative and c[-1] == 0:
        run = _trailing_zeros(c)
        warnings.append(
            f"digits end with {run} zero(s); a legal zero run cannot be told apart "
            f"from an all-zero tail at depth {len(c)}")
    return Admissibility(True, warnings=tuple(warnings))


def _trailing_zeros(c) -> int:
    run = 0
    for d in reversed(c):
        if d:
            break
        run += 1
    return run


# ---------------------------------------------------------------------------
# recovering beta


def _series_lower(c, x: Fraction) -> Fraction:
    y = 1 / x
    acc = Fraction(0)
    for d in reversed(c):
        acc = (acc + d) * y
    return acc


def _periodic_sum(seq: DigitSeq, x: Fraction) -> Fraction:
    p, q = seq.period
    head = _series_lower(seq.digits[:p], x)
    block = _series_lower(seq.digits[p:p + q], x)
    return head + block / (x ** p * (1 - x ** -q))


def _bisect_root(f, lo: Fraction, hi: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Bracket the root of a decreasing ``f(x) = 1`` with ``f(lo) >= 1 >= f(hi)``."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        v = f(mid)
        if v == 1:
            return mid, mid
        if v > 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _characteristic_polynomial(seq: DigitSeq, x):
    p, q = seq.period
    c = seq.digits
    head = sum(c[i - 1] * x ** (p - i) for i in range(1, p + 1))
    block = sum(c[p + i - 1] * x ** (q - i) for i in range(1, q + 1))
    return sympy.expand(x ** p * (x ** q - 1) - (x ** q - 1) * head - block)


def _algebraic_beta(seq: DigitSeq, lo: Fraction, hi: Fraction):
    x = sympy.Symbol("x")
    poly = sympy.Poly(_characteristic_polynomial(seq, x), x)
    slo, shi = sympy.Rational(lo.numerator, lo.denominator), sympy.Rational(hi.numerator, hi.denominator)
    for factor, _ in poly.factor_list()[1]:
        if factor.count_roots(slo, shi) == 1:
            coeffs = [Fraction(int(sympy.numer(a)), int(sympy.denom(a))) for a in reversed(factor.all_coeffs())]
            if factor.degree() == 1:
                return -coeffs[0] / coeffs[1]
            return NumberField(coeffs, lo, hi, name="beta").generator
    return None


def beta_from_digits(seq: DigitSeq, tol=Fraction(1, 10 ** 12)) -> CertifiedReal:
    """Enclosure of the unique ``beta > 1`` with ``sum c_i beta^-i = 1``.

    Periodic sequences are summed in closed form and additionally get an
    exact algebraic representation (the factor of the characteristic
    polynomial vanishing at beta).  Otherwise the unknown tail is bounded
    using digits ``<= alphabet - 1``; :class:`PrecisionExhausted` is raised
    when the known digits cannot pin beta down to ``tol``.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = seq.alphabet
    lo0 = Fraction(max(b - 1, 1))
    if seq.period is not None:
        def f(x):
            return _periodic_sum(seq, x) if x > 1 else Fraction(10 ** 9)

        for k in (b - 1, b):
            if k > 1 and f(Fraction(k)) == 1:
                raise NoRoot(f"digits describe the integer beta = {k}")
        if f(Fraction(b)) > 1:
            raise NoRoot("digits force beta >= alphabet size")
        lo, hi = _bisect_root(f, lo0, Fraction(b), tol)
        exact = _algebraic_beta(seq, lo, hi) if lo < hi else lo
        if isinstance(exact, Fraction):
            if exact.denominator == 1:
                raise NoRoot(f"digits describe the integer beta = {exact}")
            return CertifiedReal.rational(exact)
        if exact is None:
            return CertifiedReal.interval(lo, hi)
        return CertifiedReal(lo, hi, exact=exact)

    n = seq.depth
    while True:
        c = seq.prefix(n)

        def lower(x, c=c):
            return _series_lower(c, x)

        def upper(x, c=c):
            if x <= 1:
                return Fraction(10 ** 9)
            return _series_lower(c, x) + (b - 1) / (x ** len(c) * (x - 1))

        if lower(lo0) < 1:
            raise NoRoot("digits force beta <= 1")
        rlo, _ = _bisect_root(lower, lo0, Fraction(b + 1), tol / 4)
        _, rhi = _bisect_root(upper, lo0, Fraction(b + 1), tol / 4)
        if rhi - rlo <= tol:
            break
        if seq.schedule is None or n >= 1 << 14:
            raise PrecisionExhausted(
                f"{len(c)} digits only pin beta to [{float(rlo)}, {float(rhi)}]; need more digits for tol {float(tol)}")
        n *= 2
    if math.ceil(rlo) != math.ceil(rhi) or rlo.denominator == 1:
        raise NoRoot(f"cannot exclude an integer beta in [{float(rlo)}, {float(rhi)}]")
    return CertifiedReal.interval(rlo, rhi)


# ---------------------------------------------------------------------------
# file format

_SCHEDULE = re.compile(r"^(\d+)\s*\*\s*(\d+)\s*\^\s*k$")


def parse_digit_file(text: str) -> DigitSeq:
    """Parse the digit-sequence format::

        alphabet=2
        1 0 1 0
        period=0,2          # optional
        schedule=2*2^k      # optional, zero-run pattern
    """
    alphabet = period = schedule = None
    tokens: list[int] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = (s.strip() for s in line.partition("="))
            if key == "alphabet":
                alphabet = int(value)
            elif key == "period":
                p, q = (int(v) for v in value.split(","))
                period = (p, q)
            elif key == "schedule":
                m = _SCHEDULE.match(value)
                if not m:
                    raise ValueError(f"bad schedule {value!r}; expected '<scale>*<growth>^k'")
                schedule = ZeroRunSchedule(int(m.group(1)), int(m.group(2)))
            else:
                raise ValueError(f"unknown key {key!r} in digit file")
            continue
        tokens.extend(int(t) for t in line.split())
    if alphabet is None:
        raise ValueError("digit file needs an 'alphabet=<b>' line")
    if schedule is not None and not tokens:
        tokens = list(schedule.prefix(1))
    return DigitSeq(tuple(tokens), alphabet, USER, period=period, schedule=schedule)


def format_digit_file(seq: DigitSeq) -> str:
    lines = [f"alphabet={seq.alphabet}", " ".join(str(d) for d in seq.digits)]
    if seq.period is not None:
        lines.append(f"period={seq.period[0]},{seq.period[1]}")
    if seq.schedule is not None:
        lines.append(f"schedule={seq.schedule.describe()}")
    return "\n".join(lines) + "\n"


def read_digits(path) -> DigitSeq:
    return parse_digit_file(Path(path).read_text())
