"""Certified real numbers: exact rationals, exact algebraic numbers and
outward-rounded rational intervals.

The digit recurrence needs ``ceil(beta * r)`` to be *known*, not guessed.
Three representations are supported:

* ``Fraction`` -- exact rational beta.
* :class:`FieldElement` -- exact element of a number field ``Q(g)`` where the
  generator ``g`` is given by its minimal polynomial and an isolating
  interval.  Quadratic surds such as ``(1+sqrt 5)/2`` live in ``Q(sqrt 5)``;
  a root of ``x^3-x^2-x-1`` is the generator of its own field.
* an interval ``[lo, hi]`` with an optional refinement callback that can
  produce tighter enclosures at higher working precision.
"""

from __future__ import annotations

import ast
import math
import os
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from .errors import PrecisionExhausted

DEFAULT_PRECISION_CAP = 4096
START_PRECISION = 64

Interval = tuple  # (Fraction, Fraction)


def precision_cap() -> int:
    """Working-precision cap in bits (``BETATHERMO_PRECISION`` overrides)."""
    raw = os.environ.get("BETATHERMO_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION_CAP
    cap = int(raw)
    if cap < START_PRECISION:
        raise ValueError(f"BETATHERMO_PRECISION must be >= {START_PRECISION}")
    return cap


# ---------------------------------------------------------------------------
# interval helpers on Fractions

def round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.floor(x * scale), scale)


def round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.ceil(x * scale), scale)


def iround(a: Interval, bits: int) -> Interval:
    return (round_down(a[0], bits), round_up(a[1], bits))


def iadd(a: Interval, b: Interval) -> Interval:
    return (a[0] + b[0], a[1] + b[1])


def isub(a: Interval, b: Interval) -> Interval:
    return (a[0] - b[1], a[1] - b[0])


def imul(a: Interval, b: Interval) -> Interval:
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(products), max(products))


def idiv(a: Interval, b: Interval) -> Interval:
    if b[0] <= 0 <= b[1]:
        raise ZeroDivisionError("interval divisor contains zero")
    return imul(a, (1 / b[1], 1 / b[0]))


def isqrt_enclosure(a: Interval, bits: int) -> Interval:
    if a[0] < 0:
        raise ValueError("square root of an interval reaching below zero")
    scale = 1 << bits
    lo = Fraction(math.isqrt(math.floor(a[0] * scale * scale)), scale)
    hi = Fraction(math.isqrt(math.ceil(a[1] * scale * scale)) + 1, scale)
    return (lo, hi)


# ---------------------------------------------------------------------------
# number fields

def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


class NumberField:
    """``Q(g)`` for a real algebraic generator ``g``.

    ``minpoly`` lists the coefficients of an irreducible polynomial in
    ascending order; ``(lo, hi)`` must isolate the intended real root.
    Irreducibility is the caller's responsibility -- it is what makes the
    coefficient representation of an element canonical.
    """

    def __init__(self, minpoly: Sequence, lo, hi, name: str = "g"):
        coeffs = [Fraction(c) for c in minpoly]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise ValueError("minimal polynomial must have degree >= 1")
        lead = coeffs[-1]
        self.modulus = tuple(c / lead for c in coeffs)
        self.degree = len(coeffs) - 1
        self.name = name
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty isolating interval")
        flo, fhi = _poly_eval(self.modulus, lo), _poly_eval(self.modulus, hi)
        if lo == hi:
            if flo != 0:
                raise ValueError("degenerate isolating interval is not a root")
        elif flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
            raise ValueError("isolating interval needs a strict sign change")
        self._enclosure = (lo, hi)
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"NumberField(minpoly={self.modulus}, enclosure~{float(self._enclosure[0]):.6g})"

    def generator_enclosure(self, bits: int) -> Interval:
        """Bisect the isolating interval until its width is below ``2**-bits``."""
        target = Fraction(1, 1 << bits)
        with self._lock:
            lo, hi = self._enclosure
            if hi - lo <= target:
                return lo, hi
            sign_lo = _poly_eval(self.modulus, lo) > 0
            while hi - lo > target:
                mid = (lo + hi) / 2
                val = _poly_eval(self.modulus, mid)
                if val == 0:
                    lo = hi = mid
                    break
                if (val > 0) == sign_lo:
                    lo = mid
                else:
                    hi = mid
            self._enclosure = (lo, hi)
            return lo, hi

    def element(self, coeffs: Sequence) -> "FieldElement":
        return FieldElement(self, self.reduce([Fraction(c) for c in coeffs]))

    @property
    def generator(self) -> "FieldElement":
        if self.degree == 1:
            return self.element([-self.modulus[0]])
        return self.element([0, 1])

    def reduce(self, coeffs: list) -> tuple:
        coeffs = list(coeffs)
        n = self.degree
        for top in range(len(coeffs) - 1, n - 1, -1):
            c = coeffs[top]
            if c:
                for i in range(n):
                    coeffs[top - n + i] -= c * self.modulus[i]
            coeffs[top] = Fraction(0)
        coeffs = coeffs[:n] + [Fraction(0)] * (n - len(coeffs))
        return tuple(coeffs)


Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class FieldElement:
    """Exact element ``sum coeffs[i] * g**i`` of a :class:`NumberField`."""

    field: NumberField
    coeffs: tuple

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("elements of different number fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.element([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = [Fraction(0)] * (2 * self.field.degree - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        return FieldElement(self.field, self.field.reduce(prod))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def enclose(self, bits: int) -> Interval:
        """Rational interval containing the element, roughly ``2**-bits`` wide."""
        if self.is_rational():
            q = self.coeffs[0]
            return (q, q)
        mag = max(abs(c) for c in self.coeffs)
        extra = 8 + self.field.degree * 4 + max(0, int(mag).bit_length())
        g = iround(self.field.generator_enclosure(bits + extra), bits + extra)
        acc = (self.coeffs[-1], self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = iround(iadd(imul(acc, g), (c, c)), bits + extra)
        return iround(acc, bits)

    def floor(self) -> int:
        if self.is_rational():
            return math.floor(self.coeffs[0])
        bits = START_PRECISION
        cap = precision_cap()
        while bits <= cap:
            lo, hi = self.enclose(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2
        raise PrecisionExhausted(f"cannot separate {self} from an integer within {cap} bits")

    def ceil(self) -> int:
        return -((-self).floor())

    def __float__(self) -> float:
        lo, hi = self.enclose(64)
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*{self.field.name}^{i}")
        return " + ".join(terms) or "0"


Exact = Union[Fraction, FieldElement]


# ---------------------------------------------------------------------------
# certified reals

@dataclass(frozen=True)
class CertifiedReal:
    """A real number known to lie in ``[lo, hi]``.

    ``exact`` carries an exact representation when one is available;
    ``refine`` (if set) maps a precision in bits to a tighter enclosure.
    """

    lo: Fraction
    hi: Fraction
    exact: Exact | None = None
    refine: Callable[[int], Interval] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("CertifiedReal needs lo <= hi")

    @classmethod
    def rational(cls, q) -> "CertifiedReal":
        q = Fraction(q)
        return cls(q, q, exact=q)

    @classmethod
    def algebraic(cls, x: FieldElement) -> "CertifiedReal":
        if x.is_rational():
            return cls.rational(x.coeffs[0])
        lo, hi = x.enclose(START_PRECISION)
        return cls(lo, hi, exact=x)

    @classmethod
    def interval(cls, lo, hi, refine: Callable[[int], Interval] | None = None) -> "CertifiedReal":
        return cls(Fraction(lo), Fraction(hi), refine=refine)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def enclosure(self, bits: int) -> Interval:
        if isinstance(self.exact, Fraction):
            return (self.exact, self.exact)
        if isinstance(self.exact, FieldElement):
            return self.exact.enclose(bits)
        if self.refine is not None:
            lo, hi = self.refine(bits)
            return (max(lo, self.lo), min(hi, self.hi))
        return (self.lo, self.hi)

    def is_integer(self) -> bool:
        """True only when the value is certified to be an integer."""
        if isinstance(self.exact, Fraction):
            return self.exact.denominator == 1
        if isinstance(self.exact, FieldElement):
            return self.exact.is_rational() and self.exact.coeffs[0].denominator == 1
        return self.lo == self.hi and self.lo.denominator == 1

    def ceil(self) -> int:
        """``ceil`` of the value, certified, with precision escalation."""
        if isinstance(self.exact, Fraction):
            return math.ceil(self.exact)
        if isinstance(self.exact, FieldElement):
            return self.exact.ceil()
        bits, cap = START_PRECISION, precision_cap()
        while bits <= cap:
            lo, hi = self.enclosure(bits)
            if math.ceil(lo) == math.ceil(hi):
                return math.ceil(lo)
            if self.refine is None:
                break
            bits *= 2
        raise PrecisionExhausted(f"ceil is ambiguous over [{float(self.lo)}, {float(self.hi)}]")

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)

    def describe(self) -> str:
        if isinstance(self.exact, Fraction):
            return str(self.exact)
        return f"{float(self):.15g}"


# ---------------------------------------------------------------------------
# parsing

_DECIMAL = re.compile(r"^[+]?(\d+)\.(\d+)$")
_BRACKET = re.compile(r"^\[\s*([^,\]]+)\s*,\s*([^\]]+)\s*\]$")


class _NotQuadratic(Exception):
    pass


def _squarefree_split(n: int) -> tuple[int, int]:
    """``n = s**2 * d`` with ``d`` squarefree; returns ``(s, d)``."""
    s, d, k = 1, 1, 2
    rest = n
    while k * k <= rest:
        while rest % (k * k) == 0:
            rest //= k * k
            s *= k
        k += 1
    d = rest
    return s, d


# quadratic values are (a, b, d) meaning a + b*sqrt(d); d == 1 for rationals
def _q_norm(x):
    if isinstance(x, Fraction):
        return (x, Fraction(0), 1)
    return x


def _q_common(x, y):
    x, y = _q_norm(x), _q_norm(y)
    if x[2] != 1 and y[2] != 1 and x[2] != y[2]:
        if x[1] and y[1]:
            raise _NotQuadratic
    d = x[2] if x[1] else y[2]
    if x[1] == 0:
        x = (x[0], Fraction(0), d)
    if y[1] == 0:
        y = (y[0], Fraction(0), d)
    return x, y, d


def _q_add(x, y):
    x, y, d = _q_common(x, y)
    return (x[0] + y[0], x[1] + y[1], d)


def _q_neg(x):
    x = _q_norm(x)
    return (-x[0], -x[1], x[2])


def _q_mul(x, y):
    x, y, d = _q_common(x, y)
    return (x[0] * y[0] + x[1] * y[1] * d, x[0] * y[1] + x[1] * y[0], d)


def _q_inv(x):
    a, b, d = _q_norm(x)
    den = a * a - b * b * d
    if den == 0:
        raise ZeroDivisionError("division by zero in beta expression")
    return (a / den, -b / den, d)


def _q_sqrt(x):
    a, b, d = _q_norm(x)
    if b != 0:
        raise _NotQuadratic
    if a < 0:
        raise ValueError("square root of a negative number")
    num_s, num_d = _squarefree_split(a.numerator * a.denominator)
    # sqrt(p/q) = sqrt(p*q)/q
    if num_d == 1:
        return (Fraction(num_s, a.denominator), Fraction(0), 1)
    return (Fraction(0), Fraction(num_s, a.denominator), num_d)


class _Evaluator:
    def __init__(self, source: str, mode: str, bits: int = 0):
        self.source = source
        self.mode = mode
        self.bits = bits

    def literal(self, node) -> Fraction:
        text = ast.get_source_segment(self.source, node)
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ValueError(f"unsupported literal {text!r}")
        return Fraction(text)

    def run(self, node):
        if isinstance(node, ast.Expression):
            return self.run(node.body)
        if isinstance(node, ast.Constant):
            q = self.literal(node)
            return q if self.mode == "quad" else (q, q)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.run(node.operand)
            if isinstance(node.op, ast.UAdd):
                return v
            return _q_neg(v) if self.mode == "quad" else (-v[1], -v[0])
        if isinstance(node, ast.BinOp):
            left, right = self.run(node.left), self.run(node.right)
            op = node.op
            if isinstance(op, ast.Pow):
                exp = self._integer_exponent(node.right)
                return self._pow(left, exp)
            if self.mode == "quad":
                if isinstance(op, ast.Add):
                    return _q_add(left, right)
                if isinstance(op, ast.Sub):
                    return _q_add(left, _q_neg(right))
                if isinstance(op, ast.Mult):
                    return _q_mul(left, right)
                if isinstance(op, ast.Div):
                    return _q_mul(left, _q_inv(right))
            else:
                table = {ast.Add: iadd, ast.Sub: isub, ast.Mult: imul, ast.Div: idiv}
                fn = table.get(type(op))
                if fn is not None:
                    return iround(fn(left, right), self.bits)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords:
            arg = self.run(node.args[0])
            return _q_sqrt(arg) if self.mode == "quad" else isqrt_enclosure(arg, self.bits)
        raise ValueError(f"unsupported syntax in beta expression: {ast.dump(node)}")

    def _integer_exponent(self, node) -> int:
        value = _Evaluator(self.source, "quad").run(node)
        value = _q_norm(value)
        if value[1] != 0 or value[0].denominator != 1:
            raise ValueError("only integer exponents are supported")
        return int(value[0])

    def _pow(self, base, exp: int):
        if exp < 0:
            base = _q_inv(base) if self.mode == "quad" else idiv((Fraction(1), Fraction(1)), base)
            exp = -exp
        result = Fraction(1) if self.mode == "quad" else (Fraction(1), Fraction(1))
        for _ in range(exp):
            result = _q_mul(result, base) if self.mode == "quad" else iround(imul(result, base), self.bits)
        return result


def _normalize_expression(text: str) -> str:
    text = text.replace("√", "sqrt ").replace("^", "**")
    return re.sub(r"sqrt\s+(\d+(?:\.\d+)?)", r"sqrt(\1)", text)


def parse_beta(text: str) -> CertifiedReal:
    """Parse a beta expression.

    * ``3/2``, ``(1+sqrt 5)/2``, ``1 + sqrt(2)`` -- exact (rational or a
      single quadratic surd);
    * ``sqrt(2)+sqrt(3)`` and other radical expressions -- refinable
      intervals;
    * a bare decimal such as ``1.7549`` -- the interval of numbers that
      round to it (half a unit in the last place each side);
    * ``[lo, hi]`` -- an explicit interval with exact endpoints.
    """
    text = text.strip()
    m = _DECIMAL.match(text)
    if m:
        centre = Fraction(text)
        half_ulp = Fraction(1, 2 * 10 ** len(m.group(2)))
        return CertifiedReal.interval(centre - half_ulp, centre + half_ulp)
    m = _BRACKET.match(text)
    if m:
        lo, hi = (parse_beta(g).enclosure(START_PRECISION) for g in m.groups())
        return CertifiedReal.interval(lo[0], hi[1])
    source = _normalize_expression(text)
    tree = ast.parse(source, mode="eval")
    try:
        value = _q_norm(_Evaluator(source, "quad").run(tree))
    except _NotQuadratic:
        def refine(bits: int, _tree=tree, _source=source) -> Interval:
            return _Evaluator(_source, "interval", bits + 16).run(_tree)

        lo, hi = refine(START_PRECISION)
        return CertifiedReal.interval(lo, hi, refine=refine)
    a, b, d = value
    if b == 0:
        return CertifiedReal.rational(a)
    r = math.isqrt(d)
    qfield = NumberField([-d, 0, 1], r, r + 1, name=f"sqrt{d}")
    return CertifiedReal.algebraic(qfield.element([a, b]))
