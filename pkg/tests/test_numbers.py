from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from betathermo.errors import PrecisionExhausted
from betathermo.numbers import CertifiedReal, NumberField, parse_beta


def test_rational_is_exact():
    x = parse_beta("3/2")
    assert x.is_exact and x.exact == Fraction(3, 2)
    assert x.ceil() == 2


def test_golden_expression_is_exact_quadratic():
    x = parse_beta("(1+sqrt 5)/2")
    assert x.is_exact
    lo, hi = x.enclosure(80)
    # x^2 - x - 1 changes sign across the enclosure, which is tight
    assert lo * lo - lo - 1 <= 0 <= hi * hi - hi - 1
    assert hi - lo < Fraction(1, 2 ** 70)
    assert x.ceil() == 2


@pytest.mark.parametrize("text", ["(1+sqrt(5))/2", "(1 + √5)/2", "1/2 + sqrt(5)/2"])
def test_equivalent_spellings(text):
    x = parse_beta(text)
    assert x.is_exact
    assert abs(float(x) - 1.6180339887498949) < 1e-12


def test_decimal_is_interval():
    x = parse_beta("1.8")
    assert not x.is_exact
    lo, hi = x.enclosure(64)
    assert lo == Fraction(175, 100) and hi == Fraction(185, 100)


def test_ambiguous_ceiling_raises():
    with pytest.raises(PrecisionExhausted):
        CertifiedReal.interval(Fraction(19, 10), Fraction(21, 10)).ceil()


def test_number_field_arithmetic():
    field = NumberField([-5, 0, 1], 2, 3, "sqrt5")
    s = field.generator
    assert (s * s).is_rational and (s * s).coeffs[0] == 5
    assert ((s + 1) * (s - 1)).coeffs[0] == 4
    assert (s * 2).floor() == 4


@given(st.fractions(min_value=Fraction(11, 10), max_value=Fraction(50, 1)))
def test_rational_ceiling_matches_fraction_arithmetic(q):
    x = CertifiedReal.rational(q)
    expected = -((-q.numerator) // q.denominator)
    assert x.ceil() == expected


@given(st.integers(2, 400).filter(lambda d: int(d ** 0.5) ** 2 != d))
def test_surd_floor_matches_isqrt(d):
    from math import isqrt
    x = parse_beta(f"sqrt {d}")
    assert x.is_exact
    assert x.ceil() == isqrt(d) + 1
