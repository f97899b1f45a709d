from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuntzcomm.errors import BackendMismatchError, ParseError
from cuntzcomm.rational import (
    LN2,
    SQRT2,
    Enclosure,
    format_rational,
    fraction_to_float_down,
    fraction_to_float_up,
    ln_enclosure,
    parse_rational,
)
from cuntzcomm.scalars import Backend, GaussianRational, coerce, gaussian, to_complex

from strategies import rationals


def test_gaussian_collapses_to_fraction():
    assert gaussian(3, 0) == Fraction(3)
    assert isinstance(gaussian(3, 0), Fraction)
    assert isinstance(gaussian(1, 2), GaussianRational)


def test_gaussian_arithmetic():
    i = gaussian(0, 1)
    assert i * i == -1
    assert (gaussian(1, 2) * gaussian(1, -2)) == 5
    assert gaussian(1, 1) / gaussian(1, 1) == 1
    assert gaussian(1, 2).conjugate() == gaussian(1, -2)
    assert complex(gaussian(Fraction(1, 2), -3)) == complex(0.5, -3)


@given(rationals, rationals, rationals, rationals)
def test_gaussian_field_laws(a, b, c, d):
    x, y = gaussian(a, b), gaussian(c, d)
    assert x * y == y * x
    assert x + y - y == x
    assert gaussian(a, -b) * gaussian(c, -d) == _conj(x * y)
    if y != 0:
        assert (x / y) * y == x


def _conj(z):
    return z.conjugate() if isinstance(z, GaussianRational) else z


def test_division_by_gaussian():
    assert Fraction(1) / gaussian(0, 1) == gaussian(0, -1)
    assert 2 / gaussian(1, 1) == gaussian(1, -1)


def test_coerce_and_to_complex():
    assert coerce(Fraction(1, 3), Backend.DOUBLE, lossy=True) == pytest.approx(1 / 3)
    with pytest.raises(BackendMismatchError):
        coerce(Fraction(1, 3), Backend.DOUBLE)
    with pytest.raises(BackendMismatchError):
        coerce(0.5, Backend.EXACT)
    assert to_complex(gaussian(1, 1)) == 1 + 1j


@pytest.mark.parametrize("text, value", [
    ("1/64000", Fraction(1, 64000)),
    ("2^-20", Fraction(1, 2**20)),
    ("3*2^-5", Fraction(3, 32)),
    ("0.25", Fraction(1, 4)),
    ("7", Fraction(7)),
])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["", "1/0", "abc", "2^x"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


def test_format_rational_roundtrip():
    for q in (Fraction(1, 2048000), Fraction(-7, 3), Fraction(5)):
        assert parse_rational(format_rational(q)) == q


@given(st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**9))
def test_directed_fraction_to_float(q):
    assert Fraction(fraction_to_float_down(q)) <= q <= Fraction(fraction_to_float_up(q))


def test_constants_bracket_true_values():
    assert SQRT2.lo**2 < 2 < SQRT2.hi**2
    import math
    assert LN2.lo < Fraction(math.log(2)) < LN2.hi


def test_enclosure_arithmetic():
    a = Enclosure(1, 2)
    b = Enclosure(-1, 3)
    assert (a + b) == Enclosure(0, 5)
    assert (a * b) == Enclosure(-2, 6)
    assert a.reciprocal() == Enclosure(Fraction(1, 2), 1)
    with pytest.raises(ZeroDivisionError):
        b.reciprocal()
    assert (a**2) == Enclosure(1, 4)
    assert a.lt(3) and not a.lt(2)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6))
def test_ln_enclosure_contains_log(x):
    import math
    enc = ln_enclosure(x)
    v = Fraction(math.log(float(x)))
    # math.log is within an ulp or two; the enclosure must cover it with slack
    assert enc.lo <= v <= enc.hi


def test_ln_enclosure_powers_of_two_exact_bracket():
    enc = ln_enclosure(Fraction(2**20))
    assert enc == LN2 * 20
