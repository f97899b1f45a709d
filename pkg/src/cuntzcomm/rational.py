"""Exact rationals: literal parsing and outward-rounded rational enclosures."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError

_POW2 = re.compile(r"^\s*([+-]?\d+)?\s*\*?\s*2\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``'p/q'``, ``'2^-k'``, ``'3*2^-5'``, integers or decimals exactly.

    >>> parse_rational('2^-20')
    Fraction(1, 1048576)
    """
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = str(text).strip()
    m = _POW2.match(s)
    if m:
        mult = int(m.group(1)) if m.group(1) else 1
        return mult * Fraction(2) ** int(m.group(2))
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational literal: {text!r}") from exc


def float_down(x: float) -> Fraction:
    """Rational ``<= x`` (exact conversion of the float just below)."""
    return Fraction(math.nextafter(x, -math.inf))


def float_up(x: float) -> Fraction:
    return Fraction(math.nextafter(x, math.inf))


def fraction_to_float_up(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else math.nextafter(f, math.inf)


def fraction_to_float_down(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) <= q else math.nextafter(f, -math.inf)


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval ``[lo, hi]`` bracketing a real constant."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, q) -> "Enclosure":
        q = Fraction(q)
        return cls(q, q)

    @staticmethod
    def _lift(x) -> "Enclosure":
        return x if isinstance(x, Enclosure) else Enclosure.exact(x)

    def __add__(self, other):
        o = self._lift(other)
        return Enclosure(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(min(p), max(p))

    __rmul__ = __mul__

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("enclosure contains zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return (self ** (-k)).reciprocal()
        out = Enclosure.exact(1)
        for _ in range(k):
            out = out * self
        return out

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def lt(self, x) -> bool:
        """Certainly below ``x``."""
        return self.hi < Fraction(x)

    def float_lo(self) -> float:
        return fraction_to_float_down(self.lo)

    def float_hi(self) -> float:
        return fraction_to_float_up(self.hi)

    def __repr__(self):
        return f"Enclosure[{float(self.lo):.10g}, {float(self.hi):.10g}]"


SQRT2 = Enclosure(Fraction(14142135, 10**7), Fraction(14142136, 10**7))
LN2 = Enclosure(Fraction(6931471, 10**7), Fraction(6931472, 10**7))


def ln_enclosure(x) -> Enclosure:
    """Enclosure of ``ln(x)`` for ``x > 0``.

    Powers of two use the exact ``LN2`` bracket; anything else goes through
    ``math.log`` with a few ulps of outward slack.
    """
    if isinstance(x, (int, Fraction)):
        q = Fraction(x)
        if q <= 0:
            raise ValueError("logarithm of a non-positive number")
        num, den = q.numerator, q.denominator
        if num & (num - 1) == 0 and den & (den - 1) == 0:
            k = num.bit_length() - den.bit_length()
            return LN2 * k
        xf = float(q)
    else:
        xf = float(x)
        if not xf > 0:
            raise ValueError("logarithm of a non-positive number")
    v = math.log(xf)
    slack = 4 * math.ulp(v) + 4 * 2.0**-52 * (abs(v) + 1.0)
    return Enclosure(Fraction(v) - Fraction(slack), Fraction(v) + Fraction(slack))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
