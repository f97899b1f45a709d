"""Scalar backends: exact Gaussian rationals and double-precision complex.

Exact scalars are plain ``int``/``Fraction`` whenever the imaginary part
vanishes; :class:`GaussianRational` only appears for genuinely complex values,
which keeps the common real case on the fast ``Fraction`` path.
"""
from __future__ import annotations

import enum
import numbers
from fractions import Fraction

from .errors import BackendMismatchError


class Backend(str, enum.Enum):
    EXACT = "exact"
    DOUBLE = "double"


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts, ``im != 0``.

    Construct through :func:`gaussian`, which collapses to a ``Fraction``
    when the imaginary part is zero.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _parts(z):
        if isinstance(z, GaussianRational):
            return z.re, z.im
        if isinstance(z, (int, Fraction)):
            return Fraction(z), Fraction(0)
        return NotImplemented

    def __add__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return p
        return gaussian(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return p
        return gaussian(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return p
        return gaussian(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return p
        a, b = self.re, self.im
        c, d = p
        return gaussian(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c, d = self._parts(other)
        den = c * c + d * d
        a, b = self.re, self.im
        return gaussian((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            return p
        return GaussianRational(*p) / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        p = self._parts(other)
        if p is NotImplemented:
            if isinstance(other, numbers.Complex):
                return complex(self) == other
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __repr__(self):
        return f"({self.re},{self.im})"


def gaussian(re, im=0):
    """Exact complex scalar; a ``Fraction`` when ``im == 0``."""
    re = Fraction(re)
    im = Fraction(im)
    if im == 0:
        return re
    return GaussianRational(re, im)


def is_exact_scalar(c) -> bool:
    return isinstance(c, (int, Fraction, GaussianRational)) and not isinstance(c, bool)


def is_double_scalar(c) -> bool:
    return isinstance(c, (float, complex)) or (
        isinstance(c, numbers.Complex) and not is_exact_scalar(c)
    )


def coerce(c, backend: Backend, *, lossy: bool = False):
    """Convert ``c`` to a scalar of ``backend``.

    Python ints are neutral. Floats are rejected on the exact backend. Exact
    rationals are converted to doubles only when ``lossy`` is set.
    """
    if isinstance(c, bool):
        c = int(c)
    if backend is Backend.EXACT:
        if is_exact_scalar(c):
            return c
        raise BackendMismatchError(f"floating scalar {c!r} used with the exact backend")
    if isinstance(c, int):
        return complex(c)
    if is_exact_scalar(c):
        if not lossy:
            raise BackendMismatchError(f"exact scalar {c!r} used with the double backend")
        return complex(c) if isinstance(c, GaussianRational) else complex(float(c))
    return complex(c)


def to_complex(c) -> complex:
    if isinstance(c, GaussianRational):
        return complex(c)
    if isinstance(c, Fraction):
        return complex(float(c))
    return complex(c)
