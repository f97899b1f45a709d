"""Exact arithmetic in the dense *-subalgebra of the Cuntz algebra O_2.

Every element is a finite sum of words ``s_mu s_nu^*`` in the isometries
``u`` and ``v``. Grouping words by gauge degree ``|mu| - |nu|`` and expanding
each word by suffixes (``s_mu s_nu^* = s_mu0 s_nu0^* + s_mu1 s_nu1^*``) turns
the element into one matrix per degree; the normal form keeps each matrix at
the smallest level from which it cannot be reduced any further. Equality of
normal forms is equality in O_2.
"""
from __future__ import annotations

import contextlib
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import blocks
from .errors import BackendMismatchError, LevelCapError, ParseError
from .scalars import Backend, GaussianRational, coerce, gaussian

DEFAULT_LEVEL_CAP = 16
_level_cap = DEFAULT_LEVEL_CAP

LETTERS = "uv"


def get_level_cap() -> int:
    return _level_cap


def set_level_cap(cap: int) -> None:
    global _level_cap
    if cap < 0:
        raise ValueError("level cap must be non-negative")
    _level_cap = int(cap)


@contextlib.contextmanager
def level_cap(cap: int):
    old = get_level_cap()
    set_level_cap(cap)
    try:
        yield
    finally:
        set_level_cap(old)


def check_level(level: int) -> None:
    if level > _level_cap:
        raise LevelCapError(f"word level {level} exceeds the cap {_level_cap}")


def word_index(word: str) -> int:
    """Row/column index of ``word``; the last letter is the lowest bit."""
    idx = 0
    for ch in word:
        idx = (idx << 1) | LETTERS.index(ch)
    return idx


def index_word(idx: int, length: int) -> str:
    return "".join(LETTERS[(idx >> (length - 1 - t)) & 1] for t in range(length))


@dataclass(frozen=True)
class Block:
    """``sum M[mu, nu] s_mu s_nu^*`` over ``|mu| = level``, ``|nu| = level - degree``."""

    degree: int
    level: int
    matrix: object

    @property
    def col_level(self) -> int:
        return self.level - self.degree

    def raised(self, to_level: int) -> "Block":
        r = to_level - self.level
        if r < 0:
            raise ValueError("cannot lower a block level")
        if r == 0:
            return self
        check_level(to_level)
        check_level(to_level - self.degree)
        return Block(self.degree, to_level, blocks.kron_eye(self.matrix, r))

    def reduced(self) -> "Block | None":
        """Minimal-level equivalent block, or ``None`` for the zero block."""
        M, p = self.matrix, self.level
        if blocks.is_zero(M):
            return None
        while p >= 1 and p - self.degree >= 1:
            smaller = blocks.reduce_once(M)
            if smaller is None:
                break
            M, p = smaller, p - 1
        return Block(self.degree, p, M)


def _min_level(degree: int) -> int:
    return max(degree, 0)


class GradedElement:
    """Element of the algebraic part of O_2 in canonical block form.

    Instances are immutable. Use :func:`from_word`, :func:`parse_element` or
    arithmetic on :func:`unit`, :func:`gen_u`, :func:`gen_v` to build them.
    """

    __slots__ = ("_blocks", "backend")

    def __init__(self, block_map: Mapping[int, Block], backend: Backend):
        self._blocks = dict(sorted(block_map.items()))
        self.backend = Backend(backend)

    @classmethod
    def from_blocks(cls, raw: Iterable[Block], backend: Backend, *, normalize: bool = True):
        """Element from arbitrary blocks (several per degree allowed when normalizing)."""
        raw = list(raw)
        for b in raw:
            if blocks.backend_of(b.matrix) is not Backend(backend):
                raise BackendMismatchError("block backend differs from element backend")
        if normalize:
            return _sum_blocks(raw, Backend(backend))
        block_map = {}
        for b in raw:
            if b.degree in block_map:
                raise ValueError("unnormalized elements hold one block per degree")
            block_map[b.degree] = b
        return cls(block_map, backend)

    @property
    def blocks(self) -> dict[int, Block]:
        return dict(self._blocks)

    def degrees(self) -> list[int]:
        return list(self._blocks)

    def block(self, degree: int) -> Block | None:
        return self._blocks.get(degree)

    def max_level(self) -> int:
        return max((max(b.level, b.col_level) for b in self._blocks.values()), default=0)

    def __add__(self, other):
        if isinstance(other, GradedElement):
            return add(self, other)
        return add(self, scalar_mul(other, unit(self.backend)))

    __radd__ = __add__

    def __neg__(self):
        return scalar_mul(-1, self)

    def __sub__(self, other):
        return self + (-other if isinstance(other, GradedElement) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GradedElement):
            return mul(self, other)
        return scalar_mul(other, self)

    def __rmul__(self, other):
        return scalar_mul(other, self)

    def __truediv__(self, c):
        if self.backend is Backend.EXACT:
            return scalar_mul(1 / Fraction(c) if not isinstance(c, GaussianRational) else 1 / c, self)
        return scalar_mul(1 / complex(c), self)

    def __eq__(self, other):
        if not isinstance(other, GradedElement):
            if isinstance(other, (int, Fraction, float, complex, GaussianRational)):
                other = scalar_mul(coerce(other, self.backend, lossy=True), unit(self.backend))
            else:
                return NotImplemented
        return equals(self, other)

    __hash__ = None

    @property
    def H(self) -> "GradedElement":
        return adjoint(self)

    def adjoint(self) -> "GradedElement":
        return adjoint(self)

    def __bool__(self):
        return not is_zero(self)

    def __repr__(self):
        return f"GradedElement({format_element(self)!r}, {self.backend.value})"

    def __str__(self):
        return format_element(self)


def _check_same(x: GradedElement, y: GradedElement) -> Backend:
    if x.backend is not y.backend:
        raise BackendMismatchError(f"{x.backend.value} vs {y.backend.value}")
    return x.backend


def _sum_blocks(raw: list[Block], backend: Backend) -> GradedElement:
    by_degree: dict[int, list[Block]] = {}
    for b in raw:
        by_degree.setdefault(b.degree, []).append(b)
    out = {}
    for d, group in by_degree.items():
        if len(group) == 1:
            total = group[0]
        else:
            level = max(b.level for b in group)
            mats = [b.raised(level).matrix for b in group]
            acc = mats[0]
            for M in mats[1:]:
                acc = blocks.add(acc, M)
            total = Block(d, level, acc)
        red = total.reduced()
        if red is not None:
            out[d] = red
    return GradedElement(out, backend)


def normalize(x: GradedElement | Iterable[Block], backend: Backend | None = None) -> GradedElement:
    """Canonical form: zero blocks dropped, every block at its minimal level. Idempotent."""
    if isinstance(x, GradedElement):
        return _sum_blocks(list(x._blocks.values()), x.backend)
    if backend is None:
        raise ValueError("backend required for a raw block list")
    return _sum_blocks(list(x), Backend(backend))


def zero(backend: Backend = Backend.EXACT) -> GradedElement:
    return GradedElement({}, backend)


def unit(backend: Backend = Backend.EXACT) -> GradedElement:
    return from_word("", "", 1, backend)


def gen_u(backend: Backend = Backend.EXACT) -> GradedElement:
    return from_word("u", "", 1, backend)


def gen_v(backend: Backend = Backend.EXACT) -> GradedElement:
    return from_word("v", "", 1, backend)


def from_word(left: str, right: str, c=1, backend: Backend = Backend.EXACT) -> GradedElement:
    """``c * s_left * s_right^*`` in normal form."""
    backend = Backend(backend)
    c = coerce(c, backend, lossy=True) if backend is Backend.DOUBLE else coerce(c, backend)
    for ch in left + right:
        if ch not in LETTERS:
            raise ParseError(f"letter {ch!r} is not one of {LETTERS!r}")
    p, q = len(left), len(right)
    check_level(p)
    check_level(q)
    M = blocks.from_entries(1 << p, 1 << q, {(word_index(left), word_index(right)): c}, backend)
    return _sum_blocks([Block(p - q, p, M)], backend)


def add(x: GradedElement, y: GradedElement) -> GradedElement:
    backend = _check_same(x, y)
    return _sum_blocks(list(x._blocks.values()) + list(y._blocks.values()), backend)


def sub(x: GradedElement, y: GradedElement) -> GradedElement:
    return add(x, scalar_mul(-1, y))


def _mul_blocks(a: Block, b: Block) -> Block:
    level = max(a.col_level, b.level)
    ra, rb = level - a.col_level, level - b.level
    check_level(a.level + ra)
    check_level(b.col_level + rb)
    M = blocks.matmul_raised(a.matrix, ra, b.matrix, rb)
    return Block(a.degree + b.degree, a.level + ra, M)


def mul(x: GradedElement, y: GradedElement) -> GradedElement:
    backend = _check_same(x, y)
    raw = [_mul_blocks(a, b) for a in x._blocks.values() for b in y._blocks.values()]
    return _sum_blocks(raw, backend)


def scalar_mul(c, x: GradedElement) -> GradedElement:
    """``c * x``. Exact rationals are accepted (and rounded) on the double backend."""
    if x.backend is Backend.EXACT:
        c = coerce(c, Backend.EXACT)
    else:
        c = coerce(c, Backend.DOUBLE, lossy=True)
    if c == 0:
        return zero(x.backend)
    return GradedElement(
        {d: Block(d, b.level, blocks.scale(c, b.matrix)) for d, b in x._blocks.items()},
        x.backend,
    )


def adjoint(x: GradedElement) -> GradedElement:
    return GradedElement(
        {-d: Block(-d, b.col_level, blocks.adjoint(b.matrix)) for d, b in x._blocks.items()},
        x.backend,
    )


def commutator(x: GradedElement, y: GradedElement) -> GradedElement:
    return sub(mul(x, y), mul(y, x))


def equals(x: GradedElement, y: GradedElement) -> bool:
    _check_same(x, y)
    return is_zero(sub(x, y))


def is_zero(x: GradedElement) -> bool:
    return not normalize(x)._blocks


def degree_component(x: GradedElement, d: int) -> GradedElement:
    b = x._blocks.get(d)
    return GradedElement({d: b} if b is not None else {}, x.backend)


def psi_assemble(a: GradedElement, b: GradedElement, c: GradedElement, d: GradedElement) -> GradedElement:
    """``u a u^* + u b v^* + v c u^* + v d v^*`` by block placement.

    With the first letter as the top index bit, the four terms occupy the four
    quadrants of a block one level up, so no multiplication is needed.
    """
    parts = (a, b, c, d)
    backend = a.backend
    for e in parts[1:]:
        _check_same(a, e)
    out = []
    for deg in sorted({k for e in parts for k in e._blocks}):
        present = [e._blocks.get(deg) for e in parts]
        level = max(max(blk.level for blk in present if blk is not None), _min_level(deg))
        check_level(level + 1)
        check_level(level - deg + 1)
        rows, cols = 1 << level, 1 << (level - deg)
        mats = [
            blk.raised(level).matrix if blk is not None else blocks.zeros(rows, cols, backend)
            for blk in present
        ]
        out.append(Block(deg, level + 1, blocks.assemble(*mats)))
    return _sum_blocks(out, backend)


def to_backend(x: GradedElement, backend: Backend) -> GradedElement:
    backend = Backend(backend)
    if x.backend is backend:
        return x
    return _sum_blocks(
        [Block(d, b.level, blocks.convert(b.matrix, backend)) for d, b in x._blocks.items()],
        backend,
    )


def raise_levels(x: GradedElement, r: int) -> GradedElement:
    """Unnormalized copy of ``x`` with every block raised by ``r`` levels."""
    return GradedElement({d: b.raised(b.level + r) for d, b in x._blocks.items()}, x.backend)


def terms(x: GradedElement):
    """``(coefficient, left_word, right_word)`` triples of the normal form, sorted."""
    out = []
    for d, b in x._blocks.items():
        for r, c, val in sorted(blocks.nonzeros(b.matrix), key=lambda t: (t[0], t[1])):
            out.append((val, index_word(r, b.level), index_word(c, b.col_level)))
    return out


# --- text grammar -----------------------------------------------------------

_COEF = r"\(\s*[+-]?\d+(?:/\d+)?\s*,\s*[+-]?\d+(?:/\d+)?\s*\)|\d+(?:/\d+)?"
_TERM = re.compile(
    r"\s*([+-])?\s*(?:(" + _COEF + r")\s*(\*)?\s*)?([uvUV]+|1(?![\d/]))?\s*"
)


def _parse_coef(text: str):
    text = text.strip()
    if text.startswith("("):
        re_s, im_s = text[1:-1].split(",")
        return gaussian(Fraction(re_s.strip()), Fraction(im_s.strip()))
    return Fraction(text)


def _word_element(word: str, backend: Backend) -> GradedElement:
    out = unit(backend)
    for ch in word:
        g = gen_u(backend) if ch.lower() == "u" else gen_v(backend)
        out = mul(out, adjoint(g) if ch.isupper() else g)
    return out


def parse_element(text: str, backend: Backend = Backend.EXACT) -> GradedElement:
    """Parse e.g. ``'2*uV - 1/3*UV + (0,1)*v'``; ``U = u^*``, ``V = v^*``, ``'1'`` is the unit."""
    backend = Backend(backend)
    s = text.strip()
    if not s:
        raise ParseError("empty expression")
    pos, total, first = 0, zero(backend), True
    while pos < len(s):
        m = _TERM.match(s, pos)
        sign, coef, star, word = m.group(1), m.group(2), m.group(3), m.group(4)
        if m.end() == pos or (coef is None and word is None):
            raise ParseError(f"cannot parse term at {s[pos:]!r}")
        if sign is None and not first:
            raise ParseError(f"missing operator before {s[pos:]!r}")
        if star and word is None:
            raise ParseError(f"dangling '*' in {s!r}")
        c = _parse_coef(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        term = _word_element(word if word and word != "1" else "", backend)
        total = add(total, scalar_mul(c, term))
        pos, first = m.end(), False
    return total


def _format_coef(c) -> str:
    if isinstance(c, GaussianRational):
        return f"({_frac(c.re)},{_frac(c.im)})"
    if isinstance(c, (int, Fraction)):
        return _frac(Fraction(c))
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r},{c.imag!r})"


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _is_negative(c) -> bool:
    if isinstance(c, GaussianRational):
        return False
    if isinstance(c, (int, Fraction)):
        return c < 0
    c = complex(c)
    return c.imag == 0 and c.real < 0


def format_element(x: GradedElement) -> str:
    """Inverse of :func:`parse_element` on the exact backend."""
    parts = []
    for val, left, right in terms(x):
        word = left + right[::-1].upper() or "1"
        neg = _is_negative(val)
        mag = -val if neg else val
        coef = _format_coef(mag)
        body = word if coef == "1" else (coef if word == "1" else f"{coef}*{word}")
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"
