"""Seeded random test data: words, elements, tuples and matrices."""
from __future__ import annotations

import random
from fractions import Fraction

from . import algebra as alg
from . import blocks
from .algebra import GradedElement
from .opmatrix import OpMatrix
from .scalars import Backend, gaussian
from .solver import ElementTuple


def rng_for(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_word(rng: random.Random, max_len: int) -> str:
    return "".join(rng.choice(alg.LETTERS) for _ in range(rng.randint(0, max_len)))


def random_coefficient(rng: random.Random, complex_prob: float = 0.2):
    """Small non-zero rational, occasionally with an imaginary part."""
    re = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))
    if rng.random() < complex_prob:
        return gaussian(re, Fraction(rng.choice([-2, -1, 1, 2]), rng.randint(1, 3)))
    return re


def random_element(seed, *, max_len: int = 3, max_terms: int = 4, complex_prob: float = 0.2,
                   backend: Backend = Backend.EXACT) -> GradedElement:
    """Sum of up to ``max_terms`` terms ``c * s_mu s_nu^*`` with ``|mu|, |nu| <= max_len``."""
    rng = rng_for(seed)
    out = alg.zero(Backend.EXACT)
    for _ in range(rng.randint(1, max_terms)):
        term = alg.from_word(random_word(rng, max_len), random_word(rng, max_len),
                             random_coefficient(rng, complex_prob))
        out = alg.add(out, term)
    return alg.to_backend(out, Backend(backend))


def random_degree0_element(seed, level: int, *, density: float = 0.5,
                           backend: Backend = Backend.EXACT) -> GradedElement:
    """Single degree-0 block at ``level`` with random rational entries."""
    rng = rng_for(seed)
    size = 1 << level
    entries = {(r, c): random_coefficient(rng, 0.0)
               for r in range(size) for c in range(size) if rng.random() < density}
    if not entries:
        entries = {(0, 0): Fraction(1)}
    M = blocks.from_entries(size, size, entries, Backend.EXACT)
    return alg.to_backend(alg.normalize([alg.Block(0, level, M)], Backend.EXACT), Backend(backend))


def random_tuple(seed, length: int, offset: int = 1, **kw) -> ElementTuple:
    rng = rng_for(seed)
    return ElementTuple(tuple(random_element(rng, **kw) for _ in range(length)), offset)


def random_matrix(seed, size: int, **kw) -> OpMatrix:
    rng = rng_for(seed)
    return OpMatrix.from_rows([[random_element(rng, **kw) for _ in range(size)] for _ in range(size)])
