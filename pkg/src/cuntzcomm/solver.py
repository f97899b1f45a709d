"""Right inverse of ``T b = ([v, b_i] + [u, b_{i-1}])_{i=2..n}`` and the quadratic solve.

``T L = 1 - E`` holds exactly, where ``L`` and ``E`` are explicit. ``E`` is a
strict contraction for the weighted sup norm
``||x||' = max_i (2 - i^2/n^2)^(-1/2) ||x_i||`` with ratio ``1 - 1/(8 n^2)``,
so ``R = L (1 - E)^{-1}`` is computed as a truncated Neumann series with a
certified geometric tail. Picard iteration ``b <- R(a + delta F(b) + delta G(b, b))``
then solves ``T b = a + delta F(b) + delta G(b, b)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import algebra as alg
from . import blocks
from .algebra import GradedElement
from .errors import ConditionViolatedError, LevelCapError, ResourceError, ShapeError
from .norms import NormInterval, down, mul_down, mul_up, norm_interval, sup_interval, up
from .rational import SQRT2, Enclosure, fraction_to_float_down, fraction_to_float_up
from .scalars import Backend

log = logging.getLogger(__name__)

BILINEAR_BOUND = 2
DEFAULT_STORAGE_BUDGET = 2**22


@dataclass(frozen=True)
class ElementTuple:
    """Finite sequence of algebra elements indexed ``offset, offset+1, ...``.

    Domain tuples (``b``) start at 1 and have length ``n``; range tuples
    (``a``, ``T b``) start at 2 and have length ``n - 1``.
    """

    entries: tuple
    offset: int = 1

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ShapeError("empty tuple")
        if len({e.backend for e in entries}) != 1:
            raise ShapeError("mixed backends inside a tuple")
        object.__setattr__(self, "entries", entries)

    @property
    def backend(self) -> Backend:
        return self.entries[0].backend

    @property
    def n(self) -> int:
        return len(self.entries) + self.offset - 1

    def __len__(self):
        return len(self.entries)

    def get(self, i: int) -> GradedElement:
        """Entry with index ``i``; zero outside the stored range."""
        k = i - self.offset
        if 0 <= k < len(self.entries):
            return self.entries[k]
        return alg.zero(self.backend)

    def indices(self) -> range:
        return range(self.offset, self.offset + len(self.entries))

    def _like(self, entries) -> "ElementTuple":
        return ElementTuple(tuple(entries), self.offset)

    def _check(self, other: "ElementTuple") -> None:
        if other.offset != self.offset or len(other) != len(self):
            raise ShapeError("tuple shapes differ")

    def __add__(self, other: "ElementTuple") -> "ElementTuple":
        self._check(other)
        return self._like(alg.add(a, b) for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: "ElementTuple") -> "ElementTuple":
        self._check(other)
        return self._like(alg.sub(a, b) for a, b in zip(self.entries, other.entries))

    def scale(self, c) -> "ElementTuple":
        return self._like(alg.scalar_mul(c, a) for a in self.entries)

    def __eq__(self, other):
        if not isinstance(other, ElementTuple):
            return NotImplemented
        return (other.offset == self.offset and len(other) == len(self)
                and all(alg.equals(a, b) for a, b in zip(self.entries, other.entries)))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(not e.blocks for e in self.entries)

    def max_level(self) -> int:
        return max(e.max_level() for e in self.entries)

    def storage(self) -> int:
        """Stored coefficient slots: every entry of a dense block, non-zeros of a sparse one."""
        return sum(blocks.storage(b.matrix) for e in self.entries for b in e.blocks.values())

    def entry_intervals(self, **kw) -> list[NormInterval]:
        return [norm_interval(e, **kw) for e in self.entries]

    def sup_norm_interval(self, **kw) -> NormInterval:
        return sup_interval(self.entry_intervals(**kw))

    def to_strings(self) -> list[str]:
        return [alg.format_element(e) for e in self.entries]

    def __repr__(self):
        return f"ElementTuple({self.to_strings()!r}, offset={self.offset})"


def domain_tuple(entries: Sequence[GradedElement]) -> ElementTuple:
    return ElementTuple(tuple(entries), 1)


def range_tuple(entries: Sequence[GradedElement]) -> ElementTuple:
    return ElementTuple(tuple(entries), 2)


def zeros_domain(n: int, backend: Backend = Backend.EXACT) -> ElementTuple:
    return domain_tuple([alg.zero(backend)] * n)


def zeros_range(n: int, backend: Backend = Backend.EXACT) -> ElementTuple:
    return range_tuple([alg.zero(backend)] * (n - 1))


def _gens(backend: Backend):
    u, v = alg.gen_u(backend), alg.gen_v(backend)
    return u, v, alg.adjoint(u), alg.adjoint(v)


def _require_domain(b: ElementTuple) -> int:
    if b.offset != 1 or len(b) < 2:
        raise ShapeError("expected a domain tuple b_1..b_n with n >= 2")
    return len(b)


def _require_range(y: ElementTuple, n: int | None = None) -> int:
    if y.offset != 2:
        raise ShapeError("expected a range tuple indexed 2..n")
    if n is not None and y.n != n:
        raise ShapeError(f"range tuple has n = {y.n}, expected {n}")
    return y.n


def make_a(n: int, backend: Backend = Backend.EXACT) -> ElementTuple:
    """Range tuple ``(0, ..., 0, n * 1)``."""
    if n < 2:
        raise ShapeError("n must be at least 2")
    z = alg.zero(backend)
    return range_tuple([z] * (n - 2) + [alg.scalar_mul(n, alg.unit(backend))])


def op_T(b: ElementTuple) -> ElementTuple:
    """``(T b)_i = [v, b_i] + [u, b_{i-1}]`` for ``i = 2..n``."""
    n = _require_domain(b)
    u, v, _, _ = _gens(b.backend)
    return range_tuple([
        alg.add(alg.commutator(v, b.get(i)), alg.commutator(u, b.get(i - 1)))
        for i in range(2, n + 1)
    ])


def op_L(y: ElementTuple) -> ElementTuple:
    """``(L x)_i = -x_i v*/2 - x_{i+1} u*/2`` for ``i = 1..n`` with ``x_1 = x_{n+1} = 0``."""
    n = _require_range(y)
    _, _, us, vs = _gens(y.backend)
    half = Fraction(-1, 2)
    return domain_tuple([
        alg.scalar_mul(half, alg.add(alg.mul(y.get(i), vs), alg.mul(y.get(i + 1), us)))
        for i in range(1, n + 1)
    ])


def op_E(y: ElementTuple) -> ElementTuple:
    """``(E x)_i = (v x_i v* + v x_{i+1} u* + u x_{i-1} v* + u x_i u*) / 2``, zero boundary."""
    n = _require_range(y)
    half = Fraction(1, 2)
    return range_tuple([
        alg.scalar_mul(half, alg.psi_assemble(y.get(i), y.get(i - 1), y.get(i + 1), y.get(i)))
        for i in range(2, n + 1)
    ])


def op_F(b: ElementTuple) -> ElementTuple:
    """``(F b)_i = -i b_{i+1}`` for ``i = 2..n-1`` and ``(F b)_n = 0``."""
    n = _require_domain(b)
    z = alg.zero(b.backend)
    return range_tuple([alg.scalar_mul(-i, b.get(i + 1)) for i in range(2, n)] + [z])


def op_G(b: ElementTuple, c: ElementTuple) -> ElementTuple:
    """``G(b, c)_i = -b_i [u, c_n]`` for ``i = 2..n``."""
    n = _require_domain(b)
    if _require_domain(c) != n:
        raise ShapeError("G needs tuples of equal length")
    u = alg.gen_u(b.backend)
    k = alg.commutator(u, c.get(n))
    return range_tuple([alg.scalar_mul(-1, alg.mul(b.get(i), k)) for i in range(2, n + 1)])


def norm_F_bound(n: int) -> int:
    """Exact operator norm of ``F``: ``n - 1``, or 0 when ``n = 2`` (``F`` is the zero map)."""
    return n - 1 if n >= 3 else 0


def weight_squared(i: int, n: int) -> Fraction:
    """``(2 - i^2/n^2)^(-1)``."""
    return Fraction(n * n, 2 * n * n - i * i)


def weight_interval(i: int, n: int) -> tuple[float, float]:
    w2 = weight_squared(i, n)
    p, q = math.isqrt(w2.numerator), math.isqrt(w2.denominator)
    if p * p == w2.numerator and q * q == w2.denominator:
        w = Fraction(p, q)
        return fraction_to_float_down(w), fraction_to_float_up(w)
    return (down(math.sqrt(fraction_to_float_down(w2))),
            up(math.sqrt(fraction_to_float_up(w2))))


def weighted_norm_interval(y: ElementTuple, intervals: Sequence[NormInterval] | None = None) -> NormInterval:
    """Enclosure of ``max_i (2 - i^2/n^2)^(-1/2) ||y_i||``."""
    n = _require_range(y)
    if intervals is None:
        intervals = y.entry_intervals()
    scaled = []
    for i, iv in zip(y.indices(), intervals):
        w_lo, w_hi = weight_interval(i, n)
        scaled.append(NormInterval(max(0.0, mul_down(iv.lo, w_lo)), mul_up(iv.hi, w_hi)))
    return sup_interval(scaled)


def contraction_ratio(n: int) -> Fraction:
    return 1 - Fraction(1, 8 * n * n)


def neumann_tail(n: int, K: int, weighted_hi: float) -> float:
    """Sup-norm bound on ``sum_{k > K} E^k y`` given ``||y||' <= weighted_hi``."""
    if weighted_hi == 0:
        return 0.0
    factor = contraction_ratio(n) ** (K + 1) * 8 * n * n * SQRT2.hi
    return up(fraction_to_float_up(factor) * weighted_hi)


def _proportional(z: ElementTuple, y: ElementTuple):
    """Exact ``lam`` with ``z = lam * y``, or ``None``."""
    lam = None
    for yi, zi in zip(y.entries, z.entries):
        if not yi.blocks:
            continue
        d, blk = next(iter(yi.blocks.items()))
        other = zi.block(d)
        if other is None:
            lam = 0
        else:
            level = max(blk.level, other.level)
            r, c, val = blocks.first_nonzero(blk.raised(level).matrix)
            lam = other.raised(level).matrix[r, c] / val
        break
    if lam is None:
        return None
    if z == y.scale(lam):
        return lam
    return None


def neumann_inverse_apply(y: ElementTuple, K: int, *, closed_form: bool = False,
                          storage_budget: int = DEFAULT_STORAGE_BUDGET):
    """``(sum_{k<=K} E^k y, tail)`` with ``tail`` bounding the sup-norm error.

    With ``closed_form`` on the exact backend, an exact eigenvector ``E y = lam y``
    is summed in closed form as ``y / (1 - lam)`` and the tail is zero.
    Raises :class:`LevelCapError` before a term would pass the level cap and
    :class:`ResourceError` before a term could need more than ``storage_budget``
    coefficient slots (one application of ``E`` at most quadruples storage).
    """
    n = _require_range(y)
    if K < 0:
        raise ValueError("truncation depth K must be non-negative")
    if y.is_zero():
        return y, 0.0
    if closed_form and y.backend is Backend.EXACT:
        Ey = op_E(y)
        lam = _proportional(Ey, y)
        if lam is not None and abs(complex(lam)) < 1:
            return y.scale(1 / (1 - lam)), 0.0
    cap = alg.get_level_cap()
    total, term = y, y
    for k in range(K):
        if term.max_level() + 1 > cap:
            raise LevelCapError(f"term {k + 1} of the Neumann sum may exceed the level cap {cap}")
        if 4 * term.storage() > storage_budget:
            raise ResourceError(
                f"term {k + 1} of the Neumann sum may need {4 * term.storage()} coefficient slots"
            )
        term = op_E(term)
        if term.is_zero():
            break
        total = total + term
    tail = neumann_tail(n, K, weighted_norm_interval(y).hi)
    return total, tail


def op_R(y: ElementTuple, K: int, *, closed_form: bool = False,
         storage_budget: int = DEFAULT_STORAGE_BUDGET):
    """``(L sum_{k<=K} E^k y, tail)``; ``||L|| <= 1`` so the tail carries over."""
    partial, tail = neumann_inverse_apply(y, K, closed_form=closed_form,
                                          storage_budget=storage_budget)
    return op_L(partial), tail


def condition_value(n: int, delta) -> Enclosure:
    """``delta (2 ||F|| ||R|| + 4 r ||R||^2 ||a||)`` with ``||R|| <= 8 sqrt2 n^2``, ``r = 2``, ``||a|| = n``."""
    delta = Fraction(delta)
    R = SQRT2 * (8 * n * n)
    R_sq = Fraction(128 * n**4)
    return (R * (2 * norm_F_bound(n)) + 4 * BILINEAR_BOUND * R_sq * n) * delta


def residual(b: ElementTuple, n: int, delta):
    """``T b - a - delta F(b) - delta G(b, b)`` and its sup-norm enclosure."""
    if _require_domain(b) != n:
        raise ShapeError(f"b has length {len(b)}, expected {n}")
    delta = Fraction(delta)
    rhs = make_a(n, b.backend) + op_F(b).scale(delta) + op_G(b, b).scale(delta)
    res = op_T(b) - rhs
    return res, res.sup_norm_interval()


@dataclass(frozen=True)
class SolverParams:
    n: int
    delta: Fraction
    K: int = 8
    max_iters: int = 20
    tol: float = 1e-12
    backend: Backend = Backend.EXACT
    closed_form: bool = True
    storage_budget: int = DEFAULT_STORAGE_BUDGET
    r: int = BILINEAR_BOUND

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.K < 0 or self.max_iters < 1 or not self.tol > 0:
            raise ValueError("K >= 0, max_iters >= 1 and tol > 0 required")
        if self.r != BILINEAR_BOUND:
            raise ValueError("the bilinear bound r is fixed at 2")

    @classmethod
    def default_delta(cls, n: int, **kw) -> "SolverParams":
        return cls(n=n, delta=Fraction(1, 2000 * n**5), **kw)


@dataclass
class ResidualReport:
    residual: ElementTuple
    sup_norm: NormInterval
    tail: float
    condition: Enclosure
    iterations: int = 0
    converged: bool = False
    stop_reason: str = ""
    history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "residual_sup_norm": self.sup_norm.as_dict(),
            "neumann_tail": self.tail,
            "condition": {"lo": self.condition.float_lo(), "hi": self.condition.float_hi(),
                          "holds": self.condition.lt(1)},
            "iterations": self.iterations,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "residual_history_hi": list(self.history),
        }


def solve_b(p: SolverParams):
    """Picard iteration from ``b = 0``; returns the best iterate and its report.

    Raises :class:`ConditionViolatedError` when the smallness condition fails.
    Iteration stops at ``tol``, at an exact fixed point, at ``max_iters``, or
    when the next Neumann sum would exceed the level cap or the storage
    budget (flagged in ``stop_reason``, best iterate returned).
    """
    cond = condition_value(p.n, p.delta)
    if not cond.lt(1):
        raise ConditionViolatedError(
            f"delta (2|F||R| + 4r|R|^2|a|) in [{float(cond.lo):.6g}, {float(cond.hi):.6g}] is not < 1"
        )
    a = make_a(p.n, p.backend)
    b = zeros_domain(p.n, p.backend)
    best = None
    history: list[float] = []
    stop, converged, it = "max_iters", False, 0
    for it in range(1, p.max_iters + 1):
        try:
            rhs = a + op_F(b).scale(p.delta) + op_G(b, b).scale(p.delta)
            b_new, tail = op_R(rhs, p.K, closed_form=p.closed_form,
                               storage_budget=p.storage_budget)
        except ResourceError as exc:
            if best is None:
                raise
            log.info("Picard iteration %d stopped: %s", it, exc)
            stop = "level_cap" if isinstance(exc, LevelCapError) else "storage_budget"
            it -= 1
            break
        res, res_iv = residual(b_new, p.n, p.delta)
        history.append(res_iv.hi)
        log.debug("iteration %d: residual hi %.3e, tail %.3e", it, res_iv.hi, tail)
        if best is None or res_iv.hi <= best[2].hi:
            best = (b_new, res, res_iv, tail, it)
        if res_iv.hi <= p.tol:
            stop, converged = "tol", True
            break
        if p.backend is Backend.EXACT and b_new == b:
            stop = "fixed_point"
            break
        b = b_new
    b_best, res, res_iv, tail, _ = best
    report = ResidualReport(res, res_iv, tail, cond, it, converged, stop, history)
    return b_best, report
