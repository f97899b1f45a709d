"""Square matrices over O_2, the diagonal rescaling, and the amplification maps.

``phi(x) = [[u*xu, u*xv], [v*xu, v*xv]]`` and its inverse
``psi([[a, b], [c, d]]) = uau* + ubv* + vcu* + vdv*`` identify O_2 with
2x2 matrices over itself; iterating ``psi`` brings any ``2^k x 2^k`` matrix
back down to a single element without changing its norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import algebra as alg
from . import l2rep
from .algebra import GradedElement
from .errors import BackendMismatchError, ResourceError, ShapeError
from .norms import NormInterval, add_down, add_up, norm_interval, spectral_enclosure
from .scalars import Backend


@dataclass(frozen=True)
class OpMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise ShapeError("OpMatrix must be square and non-empty")
        backends = {e.backend for r in rows for e in r}
        if len(backends) != 1:
            raise BackendMismatchError("mixed backends inside one matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[GradedElement]]) -> "OpMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def backend(self) -> Backend:
        return self.entries[0][0].backend

    def __getitem__(self, ij) -> GradedElement:
        i, j = ij
        return self.entries[i][j]

    def __add__(self, other):
        return mat_add(self, other)

    def __sub__(self, other):
        return mat_sub(self, other)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __mul__(self, c):
        return mat_scalar(c, self)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return mat_equals(self, other)

    __hash__ = None

    @property
    def H(self) -> "OpMatrix":
        return mat_adjoint(self)

    def nonzero_positions(self) -> list[tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.entries) for j, e in enumerate(r) if e.blocks]

    def max_level(self) -> int:
        return max(e.max_level() for r in self.entries for e in r)

    def to_strings(self) -> list[list[str]]:
        return [[alg.format_element(e) for e in r] for r in self.entries]

    def __repr__(self):
        return f"OpMatrix({self.to_strings()!r}, {self.backend.value})"


@dataclass(frozen=True)
class ScaleParams:
    """Diagonal ``S = diag(mu^{n-1}, ..., mu, 1)``."""

    mu: Fraction
    n: int

    def __post_init__(self):
        object.__setattr__(self, "mu", Fraction(self.mu))
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")


def _check_pair(A: OpMatrix, B: OpMatrix) -> None:
    if A.size != B.size:
        raise ShapeError(f"sizes {A.size} and {B.size} differ")
    if A.backend is not B.backend:
        raise BackendMismatchError("matrices carry different backends")


def identity(m: int, backend: Backend = Backend.EXACT) -> OpMatrix:
    one, zero = alg.unit(backend), alg.zero(backend)
    return OpMatrix.from_rows([[one if i == j else zero for j in range(m)] for i in range(m)])


def zeros(m: int, backend: Backend = Backend.EXACT) -> OpMatrix:
    z = alg.zero(backend)
    return OpMatrix.from_rows([[z] * m for _ in range(m)])


def mat_add(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    _check_pair(A, B)
    return OpMatrix.from_rows(
        [[alg.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A.entries, B.entries)]
    )


def mat_sub(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    _check_pair(A, B)
    return OpMatrix.from_rows(
        [[alg.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A.entries, B.entries)]
    )


def mat_scalar(c, A: OpMatrix) -> OpMatrix:
    return OpMatrix.from_rows([[alg.scalar_mul(c, a) for a in r] for r in A.entries])


def mat_mul(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    _check_pair(A, B)
    m = A.size
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            raw = []
            for k in range(m):
                a, b = A.entries[i][k], B.entries[k][j]
                if a.blocks and b.blocks:
                    raw.append(alg.mul(a, b))
            acc = alg.zero(A.backend)
            for term in raw:
                acc = alg.add(acc, term)
            row.append(acc)
        rows.append(row)
    return OpMatrix.from_rows(rows)


def mat_adjoint(A: OpMatrix) -> OpMatrix:
    m = A.size
    return OpMatrix.from_rows([[alg.adjoint(A.entries[j][i]) for j in range(m)] for i in range(m)])


def mat_commutator(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    return mat_sub(mat_mul(A, B), mat_mul(B, A))


def mat_equals(A: OpMatrix, B: OpMatrix) -> bool:
    _check_pair(A, B)
    return all(alg.equals(a, b) for ra, rb in zip(A.entries, B.entries) for a, b in zip(ra, rb))


def to_backend(A: OpMatrix, backend: Backend) -> OpMatrix:
    return OpMatrix.from_rows([[alg.to_backend(a, backend) for a in r] for r in A.entries])


def scale_conjugate(A: OpMatrix, s: ScaleParams, prefactor=1) -> OpMatrix:
    """``prefactor * S A S^{-1}``: entry ``(i, j)`` times ``prefactor * mu^(j - i)``."""
    if A.size != s.n:
        raise ShapeError(f"matrix size {A.size} differs from n = {s.n}")
    prefactor = Fraction(prefactor)
    m = A.size
    return OpMatrix.from_rows(
        [[alg.scalar_mul(prefactor * s.mu ** (j - i), A.entries[i][j]) for j in range(m)]
         for i in range(m)]
    )


def phi(x: GradedElement) -> OpMatrix:
    """``x -> [[u*xu, u*xv], [v*xu, v*xv]]``."""
    u, v = alg.gen_u(x.backend), alg.gen_v(x.backend)
    us, vs = alg.adjoint(u), alg.adjoint(v)
    return OpMatrix.from_rows([
        [alg.mul(alg.mul(us, x), u), alg.mul(alg.mul(us, x), v)],
        [alg.mul(alg.mul(vs, x), u), alg.mul(alg.mul(vs, x), v)],
    ])


def psi(M: OpMatrix) -> GradedElement:
    """``[[a, b], [c, d]] -> uau* + ubv* + vcu* + vdv*``."""
    if M.size != 2:
        raise ShapeError("psi needs a 2x2 matrix")
    (a, b), (c, d) = M.entries
    return alg.psi_assemble(a, b, c, d)


def _split(A: OpMatrix) -> list[list[OpMatrix]]:
    h = A.size // 2
    return [[OpMatrix.from_rows([r[cj * h:(cj + 1) * h] for r in A.entries[ci * h:(ci + 1) * h]])
             for cj in range(2)] for ci in range(2)]


def psi_descend(A: OpMatrix) -> GradedElement:
    """Iterated ``psi`` on row-major 2x2 partitions of a ``2^k`` matrix."""
    m = A.size
    if m & (m - 1):
        raise ShapeError(f"descent needs a power-of-two size, got {m}")
    if m == 1:
        return A.entries[0][0]
    (a, b), (c, d) = [[psi_descend(blk) for blk in row] for row in _split(A)]
    return alg.psi_assemble(a, b, c, d)


def phi_lift(x: GradedElement, k: int) -> OpMatrix:
    """Inverse of :func:`psi_descend` onto ``2^k x 2^k`` matrices."""
    if k == 0:
        return OpMatrix.from_rows([[x]])
    top = phi(x)
    parts = [[phi_lift(top[i, j], k - 1) for j in range(2)] for i in range(2)]
    h = 1 << (k - 1)
    rows = []
    for bi in range(2):
        for r in range(h):
            rows.append(list(parts[bi][0].entries[r]) + list(parts[bi][1].entries[r]))
    return OpMatrix.from_rows(rows)


def _is_diagonal(positions) -> bool:
    return all(i == j for i, j in positions)


def mat_norm_interval(A: OpMatrix, *, structure: bool = True, refine_max_level: int | None = None,
                      rep_refine: bool = False, index_cap: int = 2**8, rep_iters: int = 200,
                      entry_intervals: dict | None = None) -> NormInterval:
    """Certified enclosure of ``||A||`` in ``M_m(O_2)``.

    ``hi`` is the largest singular value of the matrix of entry upper bounds;
    ``lo`` is the largest entry lower bound (coordinate compressions are
    contractive). Diagonal matrices are exact in terms of their entries. A
    single non-zero column or row is refined through ``||sum a_i^* a_i||^(1/2)``
    (or ``||sum a_i a_i^*||^(1/2)``) when its level is at most
    ``refine_max_level`` (default: the level cap) and the product fits.
    """
    positions = A.nonzero_positions()
    if not positions:
        return NormInterval.zero()
    if entry_intervals is None:
        entry_intervals = {}
    for pos in positions:
        if pos not in entry_intervals:
            entry_intervals[pos] = norm_interval(A[pos])
    ivs = [entry_intervals[p] for p in positions]
    lo = max(i.lo for i in ivs)
    if structure and _is_diagonal(positions) and len(positions) > 1:
        return NormInterval(lo, max(i.hi for i in ivs))
    if len(positions) == 1:
        result = ivs[0]
    else:
        his = np.zeros((A.size, A.size))
        for (i, j), iv in zip(positions, ivs):
            his[i, j] = iv.hi
        hi = spectral_enclosure(his).hi
        result = NormInterval(min(lo, hi), hi)
    if refine_max_level is None:
        refine_max_level = alg.get_level_cap()
    if structure and A.max_level() <= refine_max_level:
        result = result.intersect(_line_split_enclosure(A, positions, entry_intervals))
    if rep_refine:
        rep_lo = _direct_sum_lower(A, index_cap, rep_iters)
        result = NormInterval(max(result.lo, min(rep_lo, result.hi)), result.hi)
    return result


def _line_split_enclosure(A: OpMatrix, positions, entry_intervals) -> NormInterval:
    """Refine through the heaviest column or row ``L``: ``||A|| = ||L|| +- ||A - L||``.

    ``||L||`` is enclosed via ``||sum a^* a||^(1/2)`` (column) or
    ``||sum a a^*||^(1/2)`` (row); the remainder by its entry bounds.
    """
    weights: dict = {}
    for (i, j) in positions:
        h = entry_intervals[(i, j)].hi
        weights[("col", j)] = weights.get(("col", j), 0.0) + h
        weights[("row", i)] = weights.get(("row", i), 0.0) + h
    kind, idx = max(sorted(weights), key=lambda k: weights[k])
    axis = 1 if kind == "col" else 0
    line = [p for p in positions if p[axis] == idx]
    rest = [p for p in positions if p[axis] != idx]
    gram = alg.zero(A.backend)
    try:
        for pos in line:
            a = A[pos]
            term = alg.mul(alg.adjoint(a), a) if kind == "col" else alg.mul(a, alg.adjoint(a))
            gram = alg.add(gram, term)
    except ResourceError:
        return NormInterval(0.0, float("inf"))
    line_iv = norm_interval(gram).sqrt()
    if not rest:
        return line_iv
    his = np.zeros((A.size, A.size))
    for pos in rest:
        his[pos] = entry_intervals[pos].hi
    rest_hi = spectral_enclosure(his).hi
    return NormInterval(max(0.0, add_down(line_iv.lo, -rest_hi)), add_up(line_iv.hi, rest_hi))


def _pad_rows(M, height: int, width: int):
    if M is None:
        return sp.csr_array((height, width), dtype=complex)
    if M.shape[0] < height:
        M = M.copy()
        M.resize((height, width))
    return M


def _direct_sum_lower(A: OpMatrix, index_cap: int, iters: int) -> float:
    """Compression of ``A`` acting on ``m`` copies of the sequence space."""
    width = index_cap + 1
    mats = [[l2rep.sparse_matrix(e, index_cap) if e.blocks else None for e in r] for r in A.entries]
    grid = []
    for row in mats:
        height = max((M.shape[0] for M in row if M is not None), default=1)
        grid.append([_pad_rows(M, height, width) for M in row])
    big = sp.csr_array(sp.block_array(grid, format="csr"))
    return l2rep.certified_deflate(big, l2rep.power_lower(big, iters))
