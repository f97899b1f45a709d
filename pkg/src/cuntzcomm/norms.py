"""Certified operator-norm enclosures.

An element's norm is bracketed by its gauge components: every degree
component is a contractive image of the element (lower bound) and the
element is their sum (upper bound). Each component's norm is the largest
singular value of its block, because balanced words multiply like matrix
units. Floating-point work is pushed outward with ``math.nextafter`` and
explicit ``gamma_k = k u / (1 - k u)`` error terms, never with rounding modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import blocks, l2rep
from .algebra import GradedElement, adjoint, mul
from .errors import ResourceError
from .rational import fraction_to_float_down, fraction_to_float_up
from .scalars import GaussianRational

U = 2.0**-53
ETA = 2.0**-1074
DEFAULT_POWER_ITERS = 500
DEFAULT_RTOL = 1e-12
TIGHTEN_MAX_DIM = 256


def up(x: float) -> float:
    return math.nextafter(x, math.inf)


def down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _exact(r: float, q: Fraction) -> bool:
    return math.isfinite(r) and Fraction(r) == q


def add_up(a: float, b: float) -> float:
    r = a + b
    return r if _exact(r, Fraction(a) + Fraction(b)) else up(r)


def add_down(a: float, b: float) -> float:
    r = a + b
    return r if _exact(r, Fraction(a) + Fraction(b)) else down(r)


def mul_up(a: float, b: float) -> float:
    r = a * b
    return r if _exact(r, Fraction(a) * Fraction(b)) else up(r)


def mul_down(a: float, b: float) -> float:
    r = a * b
    return r if _exact(r, Fraction(a) * Fraction(b)) else down(r)


def gamma(k: int) -> float:
    return up(k * U / (1 - k * U))


@dataclass(frozen=True)
class NormInterval:
    """Enclosure ``lo <= ||.|| <= hi`` of an operator norm."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ValueError(f"invalid norm interval [{self.lo}, {self.hi}]")

    @classmethod
    def zero(cls) -> "NormInterval":
        return cls(0.0, 0.0)

    @classmethod
    def point(cls, value: float) -> "NormInterval":
        return cls(value, value)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "NormInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other: "NormInterval") -> "NormInterval":
        return NormInterval(max(0.0, add_down(self.lo, other.lo)), add_up(self.hi, other.hi))

    def __mul__(self, other) -> "NormInterval":
        if isinstance(other, NormInterval):
            return NormInterval(max(0.0, mul_down(self.lo, other.lo)), mul_up(self.hi, other.hi))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "NormInterval":
        """``|c| * interval`` for a rational or float factor, rounded outward."""
        c = abs(Fraction(c)) if isinstance(c, (int, Fraction)) else abs(c)
        if c == 0:
            return NormInterval.zero()
        if isinstance(c, Fraction):
            c_lo, c_hi = fraction_to_float_down(c), fraction_to_float_up(c)
        else:
            c_lo = c_hi = float(c)
        return NormInterval(max(0.0, mul_down(self.lo, c_lo)), mul_up(self.hi, c_hi))

    def sqrt(self) -> "NormInterval":
        return NormInterval(max(0.0, down(math.sqrt(self.lo))), up(math.sqrt(self.hi)))

    def hull(self, other: "NormInterval") -> "NormInterval":
        return NormInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "NormInterval") -> "NormInterval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError(f"disjoint enclosures {self} and {other}")
        return NormInterval(lo, hi)

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}

    def __repr__(self):
        return f"NormInterval[{self.lo!r}, {self.hi!r}]"


def sup_interval(intervals) -> NormInterval:
    """Enclosure of the maximum of several enclosed quantities."""
    intervals = list(intervals)
    if not intervals:
        return NormInterval.zero()
    return NormInterval(max(i.lo for i in intervals), max(i.hi for i in intervals))


def _as_float_matrix(M):
    """``(float matrix, conversion_needed)``; exact blocks are rounded to nearest."""
    if sp.issparse(M):
        return sp.csr_array(M, dtype=complex), False
    M = np.asarray(M)
    if M.dtype == object:
        return blocks.to_complex_array(M), True
    return M.astype(complex), False


def _realify(M: np.ndarray) -> np.ndarray:
    """Real matrix with the same singular values (each doubled) as complex ``M``."""
    if not np.any(M.imag):
        return M.real.copy()
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def _power_rayleigh(A, iters: int, rtol: float, start: np.ndarray) -> float:
    x = start.astype(complex)
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0
    x = x / nx
    best, prev = 0.0, None
    AH = A.conj().T
    for _ in range(iters):
        y = A @ x
        r = float(np.linalg.norm(y))
        best = max(best, r)
        if prev is not None and abs(r - prev) <= rtol * max(r, 1e-300):
            break
        prev = r
        x = AH @ y
        nx = np.linalg.norm(x)
        if nx == 0:
            break
        x = x / nx
    return best


def _gram_upper_verified(R: np.ndarray, sigma_est: float, fro_hi: float) -> float | None:
    """Smallest trial ``t`` with ``R^T R <= t^2 I`` proven by floating Cholesky.

    A successful floating Cholesky of a symmetric ``H`` bounds its smallest
    eigenvalue below by ``-gamma_{n+1}/(1-gamma_{n+1}) tr(H)`` (plus an
    underflow term), whatever the summation order. The Gram matrix and the
    shifted diagonal carry their own rounding terms.
    """
    m, n = R.shape
    if n > m:
        R = R.T
        m, n = n, m
    G = R.T @ R
    e1 = up(gamma(m + 2) * up(fro_hi * fro_hi))
    g1 = gamma(n + 1)
    for f in (1e-14 * n, 1e-12 * n, 1e-10, 1e-8, 1e-6, 1e-4):
        t = up(sigma_est * (1 + f) + 1e-300)
        t2 = down(t * t)
        H = -G
        H[np.diag_indices(n)] = t2 - np.diag(G)
        diag = np.diag(H)
        if np.any(diag < 0):
            continue
        tr = up(float(np.sum(diag)) * (1 + gamma(n + 2)))
        base = up(g1 / (1 - g1) * tr + 8 * n * ETA * (2 * (n + 2) + float(diag.max())))
        e2 = up(2 * U * float(diag.max()))
        s = up(2 * (base + e1 + e2))
        e3 = up(2 * U * (float(diag.max()) + s))
        if s < base + e1 + e2 + e3:
            s = up(2 * (base + e1 + e2 + e3))
        shifted = H.copy()
        shifted[np.diag_indices(n)] = diag - s
        try:
            np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            continue
        return t
    return None


def _abs_interval(c) -> tuple[float, float]:
    """Outward float bracket of ``|c|`` for an exact or floating scalar."""
    if isinstance(c, (int, Fraction)):
        a = abs(Fraction(c))
        return fraction_to_float_down(a), fraction_to_float_up(a)
    if isinstance(c, GaussianRational):
        r2 = c.re * c.re + c.im * c.im
        return (max(0.0, down(math.sqrt(fraction_to_float_down(r2)))),
                up(math.sqrt(fraction_to_float_up(r2))))
    c = complex(c)
    if c.imag == 0:
        return abs(c.real), abs(c.real)
    a = abs(c)
    return max(0.0, down(a)), up(a)


def _monomial_enclosure(M) -> NormInterval | None:
    """Exact-pattern shortcut: with at most one non-zero per row and per column,
    the largest singular value is the largest entry modulus."""
    entries = list(blocks.nonzeros(M))
    if not entries:
        return NormInterval.zero()
    rows = [r for r, _, _ in entries]
    cols = [c for _, c, _ in entries]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        return None
    bounds = [_abs_interval(v) for _, _, v in entries]
    return NormInterval(max(b[0] for b in bounds), max(b[1] for b in bounds))


def spectral_enclosure(M, *, iters: int = DEFAULT_POWER_ITERS, rtol: float = DEFAULT_RTOL,
                       tighten: bool = True, tighten_max_dim: int = TIGHTEN_MAX_DIM) -> NormInterval:
    """Certified bracket for the largest singular value of a scalar matrix.

    ``lo`` is the best Rayleigh quotient of power iteration on ``M^H M``
    (all-ones start), together with column/row norms and, for small matrices,
    the LAPACK top singular vector used as one more witness. ``hi`` is
    ``min(Frobenius, sqrt(||M||_1 ||M||_inf))``, tightened by a Cholesky
    certificate when the smaller side is at most ``tighten_max_dim``.
    """
    shape = M.shape
    if shape[0] == 0 or shape[1] == 0:
        return NormInterval.zero()
    nnz = M.nnz if sp.issparse(M) else None
    if nnz is None or nnz <= max(shape):
        mono = _monomial_enclosure(M)
        if mono is not None:
            return mono
    A, converted = _as_float_matrix(M)
    if A.shape[0] == 0 or A.shape[1] == 0:
        return NormInterval.zero()
    if sp.issparse(A):
        absA = abs(A)
        nnz = A.nnz
        if nnz == 0:
            return NormInterval.zero()
        sq_sum = float((absA.data**2).sum())
        col_abs = np.asarray(absA.sum(axis=0)).ravel()
        row_abs = np.asarray(absA.sum(axis=1)).ravel()
        col_sq = np.asarray(absA.multiply(absA).sum(axis=0)).ravel()
        row_sq = np.asarray(absA.multiply(absA).sum(axis=1)).ravel()
    else:
        absA = np.abs(A)
        if not np.any(absA):
            return NormInterval.zero()
        sq_sum = float((absA**2).sum())
        col_abs, row_abs = absA.sum(axis=0), absA.sum(axis=1)
        col_sq, row_sq = (absA**2).sum(axis=0), (absA**2).sum(axis=1)
    rows, cols = A.shape
    N = max(rows, cols)
    g = gamma(N + 8)
    fro_hi = up(math.sqrt(up(sq_sum * (1 + g))) * (1 + 2 * U))
    schur_hi = up(math.sqrt(up(float(col_abs.max()) * float(row_abs.max()) * (1 + g) ** 2)) * (1 + 2 * U))
    hi = min(fro_hi, schur_hi)
    slack = up(2 * U * fro_hi) if converted else 0.0

    def deflate(r: float) -> float:
        return max(0.0, down(r * (1 - g) - g * fro_hi))

    lo = deflate(math.sqrt(max(float(col_sq.max()), float(row_sq.max()))))
    lo = max(lo, deflate(_power_rayleigh(A, iters, rtol, np.ones(cols))))
    if lo < 0.5 * hi:
        start = np.random.default_rng(0).standard_normal(cols)
        lo = max(lo, deflate(_power_rayleigh(A, iters, rtol, start)))

    if tighten and min(rows, cols) <= tighten_max_dim and hi > lo:
        dense = A.toarray() if sp.issparse(A) else A
        R = _realify(dense)
        try:
            _, s, vh = np.linalg.svd(dense, full_matrices=False)
            top = vh[0].conj()
            lo = max(lo, deflate(float(np.linalg.norm(dense @ top) / np.linalg.norm(top))))
            sigma_est = max(float(s[0]), lo)
        except np.linalg.LinAlgError:
            sigma_est = lo
        if sigma_est > 0:
            t = _gram_upper_verified(R, sigma_est, fro_hi)
            if t is not None:
                hi = min(hi, t)
    lo = max(0.0, down(lo - slack))
    hi = up(hi + slack)
    lo = min(lo, hi)
    return NormInterval(lo, hi)


def degree_norm(x: GradedElement, d: int, **kw) -> NormInterval:
    """Enclosure of the norm of the degree-``d`` component of ``x``."""
    b = x.block(d)
    if b is None:
        return NormInterval.zero()
    return spectral_enclosure(b.matrix, **kw)


def norm_interval(x: GradedElement, *, rep_refine: bool = False, index_cap: int = 2**10,
                  rep_iters: int = 200, gram: bool = False, **kw) -> NormInterval:
    """Certified enclosure of ``||x||`` in O_2.

    ``lo`` is the largest degree-component lower bound (optionally improved by
    a compression in the sequence-space representation); ``hi`` is the sum of
    the component upper bounds. With ``gram`` the result is intersected with
    ``||x^* x||^(1/2)``, which is often much tighter for mixed-degree elements;
    it is skipped when the product would pass the level cap.
    """
    parts = [degree_norm(x, d, **kw) for d in x.degrees()]
    if not parts:
        return NormInterval.zero()
    lo = max(p.lo for p in parts)
    hi = 0.0
    for p in parts:
        hi = add_up(hi, p.hi)
    if rep_refine:
        lo = max(lo, l2rep.rep_norm_lower_certified(x, index_cap, rep_iters))
    result = NormInterval(min(lo, hi), hi)
    if gram and len(parts) > 1:
        try:
            g = mul(adjoint(x), x)
        except ResourceError:
            return result
        result = result.intersect(norm_interval(g, **kw).sqrt())
    return result
