"""The binary-shift representation of O_2 on square-summable sequences.

``u e_k = e_{2k}`` and ``v e_k = e_{2k+1}``; the adjoints undo these maps and
kill the basis vectors of the other parity. O_2 is simple, so this
representation is faithful and isometric: it computes the same norm as any
other, and it checks identities independently of the block normal form.

Under this action ``s_mu e_k = e_{2^p k + rev(mu)}`` where ``rev`` reads the
word with its *first* letter as the lowest bit, i.e. the bit reversal of the
block index. Only compressions to finitely many basis vectors are ever
formed, so every number computed here is a lower bound for a norm.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from . import blocks
from .algebra import GradedElement
from .errors import IndexCapError
from .scalars import to_complex

DEFAULT_INDEX_CAP = 2**20
MAX_INDEX = 2**62

SparseVector = dict  # index -> scalar, no explicit zeros


def bit_reverse(idx: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (idx & 1)
        idx >>= 1
    return out


def _bit_reverse_array(idx: np.ndarray, bits: int) -> np.ndarray:
    idx = idx.astype(np.int64)
    out = np.zeros_like(idx)
    for _ in range(bits):
        out = (out << 1) | (idx & 1)
        idx = idx >> 1
    return out


def basis(k: int, value=1) -> SparseVector:
    return {k: value}


def _accumulate(out: dict, idx: int, val) -> None:
    s = out.get(idx, 0) + val
    if s == 0:
        out.pop(idx, None)
    else:
        out[idx] = s


def apply_basis(x: GradedElement, k: int, max_index: int = MAX_INDEX) -> SparseVector:
    """Image of the basis vector ``e_k`` under ``x``."""
    if k < 0:
        raise ValueError("basis index must be non-negative")
    out: dict = {}
    for b in x.blocks.values():
        p, q = b.level, b.col_level
        j = k >> q
        col = bit_reverse(k & ((1 << q) - 1), q)
        for row, val in blocks.column(b.matrix, col):
            idx = (j << p) | bit_reverse(row, p)
            if idx > max_index:
                raise IndexCapError(f"basis index {idx} exceeds {max_index}")
            _accumulate(out, idx, val)
    return out


def apply(x: GradedElement, w: SparseVector, max_index: int = MAX_INDEX) -> SparseVector:
    out: dict = {}
    for k, coef in sorted(w.items()):
        for idx, val in apply_basis(x, k, max_index).items():
            _accumulate(out, idx, coef * val)
    return out


def norm_squared(w: SparseVector):
    """``sum |w_k|^2``; exact for exact amplitudes."""
    total = sum((val * val.conjugate() for val in w.values()), 0)
    return total.real if isinstance(total, complex) else total


def oracle_zero_check(x: GradedElement, k_max: int) -> bool:
    """``x e_k = 0`` for every ``k <= k_max``; ``False`` proves ``x != 0``."""
    return all(not apply_basis(x, k) for k in range(k_max + 1))


def oracle_equal(x: GradedElement, y: GradedElement, k_max: int) -> bool:
    """Agreement of ``x`` and ``y`` on ``e_0 .. e_{k_max}``; works on unnormalized inputs."""
    return all(apply_basis(x, k) == apply_basis(y, k) for k in range(k_max + 1))


def sparse_matrix(x: GradedElement, index_cap: int) -> sp.csr_array:
    """Columns ``0..index_cap`` of the operator as a complex CSR matrix."""
    if index_cap < 0:
        raise ValueError("index_cap must be non-negative")
    rows_all, cols_all, data_all = [], [], []
    for b in x.blocks.values():
        p, q = b.level, b.col_level
        entries = list(blocks.nonzeros(b.matrix))
        if not entries:
            continue
        mu = np.array([e[0] for e in entries], dtype=np.int64)
        nu = np.array([e[1] for e in entries], dtype=np.int64)
        vals = np.array([to_complex(e[2]) for e in entries], dtype=complex)
        low = _bit_reverse_array(nu, q)
        high = _bit_reverse_array(mu, p)
        js = np.arange((index_cap >> q) + 1, dtype=np.int64)
        ks = low[:, None] + (js[None, :] << q)
        rows = high[:, None] | (js[None, :] << p)
        keep = ks <= index_cap
        rows_all.append(rows[keep])
        cols_all.append(ks[keep])
        data_all.append(np.broadcast_to(vals[:, None], ks.shape)[keep])
    if not rows_all:
        return sp.csr_array((1, index_cap + 1), dtype=complex)
    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    data = np.concatenate(data_all)
    shape = (int(rows.max()) + 1, index_cap + 1)
    A = sp.csr_array((data, (rows, cols)), shape=shape)
    A.sum_duplicates()
    A.eliminate_zeros()
    return A


def power_lower(A, iters: int, seed: int = 0) -> float:
    """Best ``||A w|| / ||w||`` over basis vectors and power iteration on ``A^H A``.

    The power iteration starts from a seeded random vector.
    """
    if A.nnz == 0 if sp.issparse(A) else not np.any(A):
        return 0.0
    absA = abs(A)
    best = float(np.sqrt(np.asarray(absA.multiply(absA).sum(axis=0)).max()))
    rng = np.random.default_rng(seed)
    n = A.shape[1]
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w /= np.linalg.norm(w)
    for _ in range(max(iters, 1)):
        z = A @ w
        r = float(np.linalg.norm(z))
        best = max(best, r)
        w = A.conj().T @ z
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        w /= nw
    return best


def rep_norm_lower(x: GradedElement, index_cap: int = DEFAULT_INDEX_CAP, iters: int = 200,
                   seed: int = 0) -> float:
    """Lower bound for ``||x||`` from the compression to ``e_0 .. e_{index_cap}``.

    Always a lower bound only, up to floating-point slack of order 1e-12
    relative; :func:`rep_norm_lower_certified` removes that slack.
    """
    if index_cap < 1:
        raise ValueError("index_cap must be at least 1")
    if not x.blocks:
        return 0.0
    return power_lower(sparse_matrix(x, index_cap), iters, seed)


def certified_deflate(A, value: float) -> float:
    """Shift a computed ``||A w||/||w||`` down past every rounding error."""
    if value <= 0:
        return 0.0
    absA = abs(A)
    row_nnz = int(np.diff(A.indptr).max()) if sp.issparse(A) else A.shape[1]
    schur = math.sqrt(float(absA.sum(axis=0).max()) * float(absA.sum(axis=1).max()))
    u = 2.0**-53
    g = (row_nnz + 8) * u / (1 - (row_nnz + 8) * u)
    return max(0.0, math.nextafter(value * (1 - 8 * u) - 2 * g * schur * (1 + 1e-6), 0.0))


def rep_norm_lower_certified(x: GradedElement, index_cap: int, iters: int = 200,
                             seed: int = 0) -> float:
    if not x.blocks:
        return 0.0
    A = sparse_matrix(x, index_cap)
    return certified_deflate(A, power_lower(A, iters, seed))
