"""Matrix kernels behind a degree block.

Exact blocks are dense ``numpy`` object arrays of ``int``/``Fraction``/
:class:`~cuntzcomm.scalars.GaussianRational`; double blocks are
``scipy.sparse`` CSR arrays of ``complex128``. Row index = word of length p,
column index = word of length q, last letter in the least significant bit
(``u`` = 0, ``v`` = 1). Raising a level is ``M -> kron(M, I_2)``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .scalars import Backend, to_complex

DENSE_PRODUCT_MAX_WORK = 1 << 15


def backend_of(M) -> Backend:
    return Backend.DOUBLE if sp.issparse(M) else Backend.EXACT


def zeros(rows: int, cols: int, backend: Backend):
    if backend is Backend.EXACT:
        out = np.empty((rows, cols), dtype=object)
        out.fill(0)
        return out
    return sp.csr_array((rows, cols), dtype=complex)


def from_entries(rows: int, cols: int, entries, backend: Backend):
    """Block from ``{(r, c): value}``."""
    if backend is Backend.EXACT:
        out = zeros(rows, cols, backend)
        for (r, c), val in entries.items():
            out[r, c] = val
        return out
    if not entries:
        return zeros(rows, cols, backend)
    keys = list(entries)
    data = np.array([complex(entries[k]) for k in keys], dtype=complex)
    r = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    c = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    return _clean(sp.csr_array((data, (r, c)), shape=(rows, cols)))


def _clean(M):
    M = sp.csr_array(M)
    M.eliminate_zeros()
    M.sort_indices()
    return M


def kron_eye(M, r: int):
    """``M ⊗ I_{2^r}``: every word gets all suffixes of length ``r``."""
    if r == 0:
        return M
    k = 1 << r
    if sp.issparse(M):
        return _clean(sp.kron(M, sp.eye_array(k, dtype=complex), format="csr"))
    m, n = M.shape
    out = np.empty((m, k, n, k), dtype=object)
    out.fill(0)
    idx = np.arange(k)
    out[:, idx, :, idx] = M[None, :, :]
    return out.reshape(m * k, n * k)


def matmul_raised(A, ra: int, B, rb: int):
    """``kron(A, I_{2^ra}) @ kron(B, I_{2^rb})`` without forming the krons.

    At most one of ``ra``/``rb`` is non-zero when called from element
    multiplication.
    """
    if sp.issparse(A):
        return _clean(kron_eye(A, ra) @ kron_eye(B, rb))
    work = A.shape[0] * A.shape[1] * B.shape[1] << (2 * ra + rb)
    if work > DENSE_PRODUCT_MAX_WORK:
        return _sparse_object_product(A, ra, B, rb)
    if ra == 0 and rb == 0:
        return A.dot(B)
    if ra and rb:
        return kron_eye(A, ra).dot(kron_eye(B, rb))
    if ra:
        k = 1 << ra
        m, c = A.shape
        n = B.shape[1]
        out = np.tensordot(A, B.reshape(c, k, n), axes=(1, 0))
        return out.reshape(m * k, n)
    k = 1 << rb
    m = A.shape[0]
    c, n = B.shape
    out = np.tensordot(A.reshape(m, c, k), B, axes=(1, 0))
    return out.transpose(0, 2, 1).reshape(m, n * k)


def _rows_of(M) -> dict:
    rows: dict = {}
    for r, c, v in nonzeros(M):
        rows.setdefault(r, []).append((c, v))
    return rows


def _sparse_object_product(A, ra: int, B, rb: int):
    """Exact product driven by the non-zeros, for large sparse object blocks."""
    Ra, Rb = 1 << ra, 1 << rb
    b_rows = _rows_of(B)
    acc: dict = {}
    for i, j, a in nonzeros(A):
        for s in range(Ra):
            t = j * Ra + s
            row = b_rows.get(t // Rb)
            if not row:
                continue
            r_out, sb = i * Ra + s, t % Rb
            for col, b in row:
                key = (r_out, col * Rb + sb)
                acc[key] = acc.get(key, 0) + a * b
    out = zeros(A.shape[0] * Ra, B.shape[1] * Rb, Backend.EXACT)
    for (r, c), v in acc.items():
        out[r, c] = v
    return out


def add(A, B):
    if sp.issparse(A):
        return _clean(A + B)
    return A + B


def scale(c, M):
    if sp.issparse(M):
        return _clean(M * c)
    return M * c


def adjoint(M):
    if sp.issparse(M):
        return _clean(M.conj().T)
    return np.vectorize(_conj, otypes=[object])(M.T) if M.size else M.T.copy()


def _conj(z):
    return z.conjugate()


def is_zero(M) -> bool:
    if sp.issparse(M):
        return M.count_nonzero() == 0
    return all(z == 0 for z in M.flat)


def equal(A, B) -> bool:
    if A.shape != B.shape:
        return False
    if sp.issparse(A):
        return (A != B).nnz == 0
    return all(x == y for x, y in zip(A.flat, B.flat))


def reduce_once(M):
    """Return ``M'`` with ``M = kron(M', I_2)``, or ``None``."""
    rows, cols = M.shape
    if rows < 2 or cols < 2:
        return None
    top = M[0::2, 0::2]
    if sp.issparse(M):
        if M[0::2, 1::2].count_nonzero() or M[1::2, 0::2].count_nonzero():
            return None
        if (top != M[1::2, 1::2]).nnz:
            return None
        return _clean(top)
    if not (is_zero(M[0::2, 1::2]) and is_zero(M[1::2, 0::2])):
        return None
    if not equal(top, M[1::2, 1::2]):
        return None
    return top.copy()


def assemble(a, b, c, d):
    """2x2 block matrix ``[[a, b], [c, d]]``."""
    if sp.issparse(a):
        return _clean(sp.block_array([[a, b], [c, d]], format="csr"))
    return np.block([[a, b], [c, d]])


def nonzeros(M):
    """Iterate ``(row, col, value)`` over non-zero entries."""
    if sp.issparse(M):
        coo = M.tocoo()
        for r, c, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            if v != 0:
                yield r, c, v
        return
    rows, cols = np.nonzero(np.asarray(M != 0, dtype=bool))
    for r, c in zip(rows.tolist(), cols.tolist()):
        yield r, c, M[r, c]


def first_nonzero(M):
    for r, c, v in nonzeros(M):
        return r, c, v
    return None


def column(M, j: int):
    """Non-zero entries of column ``j`` as ``[(row, value)]``."""
    if sp.issparse(M):
        col = M[:, [j]].tocoo()
        return [(r, v) for r, v in zip(col.row.tolist(), col.data.tolist()) if v != 0]
    return [(r, v) for r, v in enumerate(M[:, j]) if v != 0]


def to_complex_array(M):
    """Float view: CSR ``complex128`` for double blocks, dense for exact."""
    if sp.issparse(M):
        return M
    if M.size == 0:
        return np.zeros(M.shape, dtype=complex)
    return np.vectorize(to_complex, otypes=[complex])(M)


def nnz(M) -> int:
    if sp.issparse(M):
        return int(M.count_nonzero())
    return sum(1 for z in M.flat if z != 0)


def storage(M) -> int:
    """Coefficient slots held in memory."""
    return int(M.nnz) if sp.issparse(M) else int(M.size)


def convert(M, backend: Backend):
    """Copy ``M`` into ``backend`` (exact -> double is lossy)."""
    if backend_of(M) is backend:
        return M
    if backend is Backend.DOUBLE:
        return _clean(sp.csr_array(to_complex_array(M)))
    raise TypeError("double blocks cannot be converted to the exact backend")
