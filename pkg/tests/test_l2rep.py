import numpy as np
import pytest
from hypothesis import given

from cuntzcomm import algebra as alg
from cuntzcomm import l2rep
from cuntzcomm.errors import IndexCapError

from strategies import elements


def test_generators_on_basis():
    u, v = alg.gen_u(), alg.gen_v()
    for k in range(20):
        assert l2rep.apply_basis(u, k) == {2 * k: 1}
        assert l2rep.apply_basis(v, k) == {2 * k + 1: 1}
        assert l2rep.apply_basis(alg.adjoint(u), k) == ({k // 2: 1} if k % 2 == 0 else {})
        assert l2rep.apply_basis(alg.adjoint(v), k) == ({k // 2: 1} if k % 2 == 1 else {})


def test_word_action_uses_bit_reversal():
    x = alg.parse_element("uv")  # uv e_k = u e_{2k+1} = e_{4k+2}
    assert l2rep.apply_basis(x, 3) == {14: 1}


def test_oracle_detects_nonzero():
    assert l2rep.oracle_zero_check(alg.parse_element("uU + vV - 1"), 2**8)
    assert not l2rep.oracle_zero_check(alg.parse_element("uU - 1"), 2**8)


@given(elements(max_terms=3), elements(max_terms=3))
def test_oracle_equal_matches_normal_form(x, y):
    # a non-zero normal form acts non-trivially on some short basis vector
    assert l2rep.oracle_equal(x, y, 2**8) == alg.equals(x, y)


def test_sparse_matrix_matches_apply():
    x = alg.parse_element("2*uV - vU + (0,1)*uu + 1/3*V")
    cap = 40
    A = l2rep.sparse_matrix(x, cap).toarray()
    for k in range(cap + 1):
        col = l2rep.apply_basis(x, k)
        dense = np.zeros(A.shape[0], dtype=complex)
        for i, c in col.items():
            dense[i] = complex(c)
        assert np.allclose(A[:, k], dense)


def test_rep_norm_lower_for_isometry():
    assert l2rep.rep_norm_lower(alg.gen_u(), 64) == pytest.approx(1.0)
    assert l2rep.rep_norm_lower(alg.zero(), 64) == 0.0


@pytest.mark.parametrize("level", [1, 2, 3])
def test_degree0_block_is_recovered(level):
    from cuntzcomm.randgen import random_degree0_element
    x = random_degree0_element(level, level)
    M = x.block(0).matrix.astype(complex)
    sigma = np.linalg.norm(M, 2)
    assert abs(l2rep.rep_norm_lower(x, 2 ** (level + 1) - 1, iters=500) - sigma) <= 1e-6


def test_certified_lower_is_below_raw():
    x = alg.parse_element("u + 1 + U")
    raw = l2rep.rep_norm_lower(x, 2**8)
    cert = l2rep.rep_norm_lower_certified(x, 2**8)
    assert cert <= raw


def test_index_cap_error():
    x = alg.from_word("u" * 10, "")
    with pytest.raises(IndexCapError):
        l2rep.apply_basis(x, 2**60, max_index=2**62)
