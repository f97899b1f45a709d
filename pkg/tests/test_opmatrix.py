import math
from fractions import Fraction

import pytest
from hypothesis import given

from cuntzcomm import algebra as alg
from cuntzcomm import opmatrix as om
from cuntzcomm.errors import BackendMismatchError, ShapeError
from cuntzcomm.norms import norm_interval
from cuntzcomm.randgen import random_matrix
from cuntzcomm.scalars import Backend

from strategies import elements


def test_phi_of_generators():
    one, zero = alg.unit(), alg.zero()
    assert om.phi(alg.unit()) == om.identity(2)
    # u*uu = u, u*uv = v, v*u = 0
    assert om.phi(alg.gen_u()) == om.OpMatrix.from_rows(
        [[alg.gen_u(), alg.gen_v()], [zero, zero]])
    assert om.phi(alg.parse_element("uV")) == om.OpMatrix.from_rows([[zero, one], [zero, zero]])


@given(elements())
def test_psi_inverts_phi(x):
    assert alg.equals(om.psi(om.phi(x)), x)


@given(elements(max_terms=2), elements(max_terms=2), elements(max_terms=2), elements(max_terms=2))
def test_phi_inverts_psi(a, b, c, d):
    M = om.OpMatrix.from_rows([[a, b], [c, d]])
    assert om.phi(om.psi(M)) == M


@given(elements(max_terms=3), elements(max_terms=3))
def test_phi_is_a_star_homomorphism(x, y):
    assert om.phi(alg.mul(x, y)) == om.phi(x) @ om.phi(y)
    assert om.phi(alg.adjoint(x)) == om.phi(x).H


def test_descent_and_lift_roundtrip():
    A = random_matrix(3, 4, max_len=2, max_terms=2)
    x = om.psi_descend(A)
    assert om.phi_lift(x, 2) == A
    assert om.psi_descend(om.phi_lift(x, 2)) == x


def test_descent_is_multiplicative():
    A = random_matrix(4, 4, max_len=2, max_terms=2)
    B = random_matrix(5, 4, max_len=2, max_terms=2)
    assert alg.equals(om.psi_descend(A @ B), alg.mul(om.psi_descend(A), om.psi_descend(B)))


def test_descent_needs_power_of_two():
    with pytest.raises(ShapeError):
        om.psi_descend(om.identity(3))


def test_matrix_algebra_basics():
    A = random_matrix(6, 3, max_len=2)
    B = random_matrix(7, 3, max_len=2)
    I = om.identity(3)
    assert A @ I == A and I @ A == A
    assert om.mat_commutator(A, B) == (A @ B) - (B @ A)
    assert (A + B) - B == A
    assert (A * 2) == A + A
    assert A.H.H == A


def test_shape_and_backend_checks():
    with pytest.raises(ShapeError):
        om.OpMatrix.from_rows([[alg.unit(), alg.unit()]])
    with pytest.raises(ShapeError):
        om.identity(2) @ om.identity(3)
    with pytest.raises(BackendMismatchError):
        om.identity(2) + om.identity(2, Backend.DOUBLE)


def test_scale_conjugate():
    A = random_matrix(8, 3, max_len=1)
    s = om.ScaleParams(Fraction(1, 2), 3)
    B = om.scale_conjugate(A, s, prefactor=3)
    assert alg.equals(B[0, 2], alg.scalar_mul(Fraction(3, 4), A[0, 2]))
    assert alg.equals(B[2, 0], alg.scalar_mul(12, A[2, 0]))
    with pytest.raises(ValueError):
        om.ScaleParams(0, 2)


def test_norm_of_identity_and_diagonal():
    iv = om.mat_norm_interval(om.identity(4))
    assert iv.lo == iv.hi == 1.0
    D = om.OpMatrix.from_rows([[alg.scalar_mul(3, alg.unit()), alg.zero()],
                               [alg.zero(), alg.gen_u()]])
    iv = om.mat_norm_interval(D)
    assert iv.lo == iv.hi == 3.0


def test_norm_of_column():
    # column (u, v)^T has norm ||u*u + v*v||^(1/2) = sqrt 2
    zero = alg.zero()
    A = om.OpMatrix.from_rows([[alg.gen_u(), zero], [alg.gen_v(), zero]])
    assert om.mat_norm_interval(A).contains(math.sqrt(2))
    # row (u, v) satisfies R R^* = uu* + vv* = 1
    R = om.OpMatrix.from_rows([[alg.gen_u(), alg.gen_v()], [zero, zero]])
    iv = om.mat_norm_interval(R)
    assert iv.lo <= 1.0 <= iv.hi and iv.hi < 1.0 + 1e-9


@given(elements(max_terms=3))
def test_phi_is_isometric_on_intervals(x):
    assert norm_interval(x).overlaps(om.mat_norm_interval(om.phi(x)))


def test_line_split_keeps_enclosure_sound():
    # a dominant column plus tiny entries elsewhere
    zero = alg.zero()
    eps = alg.scalar_mul(Fraction(1, 10**6), alg.unit())
    A = om.OpMatrix.from_rows([[zero, alg.gen_u()], [eps, alg.gen_v()]])
    iv = om.mat_norm_interval(A)
    assert iv.lo <= math.sqrt(2) + 1e-6
    assert iv.hi >= math.sqrt(2)
    assert iv.width < 1e-5


def test_rep_refinement_is_a_lower_bound():
    A = random_matrix(9, 2, max_len=2)
    iv = om.mat_norm_interval(A, rep_refine=True, index_cap=2**6)
    plain = om.mat_norm_interval(A)
    assert plain.lo <= iv.lo <= plain.hi
