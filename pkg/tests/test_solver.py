import math
from fractions import Fraction

import pytest

from cuntzcomm import algebra as alg
from cuntzcomm import solver as s
from cuntzcomm.errors import ConditionViolatedError, LevelCapError, ResourceError, ShapeError
from cuntzcomm.randgen import random_tuple
from cuntzcomm.scalars import Backend


def _anchor():
    u, v = alg.gen_u(), alg.gen_v()
    return s.domain_tuple([alg.scalar_mul(-2, alg.adjoint(u)), alg.scalar_mul(-2, alg.adjoint(v))])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_right_inverse_identity(n):
    for seed in range(3):
        y = random_tuple(seed, n - 1, offset=2, max_len=2, max_terms=2)
        assert s.op_T(s.op_L(y)) == y - s.op_E(y)


def test_E_of_unit_at_n2():
    y = s.range_tuple([alg.unit()])
    assert s.op_E(y) == y.scale(Fraction(1, 2))


def test_E_at_n3():
    y = s.range_tuple([alg.unit(), alg.zero()])
    Ey = s.op_E(y)
    assert alg.equals(Ey.get(2), alg.scalar_mul(Fraction(1, 2), alg.unit()))
    assert alg.equals(Ey.get(3), alg.parse_element("1/2*uV"))


def test_truncated_neumann_sum_of_scalar():
    y = s.range_tuple([alg.scalar_mul(2, alg.unit())])
    total, tail = s.neumann_inverse_apply(y, 20)
    assert alg.equals(total.get(2), alg.scalar_mul(4 - Fraction(1, 2**19), alg.unit()))
    assert tail > 0


def test_closed_form_for_eigenvector():
    y = s.range_tuple([alg.unit()])
    total, tail = s.neumann_inverse_apply(y, 3, closed_form=True)
    assert alg.equals(total.get(2), alg.scalar_mul(2, alg.unit()))
    assert tail == 0.0


def test_R_of_a_at_n2_is_anchor():
    b, tail = s.op_R(s.make_a(2), 8, closed_form=True)
    assert b == _anchor()
    assert tail == 0.0


@pytest.mark.parametrize("delta", [Fraction(1), Fraction(1, 7), Fraction(1, 64000), Fraction(10**6)])
def test_anchor_has_zero_residual(delta):
    res, iv = s.residual(_anchor(), 2, delta)
    assert res.is_zero()
    assert iv.hi == 0.0


@pytest.mark.parametrize("n, K", [(2, 4), (3, 4), (2, 8), (3, 6)])
def test_truncation_error_within_tail(n, K):
    for seed in range(2):
        y = random_tuple(seed, n - 1, offset=2, max_len=1, max_terms=2, backend=Backend.DOUBLE)
        x, tail = s.op_R(y, K)
        err = (s.op_T(x) - y).sup_norm_interval()
        assert err.hi <= tail


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_E_contracts_weighted_norm(n):
    ratio = float(s.contraction_ratio(n))
    for seed in range(5):
        y = random_tuple(seed, n - 1, offset=2, max_len=2, max_terms=3)
        assert s.weighted_norm_interval(s.op_E(y)).lo <= ratio * s.weighted_norm_interval(y).hi


def test_weights():
    assert s.weight_squared(2, 2) == 1
    assert s.weight_squared(3, 4) == Fraction(16, 23)
    lo, hi = s.weight_interval(3, 4)
    assert lo <= math.sqrt(16 / 23) <= hi


def test_F_and_G_shapes():
    b = random_tuple(3, 4, max_len=1)
    F = s.op_F(b)
    assert F.offset == 2 and len(F) == 3
    assert alg.equals(F.get(2), alg.scalar_mul(-2, b.get(3)))
    assert alg.is_zero(F.get(4))
    G = s.op_G(b, b)
    k = alg.commutator(alg.gen_u(), b.get(4))
    assert alg.equals(G.get(3), alg.scalar_mul(-1, alg.mul(b.get(3), k)))
    assert s.norm_F_bound(2) == 0 and s.norm_F_bound(5) == 4


def test_tuple_shape_checks():
    with pytest.raises(ShapeError):
        s.op_T(s.range_tuple([alg.unit()]))
    with pytest.raises(ShapeError):
        s.op_E(s.domain_tuple([alg.unit(), alg.unit()]))
    with pytest.raises(ShapeError):
        s.zeros_domain(2) + s.zeros_domain(3)


def test_condition_value():
    assert s.condition_value(2, Fraction(1, 64000)).contains(Fraction(512, 1000))
    assert s.condition_value(2, Fraction(1, 32768)).contains(1)


def test_solve_n2_exact():
    b, rep = s.solve_b(s.SolverParams.default_delta(2))
    assert b == _anchor()
    assert rep.converged and rep.stop_reason == "tol"
    assert rep.sup_norm.hi == 0.0
    assert rep.iterations == 1


def test_solve_rejects_large_delta():
    with pytest.raises(ConditionViolatedError):
        s.solve_b(s.SolverParams(n=2, delta=Fraction(1, 30000)))


def test_solve_n3_double_decreases_residual():
    p = s.SolverParams.default_delta(3, K=6, max_iters=3, backend=Backend.DOUBLE)
    b, rep = s.solve_b(p)
    assert rep.iterations >= 1
    assert all(math.isfinite(h) for h in rep.history)
    assert rep.sup_norm.hi == min(rep.history)
    d = rep.as_dict()
    assert d["condition"]["holds"]


def test_storage_budget_stops_gracefully():
    p = s.SolverParams.default_delta(3, K=6, max_iters=5, backend=Backend.DOUBLE,
                                   storage_budget=2**12)
    b, rep = s.solve_b(p)
    assert rep.stop_reason == "storage_budget"
    assert rep.iterations == 1
    assert not rep.converged
    assert len(b) == 3


def test_storage_budget_on_neumann_sum():
    y = random_tuple(1, 2, offset=2, max_len=2, backend=Backend.DOUBLE)
    with pytest.raises(ResourceError):
        s.neumann_inverse_apply(y, 10, storage_budget=8)


def test_level_cap_on_neumann_sum():
    y = random_tuple(1, 2, offset=2, max_len=2)
    with alg.level_cap(4):
        with pytest.raises(LevelCapError):
            s.neumann_inverse_apply(y, 10)


def test_params_validation():
    with pytest.raises(ValueError):
        s.SolverParams(n=1, delta=Fraction(1))
    with pytest.raises(ValueError):
        s.SolverParams(n=2, delta=0)
    with pytest.raises(ValueError):
        s.SolverParams(n=2, delta=Fraction(1), r=3)
    assert s.SolverParams.default_delta(4).delta == Fraction(1, 2048000)


def test_T_examples():
    u, v = alg.gen_u(), alg.gen_v()
    scalars = s.domain_tuple([alg.scalar_mul(3, alg.unit()), alg.unit(), alg.zero()])
    assert s.op_T(scalars).is_zero()
    assert s.op_T(_anchor()) == s.range_tuple([alg.scalar_mul(2, alg.unit())])
    t = s.op_T(s.domain_tuple([alg.zero(), u]))
    assert alg.equals(t.get(2), alg.sub(alg.mul(v, u), alg.mul(u, v)))


def test_L_examples():
    assert s.op_L(s.range_tuple([alg.unit()])) == s.domain_tuple(
        [alg.parse_element("-1/2*U"), alg.parse_element("-1/2*V")])
    assert s.op_L(s.range_tuple([alg.zero(), alg.unit()])) == s.domain_tuple(
        [alg.zero(), alg.parse_element("-1/2*U"), alg.parse_element("-1/2*V")])


def test_weighted_norm_examples():
    assert s.weighted_norm_interval(s.range_tuple([alg.unit()])).lo == 1.0
    lo, hi = s.weight_interval(2, 3)
    assert lo <= 3 / math.sqrt(14) <= hi
    assert s.weighted_norm_interval(s.zeros_range(4)).hi == 0.0


def test_residual_of_zero_is_minus_a():
    res, iv = s.residual(s.zeros_domain(4), 4, Fraction(1, 9))
    assert res == s.make_a(4).scale(-1)
    assert iv.lo == iv.hi == 4.0


def test_norm_equivalence_and_boundedness():
    for seed in range(5):
        n = 2 + seed % 3
        y = random_tuple(seed, n - 1, offset=2, max_len=2, max_terms=3)
        sup, wt = y.sup_norm_interval(), s.weighted_norm_interval(y)
        assert sup.lo / math.sqrt(2) <= wt.hi * (1 + 1e-12)
        assert wt.lo <= sup.hi * (1 + 1e-12)
        b = random_tuple(seed + 10, n, max_len=2, max_terms=2)
        c = random_tuple(seed + 20, n, max_len=2, max_terms=2)
        bh, ch = b.sup_norm_interval().hi, c.sup_norm_interval().hi
        assert s.op_F(b).sup_norm_interval().lo <= (n - 1) * bh * (1 + 1e-12)
        assert s.op_G(b, c).sup_norm_interval().lo <= 2 * bh * ch * (1 + 1e-12)


def test_neumann_edge_cases():
    zero = s.zeros_range(3)
    assert s.neumann_inverse_apply(zero, 5) == (zero, 0.0)
    y = s.range_tuple([alg.unit(), alg.unit()])
    total, tail = s.neumann_inverse_apply(y, 0)
    assert total == y and tail > 0
    with pytest.raises(ValueError):
        s.neumann_inverse_apply(y, -1)


def test_solve_n3_deep_truncation():
    p = s.SolverParams(n=3, delta=Fraction(1, 486000), K=12, max_iters=3, backend=Backend.DOUBLE)
    _, rep = s.solve_b(p)
    assert rep.sup_norm.hi < 3
    assert math.isfinite(rep.tail)
