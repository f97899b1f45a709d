from fractions import Fraction

import pytest

from cuntzcomm import algebra as alg
from cuntzcomm import construction as c
from cuntzcomm import opmatrix as om
from cuntzcomm import solver as s
from cuntzcomm.errors import ShapeError
from cuntzcomm.norms import norm_interval
from cuntzcomm.randgen import random_tuple
from cuntzcomm.scalars import Backend

HALF = Fraction(1, 2)
DELTA2 = Fraction(1, 64000)


def _anchor():
    u, v = alg.gen_u(), alg.gen_v()
    return s.domain_tuple([alg.scalar_mul(-2, alg.adjoint(u)), alg.scalar_mul(-2, alg.adjoint(v))])


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("delta", [Fraction(1), Fraction(1, 7), Fraction(3, 2)])
def test_commutator_is_last_column(n, delta):
    for seed in range(3):
        b = random_tuple(seed, n, max_len=2, max_terms=2)
        assert c.lemma_defect_check(n, delta, b)


def test_zero_b_defect():
    n = 3
    b = s.zeros_domain(n)
    defect = c.raw_defect(c.build_D(n, 1, b), c.build_X(n, 1, b))
    assert defect.nonzero_positions() == [(n - 1, n - 1)]
    assert alg.equals(defect[n - 1, n - 1], alg.scalar_mul(-n, alg.unit()))


def test_rows_below_corner_are_solver_residuals():
    n, delta = 4, Fraction(1, 5)
    b = random_tuple(11, n, max_len=1, max_terms=2)
    expected = c.expected_defect(n, delta, b)
    res, _ = s.residual(b, n, delta)
    for i in range(2, n + 1):
        assert alg.equals(expected[i - 1, n - 1], res.get(i))
    assert alg.equals(expected[0, n - 1], c.corner_element(n, delta, b))


def test_D_and_X_entries():
    b = random_tuple(2, 3, max_len=1)
    D = c.build_D(3, Fraction(1, 4), b)
    X = c.build_X(3, Fraction(1, 4), b)
    assert alg.equals(D[0, 0], alg.scalar_mul(4, alg.gen_v()))
    assert alg.equals(D[1, 0], alg.scalar_mul(4, alg.gen_u()))
    assert alg.equals(D[0, 1], alg.unit())
    assert alg.equals(D[1, 2], alg.add(alg.scalar_mul(2, alg.unit()), alg.mul(b.get(2), alg.gen_u())))
    assert alg.equals(X[2, 1], alg.unit())
    assert alg.equals(X[0, 2], alg.scalar_mul(Fraction(1, 4), b.get(1)))


def test_input_validation():
    with pytest.raises(ShapeError):
        c.build_D(3, 1, s.zeros_domain(2))
    with pytest.raises(ValueError):
        c.build_X(2, 0, s.zeros_domain(2))


def test_anchor_defect_is_exact_corner():
    inst = c.build_scaled(2, DELTA2, HALF, _anchor())
    zero = alg.zero()
    corner = alg.scalar_mul(HALF, alg.parse_element(f"-2*vU + {2 * DELTA2}*V"))
    assert inst.defect() == om.OpMatrix.from_rows([[zero, corner], [zero, zero]])


def test_anchor_defect_norm_and_descent():
    inst = c.build_scaled(2, DELTA2, HALF, _anchor())
    rep = c.defect_norm(inst)
    assert 1.0 <= rep.eps.lo and rep.eps.hi <= 1 + 2 * float(DELTA2)
    assert rep.dominant == "corner" and rep.dominance_certified
    assert rep.residual_contribution.hi == 0.0
    d = c.descend(inst, rep)
    assert d.exact
    assert d.eps.overlaps(rep.eps)


def test_scaling_shrinks_corner():
    b = random_tuple(5, 3, max_len=1, max_terms=2)
    delta = Fraction(1, 3)
    plain = c.build_scaled(3, delta, 1, b).defect()
    scaled = c.build_scaled(3, delta, HALF, b).defect()
    assert alg.equals(scaled[0, 2], alg.scalar_mul(Fraction(1, 4), plain[0, 2]))
    assert alg.equals(scaled[2, 2], plain[2, 2])


def test_descent_needs_power_of_two():
    inst = c.build_scaled(3, Fraction(1, 3), HALF, s.zeros_domain(3))
    with pytest.raises(ShapeError):
        c.descend(inst)


def test_certify_n2_report():
    rep = c.certify_instance(2)
    d = rep.as_dict()
    assert d["params"]["delta"] == "1/64000"
    assert d["solver"]["converged"]
    assert d["descent"]["commutator_matches_descended_defect"]
    assert all(d["ledger"][k] for k in ("delta_matches_ledger", "norm_D_within_Dbar",
                                         "norm_X_within_Xbar", "eps_within_epsbar"))


def test_certify_n3_double_runs():
    rep = c.certify_instance(3, K=4, backend=Backend.DOUBLE, max_iters=2)
    d = rep.as_dict()
    assert d["descent"] is None
    assert d["defect"]["eps"]["hi"] >= d["defect"]["eps"]["lo"] > 0


def test_mu_one_is_unscaled():
    b = random_tuple(6, 3, max_len=1)
    inst = c.build_scaled(3, Fraction(1, 2), 1, b)
    assert inst.D_mu == inst.D and inst.X_mu == inst.X


def test_commuting_pair_has_unit_defect():
    inst = c.ConstructionInstance(2, Fraction(1), Fraction(1), s.zeros_domain(2), om.identity(2),
                                  om.identity(2), om.identity(2), om.identity(2))
    rep = c.defect_norm(inst)
    assert rep.eps.lo == rep.eps.hi == 1.0


def test_X_mu_norm_bound_and_corner_consistency():
    n, delta = 3, Fraction(1, 10)
    b = random_tuple(12, n, max_len=1, max_terms=2)
    inst = c.build_scaled(n, delta, HALF, b)
    rep = c.defect_norm(inst)
    bound = 1 + float(delta) * sum(0.5 ** (n - i + 1) * norm_interval(b.get(i)).hi
                                   for i in range(1, n + 1))
    assert rep.norm_X.lo <= bound * (1 + 1e-12)
    mu_pow = 0.5 ** (n - 1)
    assert rep.eps.lo <= mu_pow * rep.corner_norm.hi + rep.residual_contribution.hi + 1e-12
