"""Exact identity suites, reusable from the command line and the tests."""
from __future__ import annotations

import random
from fractions import Fraction

from . import algebra as alg
from . import construction, l2rep
from . import opmatrix as om
from . import randgen, solver


def cuntz_relations(k_max: int = 2**10) -> dict[str, bool]:
    """The five defining relations, in normal form and on the sequence space."""
    u, v = alg.gen_u(), alg.gen_v()
    us, vs = alg.adjoint(u), alg.adjoint(v)
    one = alg.unit()
    cases = {
        "u*u = 1": alg.sub(alg.mul(us, u), one),
        "v*v = 1": alg.sub(alg.mul(vs, v), one),
        "u*v = 0": alg.mul(us, v),
        "v*u = 0": alg.mul(vs, u),
        "uu* + vv* = 1": alg.sub(alg.add(alg.mul(u, us), alg.mul(v, vs)), one),
    }
    out = {}
    for name, x in cases.items():
        out[name] = alg.is_zero(x)
        out[name + " (rep)"] = l2rep.oracle_zero_check(x, k_max)
    return out


def amplification_roundtrip(samples: int, seed) -> bool:
    rng = randgen.rng_for(seed)
    for _ in range(samples):
        x = randgen.random_element(rng, max_len=4)
        if not alg.equals(om.psi(om.phi(x)), x):
            return False
        M = randgen.random_matrix(rng, 2, max_len=4)
        if om.phi(om.psi(M)) != M:
            return False
    return True


def amplification_multiplicative(samples: int, seed) -> bool:
    rng = randgen.rng_for(seed)
    for _ in range(samples):
        x, y = randgen.random_element(rng), randgen.random_element(rng)
        if om.phi(alg.mul(x, y)) != om.phi(x) @ om.phi(y):
            return False
    return True


def commutator_identity(n: int, deltas, samples: int, seed) -> bool:
    rng = randgen.rng_for(seed)
    for delta in deltas:
        for _ in range(samples):
            b = randgen.random_tuple(rng, n, max_len=2, max_terms=3)
            if not construction.lemma_defect_check(n, delta, b):
                return False
    return True


def right_inverse_identity(n: int, samples: int, seed) -> bool:
    """``T L = 1 - E`` exactly."""
    rng = randgen.rng_for(seed)
    for _ in range(samples):
        y = randgen.random_tuple(rng, n - 1, offset=2, max_len=2, max_terms=3)
        if solver.op_T(solver.op_L(y)) != y - solver.op_E(y):
            return False
    return True


def anchor_solution(delta=Fraction(1, 64000)) -> bool:
    """``b = (-2u*, -2v*)`` solves the ``n = 2`` system exactly."""
    u, v = alg.gen_u(), alg.gen_v()
    b = solver.domain_tuple([alg.scalar_mul(-2, alg.adjoint(u)), alg.scalar_mul(-2, alg.adjoint(v))])
    res, _ = solver.residual(b, 2, delta)
    return res.is_zero()


def identity_suites(n: int = 4, seed: int = 0, samples: int = 10) -> dict[str, bool]:
    """All exact suites at size ``n``; keys name the checks."""
    rng = random.Random(seed)
    out = dict(cuntz_relations())
    out["psi(phi(x)) = x and phi(psi(M)) = M"] = amplification_roundtrip(samples, rng)
    out["phi(xy) = phi(x) phi(y)"] = amplification_multiplicative(samples, rng)
    out[f"[D, X] - 1 is the last-column matrix (n={n})"] = commutator_identity(
        n, (Fraction(1), Fraction(1, 7)), max(1, samples // 2), rng)
    out[f"T L = 1 - E (n={n})"] = right_inverse_identity(n, samples, rng)
    out["n=2 anchor has zero residual"] = anchor_solution()
    return out

