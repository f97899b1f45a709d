from fractions import Fraction

from cuntzcomm import algebra as alg
from cuntzcomm import checks, randgen
from cuntzcomm.scalars import Backend


def test_cuntz_relations_all_hold():
    results = checks.cuntz_relations(2**6)
    assert len(results) == 10
    assert all(results.values())


def test_identity_suites_small():
    results = checks.identity_suites(n=3, seed=1, samples=3)
    assert all(results.values())


def test_anchor_solution():
    assert checks.anchor_solution(Fraction(1, 3))


def test_random_generators_are_seeded():
    a = randgen.random_element(42, max_len=3)
    b = randgen.random_element(42, max_len=3)
    assert alg.equals(a, b)
    t = randgen.random_tuple(3, 4, offset=2)
    assert t.offset == 2 and len(t) == 4
    m = randgen.random_matrix(5, 3)
    assert m.size == 3


def test_random_degree0_element():
    x = randgen.random_degree0_element(0, 3, backend=Backend.DOUBLE)
    assert x.degrees() == [0]
    assert x.backend is Backend.DOUBLE
    assert x.max_level() <= 3
