"""Exact and certified computation with the Cuntz algebra O_2.

Elements are kept in a canonical block normal form, norms are enclosed in
certified intervals, and the package builds matrices ``D``, ``X`` over O_2
whose commutator is close to the identity, together with the bound ledger
for how large ``||D|| ||X||`` must be.
"""
from .algebra import (
    GradedElement,
    add,
    adjoint,
    commutator,
    equals,
    format_element,
    from_word,
    gen_u,
    gen_v,
    level_cap,
    mul,
    parse_element,
    scalar_mul,
    unit,
    zero,
)
from .errors import (
    BackendMismatchError,
    ConditionViolatedError,
    CuntzError,
    IndexCapError,
    LevelCapError,
    ParseError,
    ResourceError,
    ShapeError,
)
from .norms import NormInterval, norm_interval, spectral_enclosure
from .opmatrix import OpMatrix, ScaleParams, mat_norm_interval, phi, psi, psi_descend
from .rational import Enclosure, parse_rational
from .scalars import Backend, GaussianRational
from .solver import ElementTuple, ResidualReport, SolverParams, solve_b

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendMismatchError",
    "ConditionViolatedError",
    "CuntzError",
    "ElementTuple",
    "Enclosure",
    "GaussianRational",
    "GradedElement",
    "IndexCapError",
    "LevelCapError",
    "NormInterval",
    "OpMatrix",
    "ParseError",
    "ResidualReport",
    "ResourceError",
    "ScaleParams",
    "ShapeError",
    "SolverParams",
    "add",
    "adjoint",
    "commutator",
    "equals",
    "format_element",
    "from_word",
    "gen_u",
    "gen_v",
    "level_cap",
    "mat_norm_interval",
    "mul",
    "norm_interval",
    "parse_element",
    "parse_rational",
    "phi",
    "psi",
    "psi_descend",
    "scalar_mul",
    "solve_b",
    "spectral_enclosure",
    "unit",
    "zero",
]
