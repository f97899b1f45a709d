"""The matrices ``D`` and ``X`` whose commutator is close to the identity.

For any tuple ``b`` the commutator ``[D, X] - 1`` vanishes outside the last
column, and the last column collects exactly the residuals of the solver's
system plus one corner entry. Conjugating by ``S = diag(mu^{n-1}, ..., mu, 1)``
shrinks the corner by ``mu^{n-1}``; when ``n`` is a power of two the pair
descends to single elements of O_2 through iterated ``psi``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from . import algebra as alg
from . import opmatrix as om
from .algebra import GradedElement
from .errors import ShapeError
from .norms import NormInterval, norm_interval
from .opmatrix import OpMatrix, ScaleParams
from .rational import format_rational
from .scalars import Backend
from .solver import ElementTuple, ResidualReport, SolverParams, solve_b

log = logging.getLogger(__name__)

DEFAULT_MU = Fraction(1, 2)


def _check_b(n: int, delta, b: ElementTuple) -> Fraction:
    if n < 2:
        raise ShapeError("n must be at least 2")
    if b.offset != 1 or len(b) != n:
        raise ShapeError(f"b must be a domain tuple of length {n}")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return delta


def build_X(n: int, delta, b: ElementTuple) -> OpMatrix:
    """Ones on the subdiagonal, ``delta * b_i`` down the last column."""
    delta = _check_b(n, delta, b)
    bk = b.backend
    one, zero = alg.unit(bk), alg.zero(bk)
    rows = [[zero] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = one
    for i in range(n):
        rows[i][n - 1] = alg.add(rows[i][n - 1], alg.scalar_mul(delta, b.get(i + 1)))
    return OpMatrix.from_rows(rows)


def build_D(n: int, delta, b: ElementTuple) -> OpMatrix:
    """``v/delta`` on the diagonal, ``u/delta`` below it, ``i`` above it at row ``i``,
    plus ``b_i u`` down the last column.

    The last column carries ``b_i u`` without a factor ``delta``: only then does
    the ``u/delta`` entry of the last row cancel against it in column ``n-1``,
    leaving a commutator supported on the last column for every ``b``.
    """
    delta = _check_b(n, delta, b)
    bk = b.backend
    u, v = alg.gen_u(bk), alg.gen_v(bk)
    one, zero = alg.unit(bk), alg.zero(bk)
    inv = 1 / delta
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = alg.scalar_mul(inv, v)
        if i + 1 < n:
            rows[i + 1][i] = alg.scalar_mul(inv, u)
            rows[i][i + 1] = alg.scalar_mul(i + 1, one)
    for i in range(n):
        extra = alg.mul(b.get(i + 1), u)
        rows[i][n - 1] = alg.add(rows[i][n - 1], extra)
    return OpMatrix.from_rows(rows)


def corner_element(n: int, delta, b: ElementTuple) -> GradedElement:
    """``[v, b_1] + delta b_2 + delta b_1 [u, b_n]``."""
    delta = _check_b(n, delta, b)
    u, v = alg.gen_u(b.backend), alg.gen_v(b.backend)
    b1 = b.get(1)
    out = alg.commutator(v, b1)
    out = alg.add(out, alg.scalar_mul(delta, b.get(2)))
    return alg.add(out, alg.scalar_mul(delta, alg.mul(b1, alg.commutator(u, b.get(n)))))


def expected_defect(n: int, delta, b: ElementTuple) -> OpMatrix:
    """Last-column matrix predicted for ``[D, X] - 1``.

    Row ``i`` holds ``[v, b_i] + [u, b_{i-1}] + i delta b_{i+1} + delta b_i [u, b_n]``,
    minus ``n`` in the last row, with ``b_0 = b_{n+1} = 0``.
    """
    delta = _check_b(n, delta, b)
    bk = b.backend
    u, v = alg.gen_u(bk), alg.gen_v(bk)
    zero = alg.zero(bk)
    k = alg.commutator(u, b.get(n))
    rows = [[zero] * n for _ in range(n)]
    for i in range(1, n + 1):
        e = alg.add(alg.commutator(v, b.get(i)), alg.commutator(u, b.get(i - 1)))
        e = alg.add(e, alg.scalar_mul(i * delta, b.get(i + 1)))
        e = alg.add(e, alg.scalar_mul(delta, alg.mul(b.get(i), k)))
        if i == n:
            e = alg.sub(e, alg.scalar_mul(n, alg.unit(bk)))
        rows[i - 1][n - 1] = e
    return OpMatrix.from_rows(rows)


def raw_defect(D: OpMatrix, X: OpMatrix) -> OpMatrix:
    return om.mat_commutator(D, X) - om.identity(D.size, D.backend)


def lemma_defect_check(n: int, delta, b: ElementTuple) -> bool:
    """Whether ``[D, X] - 1`` equals :func:`expected_defect` exactly."""
    if b.backend is not Backend.EXACT:
        raise ValueError("the exact identity check needs the exact backend")
    D, X = build_D(n, delta, b), build_X(n, delta, b)
    return raw_defect(D, X) == expected_defect(n, delta, b)


@dataclass(frozen=True)
class ConstructionInstance:
    n: int
    delta: Fraction
    mu: Fraction
    b: ElementTuple
    D: OpMatrix
    X: OpMatrix
    D_mu: OpMatrix
    X_mu: OpMatrix

    @property
    def backend(self) -> Backend:
        return self.b.backend

    def defect(self) -> OpMatrix:
        return raw_defect(self.D_mu, self.X_mu)


def build_scaled(n: int, delta, mu, b: ElementTuple) -> ConstructionInstance:
    """``D_mu = (1/mu) S D S^-1`` and ``X_mu = mu S X S^-1``."""
    delta, mu = Fraction(delta), Fraction(mu)
    D, X = build_D(n, delta, b), build_X(n, delta, b)
    s = ScaleParams(mu, n)
    return ConstructionInstance(
        n, delta, mu, b, D, X,
        om.scale_conjugate(D, s, 1 / mu),
        om.scale_conjugate(X, s, mu),
    )


@dataclass
class DefectReport:
    defect: OpMatrix
    eps: NormInterval
    norm_D: NormInterval
    norm_X: NormInterval
    product: NormInterval
    corner: GradedElement
    corner_norm: NormInterval
    corner_contribution: NormInterval
    residual_contribution: NormInterval

    @property
    def dominant(self) -> str:
        """Which part of the last column carries the larger upper bound."""
        if self.residual_contribution.hi > self.corner_contribution.hi:
            return "residual"
        return "corner"

    @property
    def dominance_certified(self) -> bool:
        """Whether the two contribution enclosures are disjoint."""
        r, c = self.residual_contribution, self.corner_contribution
        return r.lo > c.hi or c.lo > r.hi

    def as_dict(self) -> dict:
        return {
            "eps": self.eps.as_dict(),
            "norm_D": self.norm_D.as_dict(),
            "norm_X": self.norm_X.as_dict(),
            "product": self.product.as_dict(),
            "corner": alg.format_element(self.corner) if self.corner.max_level() <= 3 else None,
            "corner_norm": self.corner_norm.as_dict(),
            "corner_contribution": self.corner_contribution.as_dict(),
            "residual_contribution": self.residual_contribution.as_dict(),
            "dominant": self.dominant,
            "dominance_certified": self.dominance_certified,
        }


def _without_first_row(A: OpMatrix) -> OpMatrix:
    zero = alg.zero(A.backend)
    return OpMatrix.from_rows([[zero] * A.size] + [list(r) for r in A.entries[1:]])


def _only_first_row(A: OpMatrix) -> OpMatrix:
    zero = alg.zero(A.backend)
    return OpMatrix.from_rows([list(A.entries[0])] + [[zero] * A.size for _ in A.entries[1:]])


def defect_norm(inst: ConstructionInstance, **kw) -> DefectReport:
    """Certified enclosures of ``eps = ||[D_mu, X_mu] - 1||`` and of the pair's norms.

    The defect is computed exactly from the given ``b``, so residuals left by a
    truncated solve are accounted for automatically. The corner (first row)
    and residual (remaining rows) parts are enclosed separately as well.
    """
    defect = inst.defect()
    eps = om.mat_norm_interval(defect, **kw)
    norm_D = om.mat_norm_interval(inst.D_mu, **kw)
    norm_X = om.mat_norm_interval(inst.X_mu, **kw)
    corner = corner_element(inst.n, inst.delta, inst.b)
    corner_norm = norm_interval(corner, gram=True)
    return DefectReport(
        defect=defect,
        eps=eps,
        norm_D=norm_D,
        norm_X=norm_X,
        product=norm_D * norm_X,
        corner=corner,
        corner_norm=corner_norm,
        corner_contribution=om.mat_norm_interval(_only_first_row(defect), **kw),
        residual_contribution=om.mat_norm_interval(_without_first_row(defect), **kw),
    )


@dataclass
class DescentResult:
    d: GradedElement
    x: GradedElement
    defect: GradedElement
    exact: bool
    eps: NormInterval

    def as_dict(self) -> dict:
        return {"commutator_matches_descended_defect": self.exact, "eps": self.eps.as_dict()}


def descend(inst: ConstructionInstance, report: DefectReport | None = None) -> DescentResult:
    """``d = psi(D_mu)``, ``x = psi(X_mu)`` and a check that ``[d, x] - 1 = psi(defect)``."""
    n = inst.n
    if n & (n - 1):
        raise ShapeError(f"descent needs n to be a power of two, got {n}")
    defect = report.defect if report is not None else inst.defect()
    d = om.psi_descend(inst.D_mu)
    x = om.psi_descend(inst.X_mu)
    down = om.psi_descend(defect)
    comm = alg.sub(alg.commutator(d, x), alg.unit(inst.backend))
    return DescentResult(d, x, down, alg.equals(comm, down), norm_interval(down))


@dataclass
class CertificationReport:
    params: dict
    instance: ConstructionInstance
    solver: ResidualReport
    defect: DefectReport
    descent: DescentResult | None
    ledger: dict

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "solver": self.solver.as_dict(),
            "defect": self.defect.as_dict(),
            "descent": None if self.descent is None else self.descent.as_dict(),
            "ledger": self.ledger,
        }


def certify_instance(n: int, delta=None, mu=DEFAULT_MU, K: int = 8,
                     backend: Backend | str = Backend.EXACT, *, max_iters: int = 20,
                     tol: float = 1e-12, descend_pair: bool | None = None) -> CertificationReport:
    """Solve for ``b``, build the scaled pair and certify everything about it.

    ``delta`` defaults to ``1/(2000 n^5)``. Descent runs by default only for
    exact instances whose size is a power of two.
    """
    from . import ledger

    backend = Backend(backend)
    delta = ledger.default_delta(n) if delta is None else Fraction(delta)
    mu = Fraction(mu)
    params = SolverParams(n=n, delta=delta, K=K, max_iters=max_iters, tol=tol, backend=backend)
    b, solver_report = solve_b(params)
    inst = build_scaled(n, delta, mu, b)
    report = defect_norm(inst)
    if descend_pair is None:
        descend_pair = backend is Backend.EXACT and not n & (n - 1)
    descent = descend(inst, report) if descend_pair else None
    row = ledger.bounds_for_n(n)
    comparison = {
        "n": n,
        "ledger_delta": format_rational(row.delta),
        "delta_matches_ledger": row.delta == delta,
        "Dbar_hi": row.Dbar.float_hi(),
        "Xbar_hi": row.Xbar.float_hi(),
        "epsbar_hi": row.epsbar.float_hi(),
        "norm_D_within_Dbar": report.norm_D.hi <= row.Dbar.float_hi(),
        "norm_X_within_Xbar": report.norm_X.hi <= row.Xbar.float_hi(),
        "eps_within_epsbar": report.eps.hi <= row.epsbar.float_hi(),
    }
    log.info("certified n=%d: eps in [%.6g, %.6g], dominant %s",
             n, report.eps.lo, report.eps.hi, report.dominant)
    return CertificationReport(
        params={"n": n, "delta": format_rational(delta), "mu": format_rational(mu),
                "K": K, "backend": backend.value, "max_iters": max_iters, "tol": tol},
        instance=inst,
        solver=solver_report,
        defect=report,
        descent=descent,
        ledger=comparison,
    )
