"""Exact-rational bound ledger for the construction.

For a size ``n`` the construction uses ``delta = 1/(2000 n^5)`` and a solution
``b`` with ``||b_i|| <= B(n) = 16 sqrt2 n^3``. With ``mu = 1/2`` and
``||u|| = ||v|| = 1`` that gives

* ``||D_mu|| <= Dbar(n) = 12000 n^5 + (n - 1) + B (4 - 2^-(n-2))``
* ``||X_mu|| <= Xbar(n) = 1 + delta B (1 - 2^-n)``
* ``||[D_mu, X_mu] - 1|| <= epsbar(n) = 2^-(n-1) (2B + delta B + 2 delta B^2)``

and any pair with defect ``eps`` satisfies ``||D|| ||X|| >= ln(1/eps) / 2``.
Every irrational constant is carried as a rational :class:`Enclosure`.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .rational import SQRT2, Enclosure, format_rational, ln_enclosure

CSV_COLUMNS = ("k", "eps", "n", "delta", "B_hi", "Dbar_hi", "Xbar_hi", "epsbar_hi",
               "product_hi", "log_floor_lo", "C_hi")
RELAXED_DENOMINATOR = 2000


def default_delta(n: int) -> Fraction:
    return Fraction(1, 2000 * n**5)


@dataclass(frozen=True)
class LedgerRow:
    n: int
    delta: Fraction
    B: Enclosure
    Dbar: Enclosure
    Xbar: Enclosure
    epsbar: Enclosure
    product: Enclosure
    eps: Fraction | None = None
    k: int | None = None
    log_floor: Enclosure | None = None
    C: Enclosure | None = None

    @property
    def alpha(self) -> Enclosure:
        """``Dbar(n) / n^5``."""
        return self.Dbar * Fraction(1, self.n**5)

    @property
    def gamma(self) -> Enclosure:
        """``epsbar(n) 2^n / n^3``."""
        return self.epsbar * Fraction(2**self.n, self.n**3)

    @property
    def floor_consistent(self) -> bool:
        return self.log_floor is None or self.log_floor.hi <= self.product.hi

    def as_dict(self) -> dict:
        out = {
            "k": self.k,
            "eps": None if self.eps is None else format_rational(self.eps),
            "n": self.n,
            "delta": format_rational(self.delta),
            "B_hi": self.B.float_hi(),
            "Dbar_hi": self.Dbar.float_hi(),
            "Xbar_hi": self.Xbar.float_hi(),
            "epsbar_hi": self.epsbar.float_hi(),
            "product_hi": self.product.float_hi(),
            "log_floor_lo": None if self.log_floor is None else self.log_floor.float_lo(),
            "C_hi": None if self.C is None else self.C.float_hi(),
            "alpha_hi": self.alpha.float_hi(),
            "gamma_hi": self.gamma.float_hi(),
        }
        return out


def bounds_for_n(n: int) -> LedgerRow:
    """Ledger quantities for size ``n``; deterministic exact rationals."""
    if n < 2:
        raise ValueError("n must be at least 2")
    delta = default_delta(n)
    B = SQRT2 * (16 * n**3)
    Dbar = B * (4 - Fraction(1, 2 ** (n - 2))) + (12000 * n**5 + (n - 1))
    Xbar = B * (delta * (1 - Fraction(1, 2**n))) + 1
    epsbar = (B * 2 + B * delta + B * B * (2 * delta)) * Fraction(1, 2 ** (n - 1))
    return LedgerRow(n, delta, B, Dbar, Xbar, epsbar, Dbar * Xbar)


def choose_n(eps) -> int:
    """Smallest power of two ``n >= 2`` with ``epsbar(n) <= eps``, certified."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = 2
    while bounds_for_n(n).epsbar.hi > eps:
        n *= 2
    return n


def log_floor(eps) -> Enclosure:
    """Enclosure of ``ln(1/eps) / 2`` (natural log); zero for ``eps >= 1``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= 1:
        return Enclosure.exact(0)
    return ln_enclosure(1 / eps) * Fraction(1, 2)


def ledger_row(eps, k: int | None = None) -> LedgerRow:
    """Full row for a target ``eps``: chosen ``n``, log floor and ``C = P / ln^5(1/eps)``."""
    eps = Fraction(eps)
    base = bounds_for_n(choose_n(eps))
    floor = log_floor(eps)
    C = None
    if eps < 1:
        C = base.product / ln_enclosure(1 / eps) ** 5
    return LedgerRow(base.n, base.delta, base.B, base.Dbar, base.Xbar, base.epsbar,
                     base.product, eps, k, floor, C)


@dataclass(frozen=True)
class ConditionCheck:
    n: int
    value: Enclosure
    relaxed: Enclosure

    @property
    def holds(self) -> bool:
        return self.value.lt(1) and self.relaxed.lt(1)

    def as_dict(self) -> dict:
        return {"n": self.n, "value_hi": self.value.float_hi(),
                "relaxed_hi": self.relaxed.float_hi(), "holds": self.holds}


def condition_check(n: int, delta=None) -> ConditionCheck:
    """Smallness condition of the fixed-point solve at ``(n, delta)``.

    ``value`` is ``delta (2 (n-1) 8 sqrt2 n^2 + 8 * 128 n^4 * n)`` and
    ``relaxed`` its cruder form ``(16 sqrt2 n^3 + 1024 n^5) / (2000 n^5)``,
    which only applies to the default ``delta``.
    """
    from .solver import condition_value

    delta = default_delta(n) if delta is None else Fraction(delta)
    relaxed = (SQRT2 * (16 * n**3) + 1024 * n**5) * Fraction(1, RELAXED_DENOMINATOR * n**5)
    return ConditionCheck(n, condition_value(n, delta), relaxed)


def condition_threshold(n: int) -> Enclosure:
    """Enclosure of the supremum of admissible ``delta`` at size ``n``."""
    from .solver import condition_value

    return condition_value(n, 1).reciprocal()


@dataclass
class SweepResult:
    rows: list

    @property
    def max_C(self) -> Enclosure | None:
        cs = [r.C for r in self.rows if r.C is not None]
        if not cs:
            return None
        return max(cs, key=lambda c: c.hi)

    @property
    def floor_consistent(self) -> bool:
        return all(r.floor_consistent for r in self.rows)

    def as_dict(self) -> dict:
        mc = self.max_C
        return {
            "rows": [r.as_dict() for r in self.rows],
            "max_C_hi": None if mc is None else mc.float_hi(),
            "floor_consistent": self.floor_consistent,
        }


def sweep(eps_list: Iterable, ks: Sequence[int] | None = None) -> SweepResult:
    eps_list = [Fraction(e) for e in eps_list]
    if ks is None:
        ks = [None] * len(eps_list)
    return SweepResult([ledger_row(e, k) for e, k in zip(eps_list, ks)])


def dyadic_sweep(k_max: int = 60, k_min: int = 1) -> SweepResult:
    """Rows for ``eps = 2^-k``, ``k = k_min..k_max``."""
    ks = list(range(k_min, k_max + 1))
    return sweep([Fraction(1, 2**k) for k in ks], ks)


def rows_to_csv(rows: Sequence[LedgerRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        d = r.as_dict()
        writer.writerow({c: "" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c])
                         for c in CSV_COLUMNS})
    return buf.getvalue()


def rows_to_json(rows: Sequence[LedgerRow]) -> str:
    return json.dumps([r.as_dict() for r in rows], indent=2, sort_keys=True)
