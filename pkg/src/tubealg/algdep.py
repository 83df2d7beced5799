"""Guessing polynomial relations ``P(y, f(y)) = 0`` from truncated Taylor data.

Unknowns are the coefficients of the monomials ``y^a T^b`` with
``|a| + b <= D``; each one contributes a column holding the Taylor
coefficients of ``y^a f^b`` up to total degree ``N``.  A kernel vector of that
matrix is a relation valid modulo degree ``N + 1``; it is then re-checked at
a higher order before being reported.

``Found`` proves the truncated germ satisfies the relation up to the
validated order.  ``NoneUpTo`` only says no relation of degree ``<= D``
survives at order ``N``: it is bounded evidence of transcendence, never a
proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Mapping, Union

from .linalg import KernelTracker
from .series import Series

__all__ = [
    "Polynomial",
    "Found",
    "NoneUpTo",
    "RelationResult",
    "UnderdeterminedError",
    "enumerate_monomials",
    "monomial_count",
    "minimum_order",
    "guess_relation",
    "validate_relation",
]

DEFAULT_MARGIN = 8


class UnderdeterminedError(ValueError):
    """Raised when the truncation order cannot pin down a relation."""


def _compositions(total: int, parts: int):
    # lexicographically descending: (total, 0, ...) first
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_monomials(var_count: int, D: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree ``<= D`` in graded lex order."""
    if var_count < 1 or D < 0:
        raise ValueError("need var_count >= 1 and D >= 0")
    return [e for d in range(D + 1) for e in _compositions(d, var_count)]


def monomial_count(var_count: int, D: int) -> int:
    return comb(D + var_count, var_count)


def minimum_order(m: int, D: int, margin: int = DEFAULT_MARGIN) -> int:
    """Smallest truncation order :func:`guess_relation` accepts."""
    return monomial_count(m + 1, D) + margin


class Polynomial:
    """Integer polynomial in ``y1..ym`` and ``T`` (exponents stored as ``(a..., b)``)."""

    __slots__ = ("var_count", "coeffs")

    def __init__(self, var_count: int, coeffs: Mapping):
        self.var_count = var_count
        clean = {}
        for e, c in coeffs.items():
            e = tuple(int(x) for x in e)
            if len(e) != var_count:
                raise ValueError("exponent length does not match var_count")
            c = Fraction(c)
            if c:
                clean[e] = c
        if not any(e[-1] > 0 for e in clean):
            raise ValueError("relation must involve T")
        self.coeffs = clean

    @property
    def base_count(self) -> int:
        return self.var_count - 1

    @property
    def total_degree(self) -> int:
        return max(sum(e) for e in self.coeffs)

    @property
    def t_degree(self) -> int:
        return max(e[-1] for e in self.coeffs)

    def leading_t_coefficient(self) -> dict:
        b = self.t_degree
        return {e[:-1]: c for e, c in self.coeffs.items() if e[-1] == b}

    def normalized(self) -> "Polynomial":
        """Integer coefficients with gcd 1 and a positive leading coefficient.

        The leading monomial is the first one printed: highest power of ``T``,
        then highest total degree, then lexicographically largest.
        """
        den = 1
        for c in self.coeffs.values():
            den = den * c.denominator // gcd(den, c.denominator)
        ints = {e: int(c * den) for e, c in self.coeffs.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        lead = max(ints, key=_column_key)
        sign = 1 if ints[lead] > 0 else -1
        return Polynomial(self.var_count, {e: Fraction(sign * v // g) for e, v in ints.items()})

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.var_count == other.var_count and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var_count, frozenset(self.coeffs.items())))

    def terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms from the leading monomial down (T-degree, total degree, grlex)."""
        return sorted(self.coeffs.items(), key=lambda kv: _column_key(kv[0]), reverse=True)

    def to_text(self, names: tuple[str, ...] | None = None) -> str:
        m = self.base_count
        names = names or tuple(f"y{j}" for j in range(1, m + 1)) + ("T",)
        parts = []
        for e, c in self.terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            mag = abs(c)
            body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.to_text()})"

    def to_dict(self) -> dict:
        return {
            "var_count": self.var_count,
            "text": self.to_text(),
            "terms": [{"exp": list(e), "coeff": str(c)} for e, c in self.terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        return cls(int(data["var_count"]),
                   {tuple(t["exp"]): Fraction(t["coeff"]) for t in data["terms"]})

    def substitute(self, f: Series, order: int | None = None) -> Series:
        """``P(y, f(y))`` truncated at ``order`` (default ``f.order``)."""
        if f.var_count != self.base_count:
            raise ValueError("series and polynomial disagree on the base variables")
        order = f.order if order is None else order
        if f.order < order:
            raise ValueError(f"series known to order {f.order}, need {order}")
        f = f.truncate(order)
        m = self.base_count
        powers = [Series.constant(1, m, order)]
        for _ in range(self.t_degree):
            powers.append(powers[-1] * f)
        acc = Series.zero(m, order)
        for e, c in self.coeffs.items():
            a, b = e[:-1], e[-1]
            if sum(a) > order:
                continue
            shifted = Series(m, order, {
                tuple(x + y for x, y in zip(k, a)): v for k, v in powers[b].coeffs.items()})
            acc = acc + shifted.scale(c)
        return acc


@dataclass(frozen=True)
class Found:
    polynomial: Polynomial
    validated_order: int

    found = True

    def to_dict(self) -> dict:
        return {"status": "found", "polynomial": self.polynomial.to_dict(),
                "validated_order": self.validated_order}


@dataclass(frozen=True)
class NoneUpTo:
    degree: int
    order: int

    found = False

    def to_dict(self) -> dict:
        return {"status": "none", "degree": self.degree, "order": self.order}


RelationResult = Union[Found, NoneUpTo]


def result_from_dict(data: Mapping) -> RelationResult:
    if data["status"] == "found":
        return Found(Polynomial.from_dict(data["polynomial"]), int(data["validated_order"]))
    if data["status"] == "none":
        return NoneUpTo(int(data["degree"]), int(data["order"]))
    raise ValueError(f"unknown relation status {data['status']!r}")


def _column_key(e: tuple) -> tuple:
    # preference order for relation monomials: T-degree, total degree, then
    # lex with y1 > y2 > ... (so y1*T prints before y2*T)
    return (e[-1], sum(e), e)


def _powers(f: Series, D: int, order: int) -> list[dict]:
    f = f.truncate(order)
    out = [Series.constant(1, f.var_count, order)]
    for _ in range(D):
        out.append(out[-1] * f)
    return [p.coeffs for p in out]


def _row(e: tuple, columns: list[tuple], powers: list[dict]) -> list[Fraction]:
    row = []
    for col in columns:
        a, b = col[:-1], col[-1]
        k = tuple(x - y for x, y in zip(e, a))
        if min(k) < 0:
            row.append(Fraction(0))
        else:
            row.append(powers[b].get(k, Fraction(0)))
    return row


def _best_kernel_vector(basis: list[list[int]], columns: list[tuple]) -> list[int]:
    """Kernel vector whose highest monomial (in column preference order) is lowest.

    Unique up to scale: echelonize with pivots taken from the most expensive
    column downwards and keep the last row.
    """
    order = sorted(range(len(columns)), key=lambda i: _column_key(columns[i]), reverse=True)
    rows = [list(b) for b in basis]
    pivot_row = 0
    for c in order:
        piv = next((i for i in range(pivot_row, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[pivot_row], rows[piv] = rows[piv], rows[pivot_row]
        p = rows[pivot_row]
        for i in range(pivot_row + 1, len(rows)):
            if rows[i][c]:
                rows[i] = [p[c] * x - rows[i][c] * y for x, y in zip(rows[i], p)]
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return rows[pivot_row - 1]


def _to_polynomial(vec: list[int], columns: list[tuple]) -> Polynomial:
    return Polynomial(len(columns[0]), {c: v for c, v in zip(columns, vec) if v}).normalized()


def guess_relation(f: Series, D: int, N: int, margin: int = DEFAULT_MARGIN) -> RelationResult:
    """Search for ``P(y, T)`` of total degree ``<= D`` with ``P(y, f) = O(deg N+1)``.

    ``N`` must be at least the number of unknowns plus ``margin``.  When
    ``f.order > N`` the candidate is re-checked up to ``f.order``; a candidate
    that fails is discarded and the search continues with the extra rows.
    """
    m = f.var_count
    if D < 1:
        raise ValueError("degree bound must be at least 1")
    need = minimum_order(m, D, margin)
    if N < need:
        raise UnderdeterminedError(
            f"order {N} too low for degree {D} in {m} variable(s): need at least {need} "
            f"({monomial_count(m + 1, D)} unknowns + margin {margin})")
    if f.order < N:
        raise ValueError(f"series known to order {f.order}, need {N}")

    validate_order = f.order
    columns = enumerate_monomials(m + 1, D)
    powers = _powers(f, D, validate_order)
    tracker = KernelTracker(len(columns))
    for e in enumerate_monomials(m, N):
        tracker.add_row(_row(e, columns, powers))
        if not tracker.basis:
            return NoneUpTo(D, N)

    candidate = _to_polynomial(_best_kernel_vector(tracker.basis, columns), columns)
    if validate_relation(candidate, f, validate_order):
        return Found(candidate, validate_order)

    # spurious at order N: tighten with the validation rows and retry once
    for e in enumerate_monomials(m, validate_order):
        if sum(e) <= N:
            continue
        tracker.add_row(_row(e, columns, powers))
        if not tracker.basis:
            return NoneUpTo(D, N)
    candidate = _to_polynomial(_best_kernel_vector(tracker.basis, columns), columns)
    return Found(candidate, validate_order)


def validate_relation(P: Polynomial, f: Series, order: int) -> bool:
    """True iff ``P(y, f(y))`` vanishes through total degree ``order``."""
    return P.substitute(f, order).is_zero()
