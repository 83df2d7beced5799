"""Exact rational linear algebra: inverse, rank and right kernels.

Kernels are computed fraction-free: rows are scaled to integers and the
kernel basis is updated by integer cross-multiplication, dividing out the
content after every step so entries stay small.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RationalMatrix":
        entries = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if cols is None:
            if not entries:
                raise ValueError("cannot infer column count of an empty matrix")
            cols = len(entries[0])
        if any(len(r) != cols for r in entries):
            raise ValueError("matrix rows must have equal length")
        return cls(len(entries), cols, entries)

    def __iter__(self):
        return iter(self.entries)


def _as_rows(A) -> tuple[list[list[Fraction]], int]:
    if isinstance(A, RationalMatrix):
        return [list(r) for r in A.entries], A.cols
    rows = [[Fraction(x) for x in r] for r in A]
    cols = len(rows[0]) if rows else 0
    if any(len(r) != cols for r in rows):
        raise ValueError("matrix rows must have equal length")
    return rows, cols


def _integer_row(row: Iterable[Fraction]) -> list[int]:
    row = list(row)
    den = 1
    for x in row:
        den = lcm(den, x.denominator)
    return [x.numerator * (den // x.denominator) for x in row]


def _primitive(v: list[int]) -> list[int]:
    g = 0
    for x in v:
        g = gcd(g, x)
        if g == 1:
            return v
    if g > 1:
        return [x // g for x in v]
    return v


class KernelTracker:
    """Right kernel of a matrix fed one row at a time.

    Starts from the full space ``Z^cols``; each row cuts it down by at most one
    dimension.  Basis vectors are primitive integer vectors.
    """

    def __init__(self, cols: int):
        self.cols = cols
        self.basis: list[list[int]] = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def add_row(self, row: Sequence) -> None:
        if not self.basis:
            return
        r = _integer_row(Fraction(x) for x in row)
        nz = [j for j, x in enumerate(r) if x]
        if not nz:
            return
        vals = [sum(r[j] * b[j] for j in nz) for b in self.basis]
        p = next((i for i, v in enumerate(vals) if v), None)
        if p is None:
            return
        vp, bp = vals[p], self.basis[p]
        new = []
        for i, b in enumerate(self.basis):
            if i == p:
                continue
            vi = vals[i]
            if vi:
                b = _primitive([vp * x - vi * y for x, y in zip(b, bp)])
            new.append(b)
        self.basis = new

    def __len__(self):
        return len(self.basis)


def _sign_normalize(v: list[int]) -> list[int]:
    for x in v:
        if x:
            return v if x > 0 else [-y for y in v]
    return v


def exact_nullspace(A) -> list[list[Fraction]]:
    """Basis of the right kernel of ``A``; empty iff full column rank.

    Vectors are primitive integer vectors (as Fractions) whose first nonzero
    entry is positive.
    """
    rows, cols = _as_rows(A)
    tracker = KernelTracker(cols)
    for r in rows:
        tracker.add_row(r)
        if not tracker.basis:
            break
    return [[Fraction(x) for x in _sign_normalize(_primitive(b))] for b in tracker.basis]


def row_echelon(A) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    rows, cols = _as_rows(A)
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(A) -> int:
    return len(row_echelon(A)[1])


def matrix_inverse(A) -> list[list[Fraction]]:
    rows, n = _as_rows(A)
    if len(rows) != n:
        raise ValueError("only square matrices have inverses")
    aug = [r + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    red, pivots = row_echelon(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [r[n:] for r in red[:n]]


def mat_vec(A, v) -> list[Fraction]:
    rows, _ = _as_rows(A)
    return [sum((x * Fraction(y) for x, y in zip(r, v)), Fraction(0)) for r in rows]
