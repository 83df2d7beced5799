"""Algebraizability obstructions for rigid tubes ``v_k = phi_k(y)``.

The pipeline: find multiindices ``beta^l`` and indices ``k_l`` such that the
derivative map ``y -> (d^{beta^l} phi_{k_l} / dy^{beta^l})_l`` has full rank at
the origin (finite nondegeneracy), invert that map formally, and ask whether
the partial derivatives of the inverse satisfy polynomial relations.  If the
tube is locally algebraizable they must; a missing relation is evidence
(bounded by the search degree and order) that it is not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Sequence

from .algdep import DEFAULT_MARGIN, RelationResult, enumerate_monomials, guess_relation
from .expr import Expr, Num, Pow, Product, Sum, Var, parse, taylor
from .linalg import rank
from .series import Series, SeriesMap, compose, diff, invert_map, mul

__all__ = [
    "TubeSpec",
    "Witness",
    "InvalidWitnessError",
    "ObstructionMatrix",
    "PolarProfile",
    "derivative_map",
    "check_witness",
    "search_witness",
    "obstruction_matrix",
    "obstruction_test",
    "hypersurface_first_second_test",
    "polar_rigid_test",
    "perturbed_family",
    "perturbed_family_expr",
    "levi_minimal_sufficient",
    "jacobian_identity_holds",
]


class InvalidWitnessError(ValueError):
    pass


@dataclass(frozen=True)
class TubeSpec:
    """Tube of codimension ``d`` in ``C^n``: ``v_k = defining[k](y)``, ``y`` in ``R^m``."""

    n: int
    d: int
    defining: tuple[Series, ...]

    def __post_init__(self):
        if not 1 <= self.d < self.n:
            raise ValueError(f"need 1 <= d < n, got n={self.n}, d={self.d}")
        object.__setattr__(self, "defining", tuple(self.defining))
        if len(self.defining) != self.d:
            raise ValueError(f"expected {self.d} defining functions, got {len(self.defining)}")
        m = self.n - self.d
        for k, f in enumerate(self.defining, 1):
            if f.var_count != m:
                raise ValueError(f"defining function {k} has {f.var_count} variables, need {m}")
            if f.constant_term() != 0:
                raise ValueError(f"defining function {k} does not vanish at the origin")
        if len({f.order for f in self.defining}) > 1:
            order = self.order
            object.__setattr__(self, "defining", tuple(f.truncate(order) for f in self.defining))

    @property
    def m(self) -> int:
        return self.n - self.d

    @property
    def order(self) -> int:
        return min(f.order for f in self.defining)

    @classmethod
    def from_text(cls, n: int, texts: Sequence[str], order: int) -> "TubeSpec":
        m = n - len(texts)
        return cls(n, len(texts), tuple(taylor(parse(t, m), m, order) for t in texts))


@dataclass(frozen=True)
class Witness:
    """Multiindices ``betas`` and 1-based function indices ``ks``."""

    betas: tuple[tuple[int, ...], ...]
    ks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(tuple(int(x) for x in b) for b in self.betas))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if len(self.betas) != len(self.ks):
            raise InvalidWitnessError("betas and ks must have the same length")
        for b in self.betas:
            if sum(b) < 1 or min(b) < 0:
                raise InvalidWitnessError(f"multiindex {list(b)} must be nonnegative with positive length")

    @property
    def max_length(self) -> int:
        return max(sum(b) for b in self.betas)

    def to_dict(self) -> dict:
        return {"betas": [list(b) for b in self.betas], "ks": list(self.ks)}

    @classmethod
    def from_dict(cls, data) -> "Witness":
        return cls(tuple(tuple(b) for b in data["betas"]), tuple(data["ks"]))


def _partial(f: Series, beta: Sequence[int]) -> Series:
    for j, times in enumerate(beta, 1):
        for _ in range(times):
            f = diff(f, j)
    return f


def _gradient_row_at_zero(f: Series, beta: Sequence[int]) -> list[Fraction]:
    # d/dy_i of d^beta f at 0 = (beta + e_i)! * [y^(beta + e_i)] f
    row = []
    for i in range(len(beta)):
        e = list(beta)
        e[i] += 1
        row.append(f[tuple(e)] * prod(factorial(x) for x in e))
    return row


def derivative_map(t: TubeSpec, w: Witness, order: int | None = None) -> tuple[SeriesMap, list[Fraction]]:
    """The map ``y -> (d^{beta^l} phi_{k_l})_l`` recentred to fix the origin.

    Returns the map and the constants that were subtracted.
    """
    m = t.m
    if len(w.betas) != m:
        raise InvalidWitnessError(f"witness has {len(w.betas)} entries, need {m}")
    for b, k in zip(w.betas, w.ks):
        if len(b) != m:
            raise InvalidWitnessError(f"multiindex {list(b)} should have {m} entries")
        if not 1 <= k <= t.d:
            raise InvalidWitnessError(f"function index {k} outside 1..{t.d}")
    available = t.order - w.max_length
    if order is None:
        order = available
    if order > available or available < 1:
        raise ValueError(
            f"defining functions known to order {t.order}; a map of order {order} "
            f"needs order {order + w.max_length}")
    comps, constants = [], []
    for b, k in zip(w.betas, w.ks):
        c = _partial(t.defining[k - 1], b).truncate(order)
        c0 = c.constant_term()
        constants.append(c0)
        comps.append(c - c0 if c0 else c)
    return SeriesMap(comps), constants


def check_witness(t: TubeSpec, w: Witness) -> None:
    """Raise :class:`InvalidWitnessError` unless ``w`` gives a rank-``m`` map."""
    psi, _ = derivative_map(t, w, order=1)
    if rank(psi.jacobian_at_zero()) != t.m:
        raise InvalidWitnessError("derivative map is not of full rank at the origin")


def search_witness(t: TubeSpec, max_order: int) -> Witness | None:
    """Greedy search over multiindices in graded lex order, lengths ``1..max_order``.

    A candidate ``(beta, k)`` is kept when its gradient row at the origin
    raises the rank of the rows kept so far.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    m = t.m
    max_order = min(max_order, t.order - 1)
    rows, betas, ks = [], [], []
    for beta in enumerate_monomials(m, max_order):
        if sum(beta) == 0:
            continue
        for k in range(1, t.d + 1):
            row = _gradient_row_at_zero(t.defining[k - 1], beta)
            if not any(row):
                continue
            if rank(rows + [row]) > len(rows):
                rows.append(row)
                betas.append(beta)
                ks.append(k)
                if len(rows) == m:
                    return Witness(tuple(betas), tuple(ks))
    return None


@dataclass(frozen=True)
class ObstructionMatrix:
    """Entry ``(j, l)`` is the partial of the ``j``-th inverse component in ``y'_l``."""

    entries: tuple[tuple[Series, ...], ...]
    forward: SeriesMap
    inverse: SeriesMap
    constants: tuple[Fraction, ...] = field(default=())

    def __getitem__(self, jl):
        j, l = jl
        return self.entries[j][l]

    def symmetric_partials(self) -> bool:
        """Mixed partials of the inverse map agree, so the grid is a Jacobian."""
        m = len(self.entries)
        for j in range(m):
            for l in range(m):
                for p in range(m):
                    if diff(self.entries[j][l], p + 1) != diff(self.entries[j][p], l + 1):
                        return False
        return True


def obstruction_matrix(t: TubeSpec, w: Witness, N: int) -> ObstructionMatrix:
    """Partial derivatives of the inverse derivative map, as series of order ``N``."""
    psi, constants = derivative_map(t, w, order=N + 1)
    inv = invert_map(psi)
    m = t.m
    entries = tuple(tuple(diff(inv[j], l) for l in range(1, m + 1)) for j in range(m))
    return ObstructionMatrix(entries, psi, inv, tuple(constants))


def _guess_grid(grid, D, N, margin) -> list[list[RelationResult]]:
    cache: dict[Series, RelationResult] = {}
    out = []
    for row in grid:
        res_row = []
        for entry in row:
            if entry not in cache:
                cache[entry] = guess_relation(entry, D, N, margin)
            res_row.append(cache[entry])
        out.append(res_row)
    return out


def obstruction_test(t: TubeSpec, w: Witness, D: int, N: int, margin: int = DEFAULT_MARGIN,
                     validate_order: int | None = None) -> list[list[RelationResult]]:
    """Relation search on every obstruction-matrix entry.

    Entries are computed to ``validate_order`` (default ``N``) so that found
    relations can be re-checked beyond the order used to find them.  The
    tube passes the necessary condition at ``(D, N)`` iff every entry is
    :class:`~tubealg.algdep.Found`.
    """
    order = N if validate_order is None else max(N, validate_order)
    om = obstruction_matrix(t, w, order)
    return _guess_grid(om.entries, D, N, margin)


def _gradient_map(t: TubeSpec, order: int) -> tuple[SeriesMap, list[list[Series]]]:
    if t.d != 1:
        raise ValueError("the first/second derivative test is for hypersurfaces (d = 1)")
    phi = t.defining[0]
    m = t.m
    if phi.order < order + 2:
        raise ValueError(f"defining function known to order {phi.order}, need {order + 2}")
    phi = phi.truncate(order + 2)
    grad = [diff(phi, j) for j in range(1, m + 1)]
    hess = [[diff(g, l) for l in range(1, m + 1)] for g in grad]
    return SeriesMap(g - g.constant_term() for g in grad), hess


def hypersurface_first_second_test(t: TubeSpec, D: int, N: int, margin: int = DEFAULT_MARGIN,
                                   validate_order: int | None = None) -> list[list[RelationResult]]:
    """Are the second partials of ``phi`` algebraic in its first partials?

    Entry ``(j, l)`` is ``d^2 phi / dy_j dy_l`` composed with the inverse of
    the (recentred) gradient map.  Needs an invertible Hessian at 0.
    """
    order = N if validate_order is None else max(N, validate_order)
    grad, hess = _gradient_map(t, order)
    inv = invert_map(grad)  # raises SingularMatrixError for a degenerate Hessian
    m = t.m
    grid = [[None] * m for _ in range(m)]
    for j in range(m):
        for l in range(j, m):
            grid[j][l] = grid[l][j] = compose(hess[j][l], inv.components)
    return _guess_grid(grid, D, N, margin)


@dataclass(frozen=True)
class PolarProfile:
    """Profile ``phi(x)`` of ``v = phi(z zbar)``, with ``x`` written as ``y1``."""

    phi: Series

    def __post_init__(self):
        if self.phi.var_count != 1:
            raise ValueError("a polar profile is univariate")
        if self.phi.constant_term() != 0:
            raise ValueError("profile must vanish at the origin")

    @property
    def levi_nondegenerate(self) -> bool:
        return self.phi[1] != 0


def polar_rigid_test(p: PolarProfile, D: int, N: int, margin: int = DEFAULT_MARGIN) -> RelationResult:
    """Relation search on the derivative of the profile."""
    return guess_relation(diff(p.phi, 1), D, N, margin)


def perturbed_family_expr(n: int, chi: Sequence[Expr | str]) -> Expr:
    """``sum_k y_k^2 + y_k^6 + y_k^9 y_1...y_{k-1} + y_k^(n+8) chi_k`` over ``k < n``."""
    if n < 2:
        raise ValueError("need n >= 2")
    m = n - 1
    if len(chi) != m:
        raise ValueError(f"need {m} perturbation functions, got {len(chi)}")
    terms = []
    for k in range(1, n):
        c = parse(chi[k - 1], m) if isinstance(chi[k - 1], str) else chi[k - 1]
        yk = Var(k)
        terms.append(Pow(yk, 2))
        terms.append(Pow(yk, 6))
        terms.append(Product((Pow(yk, 9),) + tuple(Var(i) for i in range(1, k))))
        if not (isinstance(c, Num) and c.value == 0):
            terms.append(Product((Pow(yk, n + 8), c)))
    return Sum(tuple(terms))


def perturbed_family(n: int, chi: Sequence[Expr | str], order: int) -> TubeSpec:
    return TubeSpec(n, 1, (taylor(perturbed_family_expr(n, chi), n - 1, order),))


def levi_minimal_sufficient(t: TubeSpec) -> bool:
    """True when the Hessian of ``phi`` at 0 is nonzero.

    That makes the hypersurface minimal at 0.  False is inconclusive.
    """
    if t.d != 1:
        raise ValueError("the Levi criterion applies to hypersurfaces (d = 1)")
    phi = t.defining[0]
    return any(sum(e) == 2 for e in phi.coeffs)


def jacobian_identity_holds(forward: SeriesMap, inverse: SeriesMap) -> bool:
    """Check ``J(inverse) * (J(forward) o inverse) == I`` entrywise, exactly."""
    m = forward.var_count
    jf = forward.jacobian()
    ji = inverse.jacobian()
    order = min(forward.order, inverse.order) - 1
    inner = inverse.truncate(order).components
    jf_at = [[compose(jf[i][k].truncate(order), inner) for k in range(m)] for i in range(m)]
    for j in range(m):
        for l in range(m):
            acc = Series.zero(m, order)
            for k in range(m):
                acc = acc + mul(ji[j][k], jf_at[k][l])
            if acc != Series.constant(int(j == l), m, order):
                return False
    return True
