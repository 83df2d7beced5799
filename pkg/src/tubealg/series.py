"""Exact truncated multivariate power series over the rationals.

A :class:`Series` in ``m`` variables is truncated by *total* degree: every
stored monomial has degree at most ``order``.  Coefficients are
:class:`fractions.Fraction` and are stored sparsely, so lacunary inputs such
as ``sin(y1^2)`` stay cheap.  Binary operations on series of different order
silently truncate to the smaller one.

Variable indices in the public API are 1-based, matching the names
``y1 .. y9`` used by the expression front end.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .linalg import SingularMatrixError, matrix_inverse

__all__ = [
    "Series",
    "SeriesMap",
    "add",
    "mul",
    "diff",
    "compose",
    "compose_map",
    "reciprocal",
    "invert_map",
    "lagrange_revert",
    "grlex_key",
]


def grlex_key(exp: Sequence[int]) -> tuple:
    """Sort key putting monomials in graded lexicographic order.

    Lower total degree first; within a degree, ``(1, 0)`` precedes ``(0, 1)``.
    """
    return (sum(exp), tuple(-e for e in exp))


class Series:
    """Immutable truncated power series with exact rational coefficients."""

    __slots__ = ("var_count", "order", "_coeffs", "_hash")

    def __init__(self, var_count: int, order: int, coeffs: Mapping | None = None):
        if var_count < 1:
            raise ValueError("a series needs at least one variable")
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        clean = {}
        for exp, c in (coeffs or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != var_count:
                raise ValueError(f"exponent {exp} does not have {var_count} entries")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            if sum(exp) > order:
                continue
            c = Fraction(c)
            if c:
                clean[exp] = c
        self._init(var_count, order, clean)

    def _init(self, var_count, order, coeffs):
        self.var_count = var_count
        self.order = order
        self._coeffs = coeffs
        self._hash = None

    @classmethod
    def _make(cls, var_count: int, order: int, coeffs: dict) -> "Series":
        # Trusted constructor: coeffs already truncated and free of zeros.
        obj = cls.__new__(cls)
        obj._init(var_count, order, coeffs)
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, var_count: int, order: int) -> "Series":
        return cls(var_count, order)

    @classmethod
    def constant(cls, value, var_count: int, order: int) -> "Series":
        return cls(var_count, order, {(0,) * var_count: value})

    @classmethod
    def variable(cls, j: int, var_count: int, order: int) -> "Series":
        """The coordinate ``y_j`` (1-based)."""
        if not 1 <= j <= var_count:
            raise ValueError(f"variable index {j} outside 1..{var_count}")
        exp = [0] * var_count
        exp[j - 1] = 1
        return cls(var_count, order, {tuple(exp): 1})

    @classmethod
    def from_dense(cls, coeffs: Sequence, order: int | None = None) -> "Series":
        """Univariate series from a coefficient list ``[c0, c1, ...]``."""
        if order is None:
            order = len(coeffs) - 1
        return cls(1, order, {(k,): c for k, c in enumerate(coeffs)})

    # -- inspection -------------------------------------------------------

    @property
    def coeffs(self) -> Mapping[tuple, Fraction]:
        return MappingProxyType(self._coeffs)

    def __getitem__(self, exp) -> Fraction:
        if isinstance(exp, int):
            exp = (exp,)
        return self._coeffs.get(tuple(exp), Fraction(0))

    def terms(self) -> list[tuple[tuple, Fraction]]:
        """Nonzero terms in graded lexicographic order."""
        return sorted(self._coeffs.items(), key=lambda kv: grlex_key(kv[0]))

    def constant_term(self) -> Fraction:
        return self._coeffs.get((0,) * self.var_count, Fraction(0))

    def linear_part(self) -> list[Fraction]:
        out = []
        for j in range(self.var_count):
            exp = [0] * self.var_count
            exp[j] = 1
            out.append(self._coeffs.get(tuple(exp), Fraction(0)))
        return out

    def valuation(self) -> int | None:
        """Lowest total degree present, or None for the zero series."""
        if not self._coeffs:
            return None
        return min(sum(e) for e in self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def truncate(self, order: int) -> "Series":
        if order >= self.order:
            return self
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        return Series._make(
            self.var_count,
            order,
            {e: c for e, c in self._coeffs.items() if sum(e) <= order},
        )

    def homogeneous(self, degree: int) -> dict:
        return {e: c for e, c in self._coeffs.items() if sum(e) == degree}

    # -- dunder arithmetic ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.var_count == other.var_count
            and self.order == other.order
            and self._coeffs == other._coeffs
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.var_count, self.order, frozenset(self._coeffs.items())))
        return self._hash

    def __add__(self, other):
        if isinstance(other, Series):
            return add(self, other)
        return add(self, Series.constant(other, self.var_count, self.order))

    __radd__ = __add__

    def __neg__(self):
        return Series._make(self.var_count, self.order, {e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            raise ValueError("negative powers need reciprocal()")
        result = Series.constant(1, self.var_count, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "Series":
        c = Fraction(c)
        if not c:
            return Series.zero(self.var_count, self.order)
        return Series._make(self.var_count, self.order, {e: c * v for e, v in self._coeffs.items()})

    def diff(self, j: int) -> "Series":
        return diff(self, j)

    def __call__(self, *gs: "Series") -> "Series":
        return compose(self, gs)

    # -- text -------------------------------------------------------------

    def to_text(self) -> str:
        """Render as an expression in the ``y1 .. y9`` grammar (no O-term)."""
        if not self._coeffs:
            return "0"
        parts = []
        for exp, c in self.terms():
            mono = "*".join(
                f"y{j + 1}" if e == 1 else f"y{j + 1}^{e}" for j, e in enumerate(exp) if e
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Series({self.to_text()} + O(deg {self.order + 1}), m={self.var_count})"

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "var_count": self.var_count,
            "order": self.order,
            "terms": [{"exp": list(e), "coeff": str(c)} for e, c in self.terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping, var_count: int | None = None) -> "Series":
        """Parse a series literal.

        Accepts ``{"order", "terms": [{"exp", "coeff"}]}`` or the univariate
        shorthand ``{"dense": ["c0", "c1", ...]}`` (order = length - 1 unless
        given).
        """
        m = data.get("var_count", var_count)
        if "dense" in data:
            if m not in (None, 1):
                raise ValueError("dense series literals are univariate")
            dense = [Fraction(c) for c in data["dense"]]
            order = data.get("order", len(dense) - 1)
            return cls.from_dense(dense, order)
        if m is None:
            raise ValueError("series literal needs var_count")
        if "order" not in data:
            raise ValueError("series literal needs an order")
        coeffs = {}
        for term in data.get("terms", []):
            exp = tuple(term["exp"])
            if exp in coeffs:
                raise ValueError(f"duplicate exponent {list(exp)} in series literal")
            coeffs[exp] = Fraction(term["coeff"])
        return cls(int(m), int(data["order"]), coeffs)


def _check_same_ring(a: Series, b: Series) -> None:
    if a.var_count != b.var_count:
        raise ValueError(f"variable counts differ: {a.var_count} vs {b.var_count}")


def add(a: Series, b: Series) -> Series:
    _check_same_ring(a, b)
    order = min(a.order, b.order)
    out = {e: c for e, c in a._coeffs.items() if sum(e) <= order}
    for e, c in b._coeffs.items():
        if sum(e) > order:
            continue
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return Series._make(a.var_count, order, out)


def _integerize(coeffs: Mapping) -> tuple[dict, int]:
    den = 1
    for c in coeffs.values():
        den = lcm(den, c.denominator)
    return {e: c.numerator * (den // c.denominator) for e, c in coeffs.items()}, den


def mul(a: Series, b: Series) -> Series:
    """Cauchy product truncated to ``min(a.order, b.order)``."""
    _check_same_ring(a, b)
    m = a.var_count
    order = min(a.order, b.order)
    if not a._coeffs or not b._coeffs:
        return Series._make(m, order, {})
    ia, da = _integerize(a._coeffs)
    ib, db = _integerize(b._coeffs)
    buckets: list[list] = [[] for _ in range(order + 1)]
    for e, c in ib.items():
        d = sum(e)
        if d <= order:
            buckets[d].append((e, c))
    acc: dict = {}
    get = acc.get
    if m == 1:
        for (ea,), ca in ia.items():
            room = order - ea
            for d in range(room + 1):
                for (eb,), cb in buckets[d]:
                    k = ea + eb
                    acc[k] = get(k, 0) + ca * cb
        den = da * db
        out = {(k,): Fraction(v, den) for k, v in acc.items() if v}
    else:
        for ea, ca in ia.items():
            room = order - sum(ea)
            for d in range(room + 1):
                for eb, cb in buckets[d]:
                    k = tuple(x + y for x, y in zip(ea, eb))
                    acc[k] = get(k, 0) + ca * cb
        den = da * db
        out = {k: Fraction(v, den) for k, v in acc.items() if v}
    return Series._make(m, order, out)


def diff(a: Series, j: int) -> Series:
    """Partial derivative with respect to ``y_j`` (1-based)."""
    if not 1 <= j <= a.var_count:
        raise ValueError(f"variable index {j} outside 1..{a.var_count}")
    if a.order == 0:
        raise ValueError("cannot differentiate a series truncated at order 0")
    i = j - 1
    out = {}
    for e, c in a._coeffs.items():
        k = e[i]
        if k:
            ne = e[:i] + (k - 1,) + e[i + 1 :]
            out[ne] = c * k
    return Series._make(a.var_count, a.order - 1, out)


def compose(f: Series, gs: Sequence[Series]) -> Series:
    """Substitute ``y_i -> gs[i]`` into ``f``.

    Every ``gs[i]`` must vanish at the origin; the result is exact up to the
    smallest order involved.
    """
    gs = tuple(gs)
    if len(gs) != f.var_count:
        raise ValueError(f"need {f.var_count} substitutions, got {len(gs)}")
    k = gs[0].var_count
    for g in gs:
        if g.var_count != k:
            raise ValueError("substituted series must share a variable count")
        if g.constant_term() != 0:
            raise ValueError("substituted series must have zero constant term")
    order = min([f.order] + [g.order for g in gs])
    gs = tuple(g.truncate(order) for g in gs)

    cache: dict[tuple, Series] = {(0,) * f.var_count: Series.constant(1, k, order)}

    def power(exp: tuple) -> Series:
        hit = cache.get(exp)
        if hit is not None:
            return hit
        i = max(idx for idx, e in enumerate(exp) if e)
        prev = exp[:i] + (exp[i] - 1,) + exp[i + 1 :]
        val = mul(power(prev), gs[i])
        cache[exp] = val
        return val

    acc: dict = {}
    for exp, c in sorted(f._coeffs.items(), key=lambda kv: grlex_key(kv[0])):
        if sum(exp) > order:
            continue
        for e, v in power(exp)._coeffs.items():
            acc[e] = acc.get(e, 0) + c * v
    return Series._make(k, order, {e: v for e, v in acc.items() if v})


def reciprocal(s: Series) -> Series:
    """Multiplicative inverse of a series with nonzero constant term."""
    c0 = s.constant_term()
    if c0 == 0:
        raise ZeroDivisionError("series with zero constant term has no reciprocal")
    m, order = s.var_count, s.order
    x = Series.constant(1 / c0, m, order)
    prec = 0
    while prec < order:
        prec = min(2 * prec + 1, order)
        xs = _lift(x, prec)
        x = xs * (2 - s.truncate(prec) * xs)
    return x


class SeriesMap:
    """A square map germ ``(G_1, ..., G_m)`` of series in ``m`` variables."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Series]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a series map needs at least one component")
        m = comps[0].var_count
        if any(c.var_count != m for c in comps):
            raise ValueError("components must share a variable count")
        if len(comps) != m:
            raise ValueError(f"map has {len(comps)} components in {m} variables; must be square")
        order = min(c.order for c in comps)
        self.components = tuple(c.truncate(order) for c in comps)

    @classmethod
    def identity(cls, m: int, order: int) -> "SeriesMap":
        return cls(Series.variable(j, m, order) for j in range(1, m + 1))

    @property
    def var_count(self) -> int:
        return self.components[0].var_count

    @property
    def order(self) -> int:
        return self.components[0].order

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        if not isinstance(other, SeriesMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"SeriesMap({', '.join(c.to_text() for c in self.components)})"

    def truncate(self, order: int) -> "SeriesMap":
        return SeriesMap(c.truncate(order) for c in self.components)

    def jacobian_at_zero(self) -> list[list[Fraction]]:
        return [c.linear_part() for c in self.components]

    def jacobian(self) -> list[list[Series]]:
        m = self.var_count
        return [[c.diff(j) for j in range(1, m + 1)] for c in self.components]


def compose_map(outer: SeriesMap, inner: SeriesMap) -> SeriesMap:
    return SeriesMap(compose(c, inner.components) for c in outer.components)


def _mat_mul(a, b):
    n, k, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def _mat_vec(a, v):
    out = []
    for row in a:
        acc = row[0] * v[0]
        for t in range(1, len(v)):
            acc = acc + row[t] * v[t]
        out.append(acc)
    return out


def invert_map(G: SeriesMap) -> SeriesMap:
    """Compositional inverse of a map germ fixing the origin.

    The linear part is inverted exactly, then Newton's iteration
    ``H <- H - J_G(H)^{-1} (G(H) - y)`` doubles the number of correct degrees
    per step.  The inverse Jacobian is itself refined by one Newton step per
    round, which keeps it exactly as accurate as the correction needs.
    """
    m, N = G.var_count, G.order
    for c in G.components:
        if c.constant_term() != 0:
            raise ValueError("map must fix the origin (zero constant terms)")
    try:
        lin_inv = matrix_inverse(G.jacobian_at_zero())
    except SingularMatrixError:
        raise SingularMatrixError("Jacobian at the origin is singular") from None

    ys = [Series.variable(j, m, N) for j in range(1, m + 1)]
    H = [sum((ys[k].scale(lin_inv[i][k]) for k in range(m)), Series.zero(m, N)) for i in range(m)]
    if N <= 1:
        return SeriesMap(H)

    JG = G.jacobian()
    # X approximates J_G(H)^{-1}; it only ever needs degree new - prec - 1.
    X = [[Series.constant(lin_inv[i][k], m, 0) for k in range(m)] for i in range(m)]
    prec = 1
    while prec < N:
        new = min(2 * prec + 1, N)
        q = new - prec - 1
        Hq = [h.truncate(q) for h in H]
        J = [[compose(JG[i][k].truncate(q), Hq) for k in range(m)] for i in range(m)]
        Xq = [[_lift(x, q) for x in row] for row in X]
        JX = _mat_mul(J, Xq)
        refine = [[Series.constant(2 if i == k else 0, m, q) - JX[i][k] for k in range(m)]
                  for i in range(m)]
        X = _mat_mul(Xq, refine)

        Hn = [_lift(h, new) for h in H]
        residual = [compose(G.components[i].truncate(new), Hn) - ys[i].truncate(new)
                    for i in range(m)]
        correction = _mat_vec([[_lift(x, new) for x in row] for row in X], residual)
        H = [Hn[i] - correction[i] for i in range(m)]
        prec = new
    return SeriesMap(H)


def _lift(s: Series, order: int) -> Series:
    """Reinterpret ``s`` at a higher truncation order (coefficients unchanged).

    Only sound where the caller knows the missing degrees do not matter.
    """
    if order <= s.order:
        return s.truncate(order)
    return Series._make(s.var_count, order, dict(s._coeffs))


def lagrange_revert(g: Series, N: int | None = None) -> Series:
    """Univariate compositional inverse by Lagrange's coefficient formula.

    ``[y^n] g^{-1} = (1/n) [y^{n-1}] (y / g(y))^n``.  Kept independent of
    :func:`invert_map` so the two can check each other.
    """
    if g.var_count != 1:
        raise ValueError("lagrange_revert is univariate")
    if N is None:
        N = g.order
    if g.order < N:
        raise ValueError(f"need g to order {N}, have {g.order}")
    if g[0] != 0:
        raise ValueError("g must vanish at 0")
    if g[1] == 0:
        raise ValueError("g'(0) = 0: not locally invertible")
    if N == 0:
        return Series.zero(1, 0)
    # y / g(y), truncated at degree N - 1
    shifted = Series(1, N - 1, {(k - 1,): c for (k,), c in g.coeffs.items() if 1 <= k <= N})
    w = reciprocal(shifted)
    out = {}
    power = Series.constant(1, 1, N - 1)
    for n in range(1, N + 1):
        power = power * w
        c = power[n - 1] / n
        if c:
            out[(n,)] = c
    return Series(1, N, out)
