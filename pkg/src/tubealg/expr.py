"""Textual defining functions: parsing, printing and exact Taylor expansion.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | power
    power  := atom ("^" INT)?
    atom   := NUMBER | "y1".."y9" | FUNC "(" expr ")" | "(" expr ")"
    NUMBER := INT | INT "/" INT

``FUNC`` is one of the names in :data:`ELEMENTARY`.  There is no division
operator; ``p/q`` is only a rational literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Union

from .series import Series, compose

__all__ = [
    "Num", "Var", "Neg", "Sum", "Product", "Pow", "Call", "Expr",
    "ParseError", "TaylorError", "ELEMENTARY",
    "parse", "to_text", "taylor", "symbolic_partial", "elementary_series",
]


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Sum, Product, Pow, Call]


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class TaylorError(ValueError):
    pass


# -- elementary Taylor coefficients ------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    if n == 0:
        return Fraction(1)
    return -sum(comb(n + 1, k) * _bernoulli(k) for k in range(n)) / (n + 1)


def _sin(k):
    return Fraction((-1) ** ((k - 1) // 2), factorial(k)) if k % 2 else Fraction(0)


def _cos(k):
    return Fraction(0) if k % 2 else Fraction((-1) ** (k // 2), factorial(k))


def _sinh(k):
    return Fraction(1, factorial(k)) if k % 2 else Fraction(0)


def _cosh(k):
    return Fraction(0) if k % 2 else Fraction(1, factorial(k))


def _exp(k):
    return Fraction(1, factorial(k))


def _tan(k):
    if k % 2 == 0:
        return Fraction(0)
    n = (k + 1) // 2
    return (-1) ** (n - 1) * 4**n * (4**n - 1) * _bernoulli(2 * n) / factorial(2 * n)


def _atan(k):
    return Fraction((-1) ** ((k - 1) // 2), k) if k % 2 else Fraction(0)


def _log1p(k):
    return Fraction((-1) ** (k + 1), k) if k else Fraction(0)


# coefficient of x^k in the expansion at 0
ELEMENTARY: dict[str, Callable[[int], Fraction]] = {
    "sin": _sin,
    "cos": _cos,
    "sinh": _sinh,
    "cosh": _cosh,
    "exp": _exp,
    "tan": _tan,
    "atan": _atan,
    "log1p": _log1p,
}


@lru_cache(maxsize=256)
def elementary_series(name: str, order: int) -> Series:
    rule = ELEMENTARY[name]
    return Series(1, order, {(k,): rule(k) for k in range(order + 1)})


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\s*/\s*\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()/]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                             len(text) - len(text[pos:].lstrip()))
        kind = mt.lastgroup
        start = mt.start(kind)
        tokens.append((kind, mt.group(kind), start))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


_VAR = re.compile(r"y([1-9])$")


class _Parser:
    def __init__(self, text: str, var_count: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.var_count = var_count

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            if val == "/":
                raise ParseError("division is not supported; use p/q literals", pos)
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.unary())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take()
        kind, val, pos = self.take()
        if kind != "num" or "/" in val:
            raise ParseError("exponent must be a nonnegative integer literal", pos)
        if self.peek()[1] == "^":
            raise ParseError("chained powers are ambiguous; add parentheses", self.peek()[2])
        return Pow(base, int(val))

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            if "/" in val:
                p, q = (int(x) for x in val.split("/"))
                if q == 0:
                    raise ParseError("zero denominator", pos)
                return Num(Fraction(p, q))
            return Num(Fraction(int(val)))
        if kind == "name":
            mv = _VAR.match(val)
            if mv:
                j = int(mv.group(1))
                if self.var_count is not None and j > self.var_count:
                    raise ParseError(
                        f"variable {val} exceeds the declared {self.var_count} variable(s)", pos)
                return Var(j)
            if val not in ELEMENTARY:
                raise ParseError(f"unknown function or variable {val!r}", pos)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(val, arg)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse(text: str, var_count: int | None = None) -> Expr:
    """Parse ``text``; with ``var_count`` given, reject ``y_j`` for j > var_count."""
    return _Parser(text, var_count).parse()


# -- printing -----------------------------------------------------------------

def _num_text(v: Fraction) -> str:
    s = str(v)
    return f"({s})" if v < 0 else s


def to_text(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_text(e)) == e``."""
    return _at_sum(e)


def _at_sum(e: Expr) -> str:
    if isinstance(e, Sum):
        out = _at_term(e.terms[0])
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                out += " - " + _at_term(t.arg)
            else:
                out += " + " + _at_term(t)
        return out
    return _at_term(e)


def _at_term(e: Expr) -> str:
    if isinstance(e, Product):
        return "*".join(_at_unary(f) for f in e.factors)
    if isinstance(e, Sum):
        return f"({_at_sum(e)})"
    return _at_unary(e)


def _at_unary(e: Expr) -> str:
    if isinstance(e, Neg):
        return "-" + _at_unary(e.arg)
    if isinstance(e, Pow):
        base = e.base
        if isinstance(base, Num) and base.value.denominator != 1:
            return f"({base.value})^{e.exponent}"
        return f"{_at_atom(base)}^{e.exponent}"
    return _at_atom(e)


def _at_atom(e: Expr) -> str:
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return f"y{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({_at_sum(e.arg)})"
    return f"({_at_sum(e)})"


# -- expansion ----------------------------------------------------------------

def taylor(e: Expr | str, m: int, N: int) -> Series:
    """Exact Taylor expansion of ``e`` at the origin, truncated at degree ``N``."""
    if N < 0:
        raise TaylorError("order must be nonnegative")
    if isinstance(e, str):
        e = parse(e, m)
    return _taylor(e, m, N)


def _taylor(e: Expr, m: int, N: int) -> Series:
    if isinstance(e, Num):
        return Series.constant(e.value, m, N)
    if isinstance(e, Var):
        if not 1 <= e.index <= m:
            raise TaylorError(f"variable y{e.index} outside y1..y{m}")
        return Series.variable(e.index, m, N)
    if isinstance(e, Neg):
        return -_taylor(e.arg, m, N)
    if isinstance(e, Sum):
        acc = _taylor(e.terms[0], m, N)
        for t in e.terms[1:]:
            acc = acc + _taylor(t, m, N)
        return acc
    if isinstance(e, Product):
        acc = _taylor(e.factors[0], m, N)
        for f in e.factors[1:]:
            if acc.is_zero():
                break
            acc = acc * _taylor(f, m, N)
        return acc
    if isinstance(e, Pow):
        return _taylor(e.base, m, N) ** e.exponent
    if isinstance(e, Call):
        inner = _taylor(e.arg, m, N)
        if inner.constant_term() != 0:
            raise TaylorError(
                f"argument of {e.name} must vanish at the origin "
                f"(constant term {inner.constant_term()}); coefficients would not be rational")
        return compose(elementary_series(e.name, N), (inner,))
    raise TypeError(f"not an expression node: {e!r}")


# -- symbolic differentiation ---------------------------------------------------

_ZERO = Num(Fraction(0))
_ONE = Num(Fraction(1))


def _outer_derivative(name: str, u: Expr) -> Expr:
    if name == "sin":
        return Call("cos", u)
    if name == "cos":
        return Neg(Call("sin", u))
    if name == "sinh":
        return Call("cosh", u)
    if name == "cosh":
        return Call("sinh", u)
    if name == "exp":
        return Call("exp", u)
    if name == "tan":
        return Sum((_ONE, Pow(Call("tan", u), 2)))
    # 1/(1+w) = exp(-log1p(w)) keeps us inside the division-free grammar
    if name == "atan":
        return Call("exp", Neg(Call("log1p", Pow(u, 2))))
    if name == "log1p":
        return Call("exp", Neg(Call("log1p", u)))
    raise KeyError(name)


def symbolic_partial(e: Expr, j: int) -> Expr:
    """Unsimplified partial derivative of ``e`` with respect to ``y_j``."""
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.index == j else _ZERO
    if isinstance(e, Neg):
        return Neg(symbolic_partial(e.arg, j))
    if isinstance(e, Sum):
        return Sum(tuple(symbolic_partial(t, j) for t in e.terms))
    if isinstance(e, Product):
        fs = e.factors
        terms = []
        for i in range(len(fs)):
            terms.append(Product(fs[:i] + (symbolic_partial(fs[i], j),) + fs[i + 1:]))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return _ZERO
        return Product((Num(Fraction(e.exponent)), Pow(e.base, e.exponent - 1),
                        symbolic_partial(e.base, j)))
    if isinstance(e, Call):
        return Product((_outer_derivative(e.name, e.arg), symbolic_partial(e.arg, j)))
    raise TypeError(f"not an expression node: {e!r}")
