from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from tubealg.algdep import (Found, NoneUpTo, Polynomial, UnderdeterminedError, enumerate_monomials,
                            guess_relation, minimum_order, monomial_count, result_from_dict,
                            validate_relation)
from tubealg.expr import taylor
from tubealg.series import Series

# algebraic germs written in the division- and root-free grammar
SQRT = "exp(1/2*log1p(y1))"
CUBE_ROOT = "exp(1/3*log1p(y1))"
GEOMETRIC = "exp(-log1p(-y1))"


def poly(text_terms, m=1):
    """Build a polynomial from {(a..., b): coeff}."""
    return Polynomial(m + 1, text_terms)


# -- enumerate_monomials ---------------------------------------------------------

def test_enumerate_univariate():
    assert enumerate_monomials(1, 2) == [(0,), (1,), (2,)]


def test_enumerate_two_vars_degree_one():
    assert enumerate_monomials(2, 1) == [(0, 0), (1, 0), (0, 1)]


def test_enumerate_count():
    assert len(enumerate_monomials(2, 3)) == 10 == monomial_count(2, 3)


@given(st.integers(1, 4), st.integers(0, 5))
def test_enumerate_is_graded_and_complete(k, D):
    mons = enumerate_monomials(k, D)
    assert len(mons) == len(set(mons)) == monomial_count(k, D)
    degrees = [sum(e) for e in mons]
    assert degrees == sorted(degrees)


# -- guess_relation examples ---------------------------------------------------------

def test_square_root():
    r = guess_relation(taylor(SQRT, 1, 20), 2, 20)
    assert r == Found(poly({(0, 2): 1, (1, 0): -1, (0, 0): -1}), 20)
    assert r.polynomial.to_text() == "T^2 - y1 - 1"


def test_exponential_has_no_relation():
    assert guess_relation(taylor("exp(y1)", 1, 40), 4, 40) == NoneUpTo(4, 40)


def test_constant_graph():
    # C(3, 2) = 3 unknowns; margin 7 makes order 10 admissible
    r = guess_relation(Series.constant(2, 1, 10), 1, 10, margin=7)
    assert r.found and r.polynomial.to_text() == "T - 2"


def test_underdetermined_refused():
    with pytest.raises(UnderdeterminedError):
        guess_relation(Series.constant(2, 1, 10), 1, 10)


def test_short_series_refused():
    with pytest.raises(ValueError):
        guess_relation(taylor("exp(y1)", 1, 10), 1, 12, margin=0)


def test_bivariate_square_root():
    N = minimum_order(2, 2)
    r = guess_relation(taylor("exp(1/2*log1p(y1 + y2))", 2, N), 2, N)
    assert r.found and r.polynomial.to_text() == "T^2 - y1 - y2 - 1"


def test_found_validated_beyond_order():
    f = taylor(SQRT, 1, 30)
    r = guess_relation(f, 2, 20)
    assert r.found and r.validated_order == 30


def test_result_round_trip():
    for r in (guess_relation(taylor(SQRT, 1, 20), 2, 20), NoneUpTo(4, 40)):
        assert result_from_dict(r.to_dict()) == r


# -- validate_relation ----------------------------------------------------------

def test_validate_square_root():
    P = poly({(0, 2): 1, (1, 0): -1, (0, 0): -1})
    assert validate_relation(P, taylor(SQRT, 1, 30), 30)


def test_validate_rejects_exp():
    assert not validate_relation(poly({(0, 1): 1, (0, 0): -1}), taylor("exp(y1)", 1, 10), 10)


def test_validate_zero_series():
    assert validate_relation(poly({(0, 1): 1}), Series.zero(1, 7), 7)


def test_polynomial_must_involve_t():
    with pytest.raises(ValueError):
        poly({(1, 0): 1})


def test_normalization():
    P = poly({(0, 2): F(-1, 2), (1, 0): F(1, 2), (0, 0): F(1, 2)}).normalized()
    assert P.to_text() == "T^2 - y1 - 1"


# -- invariants -------------------------------------------------------------------

COMPLETENESS = [(SQRT, 2), (GEOMETRIC, 1), (CUBE_ROOT, 3)]


@pytest.mark.parametrize("text,t_degree", COMPLETENESS)
def test_completeness(text, t_degree):
    D = 3
    N = minimum_order(1, D)
    r = guess_relation(taylor(text, 1, N), D, N)
    assert r.found and r.polynomial.t_degree == t_degree


@pytest.mark.parametrize("text,D", [(SQRT, 2), (GEOMETRIC, 2), (CUBE_ROOT, 3),
                                    ("y1^2 + y1^3", 3)])
def test_soundness_at_higher_order(text, D):
    N = minimum_order(1, D)
    r = guess_relation(taylor(text, 1, N), D, N)
    assert r.found
    assert validate_relation(r.polynomial, taylor(text, 1, N + 10), N + 10)


SCALING_CORPUS = [SQRT, GEOMETRIC, CUBE_ROOT, "exp(y1)", "sin(y1)"]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SCALING_CORPUS),
       st.builds(F, st.integers(-5, 5).filter(bool), st.integers(1, 5)))
def test_scaling_invariance(text, c):
    D = 3
    N = minimum_order(1, D)
    f = taylor(text, 1, N)
    a, b = guess_relation(f, D, N), guess_relation(f.scale(c), D, N)
    assert a.found == b.found
    if a.found:
        assert a.polynomial.t_degree == b.polynomial.t_degree


@pytest.mark.parametrize("text", ["exp(y1)", "sin(y1^2)", "exp(exp(y1) - 1) - 1", "tan(y1)"])
def test_none_up_to_monotone(text):
    f = taylor(text, 1, 40)
    assert guess_relation(f, 4, 40) == NoneUpTo(4, 40)
    for D in range(1, 4):
        assert guess_relation(f, D, 40) == NoneUpTo(D, 40)


def test_selection_prefers_lowest_t_degree():
    # f = y satisfies T - y = 0 and also (T - y)(T + 1) = 0; the former must be chosen
    r = guess_relation(Series.variable(1, 1, 20), 2, 20)
    assert r.polynomial.to_text() == "T - y1"
