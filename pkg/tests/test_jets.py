from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mapgerms.jets import EXACT, FLOAT, Jet, KindMismatch
from mapgerms.parse import GermSyntaxError, parse_polynomial

x, y = Jet.variables(6)
X, Y = sp.symbols("x y")


def P(text, order=6):
    return parse_polynomial(text, order)


def to_sympy(j: Jet):
    return sum((sp.Rational(str(v)) * X ** i * Y ** k for (i, k), v in j.terms().items()), sp.Integer(0))


# -- examples ------------------------------------------------------------------

def test_mul_monomials():
    assert x * y == P("x*y")


def test_add_zero_is_identity():
    j = P("1 + x - 3/2*x*y^2")
    assert j + Jet.zero(6) == j


def test_difference_of_squares_at_order_2():
    x2, _ = Jet.variables(2)
    assert (1 + x2) * (1 - x2) == parse_polynomial("1 - x^2", 2)


def test_compose_binomial():
    assert P("x^2").compose(x + y, y) == P("x^2 + 2*x*y + y^2")


def test_compose_identity():
    f = P("x^3 - 2*x*y + 5/7*y^4")
    assert f.compose(x, y) == f


def test_compose_swap_matches_sympy():
    f = P("x^2 + y^3")
    got = to_sympy(f.compose(y, x))
    assert sp.expand(got - (X ** 2 + Y ** 3).subs({X: Y, Y: X}, simultaneous=True)) == 0


def test_compose_rejects_constant_terms():
    with pytest.raises(ValueError):
        P("x^2").compose(1 + x, y)


@pytest.mark.parametrize("text,var,expected", [
    ("x^2*y", "x", "2*x*y"),
    ("7", "y", "0"),
])
def test_partial(text, var, expected):
    assert P(text).partial(var) == P(expected, 5)


def test_second_partial():
    assert P("x^2 + y^3").dy().dy() == P("6*y", 4)


def test_partial_lowers_order():
    assert P("x").dx().order == 5


@pytest.mark.parametrize("text,pt,val", [
    ("x^2 + y^3", (1, 1), 2),
    ("x*y", (2, 3), 6),
    ("5/3 + x - y^2", (0, 0), Fraction(5, 3)),
])
def test_evaluate(text, pt, val):
    assert P(text).evaluate(*pt) == val


# -- errors and invariants ---------------------------------------------------------

def test_kind_mismatch():
    xf, _ = Jet.variables(6, FLOAT)
    with pytest.raises(KindMismatch):
        x + xf
    with pytest.raises(KindMismatch):
        x.scale(0.5)


def test_result_order_is_minimum():
    a = Jet.variables(4)[0]
    b = Jet.variables(7)[1]
    assert (a + b).order == 4
    assert (a * b).order == 4


def test_truncation_drops_high_terms():
    j = (x + y) ** 9
    assert j.order == 6 and j.is_zero()
    assert all(i + k <= 6 for i, k in ((x + 1) ** 9).terms())


def test_json_round_trip():
    for j in (P("1/3*x^2 - 4*x*y^5 + 2"), P("x").to_float() * 0.125):
        assert Jet.from_json(j.to_json()) == j


def test_parser_rejects_implicit_multiplication():
    with pytest.raises(GermSyntaxError):
        parse_polynomial("2x + y")


def test_decimal_literals_are_exact():
    assert parse_polynomial("0.1*x", 3)[1, 0] == Fraction(1, 10)


# -- properties -------------------------------------------------------------------

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def jets(draw, order=5, const=True):
    terms = {}
    for i in range(order + 1):
        for k in range(order + 1 - i):
            if (i, k) == (0, 0) and not const:
                continue
            if draw(st.booleans()):
                terms[(i, k)] = draw(rationals)
    return Jet.from_terms(terms, order, EXACT)


@settings(max_examples=40, deadline=None)
@given(jets(), jets())
def test_leibniz(a, b):
    for v in ("x", "y"):
        assert (a * b).partial(v) == a.partial(v) * b + a * b.partial(v)


@settings(max_examples=25, deadline=None)
@given(jets(4), jets(4, const=False), jets(4, const=False), jets(4, const=False), jets(4, const=False))
def test_compose_associative(f, g1, g2, h1, h2):
    lhs = f.compose(g1, g2).compose(h1, h2)
    rhs = f.compose(g1.compose(h1, h2), g2.compose(h1, h2))
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_evaluate_is_ring_morphism(seed):
    rng = np.random.default_rng(seed)
    order = 6

    def rand():
        return Jet.from_terms({(i, k): rng.uniform(-1, 1) for i in range(order + 1)
                               for k in range(order + 1 - i)}, order, FLOAT)

    a, b = rand(), rand()
    p = rng.uniform(-1, 1, 2)
    # the product is truncated, so compare on the truncated product of the values
    full = (a * b).evaluate(*p)
    ref = sum(a[i, k] * b[m, n] * p[0] ** (i + m) * p[1] ** (k + n)
              for (i, k) in a.terms() for (m, n) in b.terms() if i + k + m + n <= order)
    assert full == pytest.approx(ref, rel=1e-12, abs=1e-12)
    # on untruncated products evaluation is multiplicative
    a1 = a.truncate(3).with_order(order)
    b1 = b.truncate(3).with_order(order)
    assert (a1 * b1).evaluate(*p) == pytest.approx(a1.evaluate(*p) * b1.evaluate(*p), rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(jets())
def test_exact_float_agree(a):
    p = (Fraction(1, 3), Fraction(-2, 5))
    assert float(a.evaluate(*p)) == pytest.approx(a.to_float().evaluate(float(p[0]), float(p[1])), abs=1e-12)
