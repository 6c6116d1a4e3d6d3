from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mapgerms.contour import Window, singular_set_trace
from mapgerms.jets import EXACT, Jet
from mapgerms.recognition import (
    KernelField,
    MapGerm,
    Tag,
    classify,
    classify_corank1,
    classify_corank2_2jet,
    corank,
    criteria_report,
    jacobian_jet,
    kernel_field,
    random_diffeo,
)
from mapgerms.strata import UnfoldingId
from mapgerms.strata.unfoldings import unfolding_map

G = MapGerm.parse


def jet(text, order=8):
    return G(f"({text}, 0*x)").f1.truncate(order)


# -- corank, lambda, eta ------------------------------------------------------------

@pytest.mark.parametrize("text,r", [("(x, y^2)", 1), ("(x^2+y^3, x*y)", 2), ("(x, y)", 0)])
def test_corank(text, r):
    assert corank(G(text)) == r


def test_jacobian_examples():
    assert jacobian_jet(G("(x, y^2)")) == jet("2*y")
    assert jacobian_jet(G("(x^2+y^3, x*y)")) == jet("2*x^2 - 3*y^3")


def test_jacobian_of_i23_unfolding_matches_symbolic_determinant():
    a, b, c = Fraction(1, 3), Fraction(-2, 7), Fraction(5, 4)
    f = MapGerm(*unfolding_map(UnfoldingId.I23, (a, b, c)))
    X, Y = sp.symbols("x y")
    A, B, C = map(sp.Rational, (str(a), str(b), str(c)))
    M = sp.Matrix([X ** 2 + Y ** 3 + A * X + B * Y + C * Y ** 2, X * Y]).jacobian([X, Y])
    expected = sp.expand(M.det())
    assert sp.expand(expected - (X * (2 * X + A) - Y * (3 * Y ** 2 + 2 * C * Y + B))) == 0
    got = sum(sp.Rational(str(v)) * X ** i * Y ** j for (i, j), v in jacobian_jet(f).terms().items())
    assert sp.expand(got - expected) == 0


def test_kernel_field_examples():
    eta = kernel_field(G("(x, y^2)"))
    assert eta.at_origin() == (0, 1)
    a, b, c = Fraction(1, 2), Fraction(1, 3), Fraction(2)
    f = MapGerm(*unfolding_map(UnfoldingId.I23, (a, b, c)))
    eta = kernel_field(f)
    x, y = Jet.variables(eta.eta1.order)
    assert eta.eta1 == -(3 * y * y + 2 * c * y + b)
    assert eta.eta2 == 2 * x + a
    eta = kernel_field(MapGerm(*unfolding_map(UnfoldingId.I23, (0, 0, c))))
    x, y = Jet.variables(eta.eta1.order)
    assert (eta.eta1, eta.eta2) == (-x, y)


def test_kernel_field_spans_kernel_on_singular_set():
    f = MapGerm(*unfolding_map(UnfoldingId.I23, (0.1, -0.05, 0.3))).to_float()
    eta = kernel_field(f)
    ls = singular_set_trace(f, Window(-0.5, 0.5, -0.5, 0.5, 128))
    pts = np.vstack(ls.polylines)
    pts = pts[np.linspace(0, len(pts) - 1, 100).astype(int)]
    for x0, y0 in pts:
        e = np.array([eta.eta1.evaluate(x0, y0), eta.eta2.evaluate(x0, y0)])
        J = np.array([[f.f1.dx().evaluate(x0, y0), f.f1.dy().evaluate(x0, y0)],
                      [f.f2.dx().evaluate(x0, y0), f.f2.dy().evaluate(x0, y0)]])
        assert np.linalg.norm(J @ e) < 1e-9 * max(1.0, np.abs(J).max() * np.linalg.norm(e))


# -- criteria -----------------------------------------------------------------

def test_goose_report():
    rep = criteria_report(G("(x, y^3+x^3*y)"))
    assert rep.dlambda0 == (0, 0)
    assert rep.hess_rank == 1
    assert rep.eta_tower[1] == 6
    assert rep.theta3lambda0 != 0


def test_fold_report():
    assert criteria_report(G("(x, y^2)")).eta_tower[0] == 2


def test_cusp_report():
    rep = criteria_report(G("(x, x*y+y^3)"))
    assert rep.eta_tower[0] == 0 and rep.eta_tower[1] == 6
    assert rep.dlambda0 != (0, 0)


def test_report_requires_corank_one():
    with pytest.raises(ValueError):
        criteria_report(G("(x, y)"))


def test_report_json_is_serializable():
    import json
    json.dumps(criteria_report(G("(x, y^3 - x^2*y)")).to_json())


# -- classification ---------------------------------------------------------------

@pytest.mark.parametrize("text,tag", [
    ("(x, y^2)", Tag.FOLD),
    ("(x, x*y + y^3)", Tag.CUSP),
    ("(x, x*y + y^4)", Tag.SWALLOWTAIL),
    ("(x, y^3 + x^2*y)", Tag.LIPS),
    ("(x, y^3 - x^2*y)", Tag.BEAKS),
    ("(x, x*y + y^5 + y^7)", Tag.BUTTERFLY),
    ("(x, x*y^2 + y^4 + y^5)", Tag.GULLS),
    ("(x, y^3 + x^3*y)", Tag.GOOSE),
])
def test_corank1_normal_forms(text, tag):
    assert classify_corank1(G(text)).tag is tag


def test_lips_beaks_hessian_sign():
    assert criteria_report(G("(x, y^3 + x^2*y)")).hess_det > 0
    assert criteria_report(G("(x, y^3 - x^2*y)")).hess_det < 0


def test_unresolved_when_everything_vanishes():
    c = classify_corank1(G("(x, x*y^2 + y^9)"))
    assert c.tag is Tag.UNRESOLVED and c.reason


@pytest.mark.parametrize("text,tag", [
    ("(x^2+y^3, y^2+x^3)", Tag.SHARKSFIN),
    ("(x^2-y^2+x^3, x*y)", Tag.DELTOID_TWO_JET),
    ("(x^2+y^3, x*y)", Tag.I23_CANDIDATE),
    ("(x^2+y^5, y^2+x^3)", Tag.ODD_SHARKSFIN),
    ("(x^2+y^4, y^2+x^3)", Tag.HYPERBOLIC_PAIR_DEGENERATE),
    ("(x^3, y^3)", Tag.UNRESOLVED),
])
def test_corank2_two_jet(text, tag):
    assert classify_corank2_2jet(G(text)).tag is tag


def test_corank2_requires_corank_two():
    with pytest.raises(ValueError):
        classify_corank2_2jet(G("(x, y^2)"))


def test_classify_dispatch():
    assert classify(G("(x, y)")).tag is Tag.REGULAR
    assert classify(G("(x, y^2)")).tag is Tag.FOLD
    assert classify(G("(x^2+y^3, x*y)")).tag is Tag.I23_CANDIDATE


def test_germ_json_round_trip():
    f = G("(x + 1/2*y^2, x*y - 3*y^5)")
    assert MapGerm.from_json(f.to_json()) == f


# -- properties ------------------------------------------------------------------

CORANK1 = ["(x, y^2)", "(x, x*y + y^3)", "(x, x*y + y^4)", "(x, y^3 + x^2*y)", "(x, y^3 - x^2*y)",
           "(x, x*y + y^5 + y^7)", "(x, x*y^2 + y^4 + y^5)", "(x, y^3 + x^3*y)"]
CORANK2 = ["(x^2+y^3, y^2+x^3)", "(x^2-y^2+x^3, x*y)", "(x^2+y^3, x*y)", "(x^2+y^5, y^2+x^3)"]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CORANK1 + CORANK2), st.integers(0, 2 ** 32 - 1))
def test_a_invariance_exact(text, seed):
    rng = np.random.default_rng(seed)
    f = G(text)
    g = f.conjugate(random_diffeo(rng), random_diffeo(rng))
    c0, c1 = classify(f), classify(g)
    if c0.resolved and c1.resolved:
        assert c0.tag is c1.tag


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CORANK1), st.integers(0, 2 ** 32 - 1))
def test_eta_gauge_invariance(text, seed):
    rng = np.random.default_rng(seed)
    f = G(text)
    eta = kernel_field(f)
    n = eta.eta1.order
    u = Jet.from_terms({(i, j): Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
                        for i in range(3) for j in range(3 - i)}, n, EXACT)
    if u[0, 0] == 0:
        u = u + 1
    scaled = KernelField(eta.eta1 * u, eta.eta2 * u)
    lam = jacobian_jet(f)
    g0 = g1 = lam
    # eta^k lambda(0) rescales by u(0)^k as long as the lower entries vanish
    for k in range(1, 5):
        g0, g1 = eta.apply(g0), scaled.apply(g1)
        assert g1[0, 0] == g0[0, 0] * u[0, 0] ** k
        if g0[0, 0] != 0:
            break


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(-3, 3, max_denominator=4), min_size=8, max_size=8))
def test_corank_zero_iff_regular(cs):
    a, b, c, d, e1, e2, e3, e4 = cs
    f = MapGerm(Jet.from_terms({(1, 0): a, (0, 1): b, (2, 0): e1, (1, 2): e2}, 9, EXACT),
                Jet.from_terms({(1, 0): c, (0, 1): d, (0, 3): e3, (3, 1): e4}, 9, EXACT))
    assert (corank(f) == 0) == (classify(f).tag is Tag.REGULAR)
