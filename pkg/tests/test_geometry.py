import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mapgerms.contour import Window
from mapgerms.geometry import (
    FRAMES,
    CausticFrame,
    CrosscapFamily,
    GeometryError,
    PlaneCurveGerm,
    SweepTooCoarse,
    X,
    Y,
    caustic_germ,
    characteristic_curves,
    contact_order,
    crosscap_regime,
    double_point_curve,
    genericity_report,
    i23_parameters,
    lagrange_caustic_section,
    perestroika_sweep,
    projection_germ,
    reduced_family,
    sign_census,
    trivial_frame_walls,
)
from mapgerms.jets import Jet
from mapgerms.recognition import MapGerm, Tag, classify, classify_corank2_2jet
from mapgerms.strata import UnfoldingId as U
from mapgerms.strata.unfoldings import unfolding_map

TYP = CrosscapFamily.typical()


def sym(j: Jet):
    return sum((sp.Rational(str(v)) * X ** i * Y ** k for (i, k), v in j.terms().items()), sp.Integer(0))


# -- projections ------------------------------------------------------------------

def test_tangent_projection_is_i23_with_swapped_components():
    f = projection_germ(TYP, 0, 0, 0)
    assert sp.expand(sym(f.f1) - X * Y) == 0
    assert sp.expand(sym(f.f2) - (X ** 2 + Y ** 3)) == 0
    assert classify_corank2_2jet(MapGerm(f.f2, f.f1)).tag is Tag.I23_CANDIDATE


@settings(max_examples=25, deadline=None)
@given(st.fractions(-1, 1, max_denominator=20), st.fractions(-1, 1, max_denominator=20),
       st.fractions(-1, 1, max_denominator=20))
def test_projection_matches_g_under_identification(v, w, t):
    # (xy - vy, x^2 + t y^2 - wy + y^3) at x -> x + v, target shift Y -> Y - v^2,
    # components swapped, is G at (2v, -w, t)
    f = projection_germ(TYP, v, w, t)
    a, b, c = i23_parameters(v, w, t)
    g1, g2 = (sym(j) for j in unfolding_map(U.I23, (a, b, c)))
    V = sp.Rational(v.numerator, v.denominator)
    p1 = sp.expand(sym(f.f1).subs(X, X + V))
    p2 = sp.expand(sym(f.f2).subs(X, X + V) - V ** 2)
    assert sp.expand(p2 - g1) == 0
    assert sp.expand(p1 - g2) == 0


@pytest.mark.parametrize("t,tag", [(F(1, 10), Tag.SHARKSFIN), (F(1, 3), Tag.SHARKSFIN),
                                   (F(-1, 10), Tag.DELTOID_TWO_JET), (F(-1, 3), Tag.DELTOID_TWO_JET)])
def test_crosscap_regime_by_sign_of_t(t, tag):
    assert crosscap_regime(TYP, t).tag is tag


@settings(max_examples=20, deadline=None)
@given(st.fractions(F(1, 1000), 1, max_denominator=1000), st.sampled_from([1, -1]))
def test_regime_property(t, sign):
    tag = crosscap_regime(TYP, sign * t).tag
    assert tag is (Tag.SHARKSFIN if sign > 0 else Tag.DELTOID_TWO_JET)


def test_family_jet_conditions():
    with pytest.raises(GeometryError):
        CrosscapFamily(g_coeffs={(1, 1, 0): 1})
    with pytest.raises(GeometryError):
        CrosscapFamily(g_coeffs={(0, 3, 0): 1})
    with pytest.raises(GeometryError):
        CrosscapFamily(alpha=(1, 1))


def test_genericity_report():
    assert genericity_report(CrosscapFamily.affine(1, F(1, 20), F(1, 20)))["verdict"] == "generic"
    assert genericity_report(CrosscapFamily.affine(0, F(1, 20)))["verdict"] == "borderline"


# -- parabolic and flecnodal curves ---------------------------------------------------

def test_typical_curves_at_zero():
    p, f = characteristic_curves(TYP, 0)
    assert sp.expand(p.expr - (X ** 2 - 3 * Y ** 3)) == 0
    assert sp.expand(f.expr - Y * (4 * X ** 2 - sp.Rational(49, 4) * Y ** 3)) == 0
    q, r = sp.div(f.expr, Y, X, Y)
    assert r == 0 and sp.expand(q - (4 * X ** 2 - sp.Rational(49, 4) * Y ** 3)) == 0
    assert sorted(str(fac) for fac, _ in f.factors()) == sorted(["y", "16*x**2 - 49*y**3"])


def test_parabolic_cusp_at_zero():
    p, _ = characteristic_curves(TYP, 0)
    # ordinary cusp: double tangent line, nonzero cubic term off it
    assert p.poly[2, 0] == 1 and p.poly[1, 1] == 0 and p.poly[0, 2] == 0 and p.poly[0, 3] != 0


@settings(max_examples=8, deadline=None)
@given(st.fractions(F(-1, 2), F(1, 2), max_denominator=30))
def test_closed_form_matches_elimination(t):
    pc, fc = characteristic_curves(TYP, t, method="closed")
    pe, fe = characteristic_curves(TYP, t, method="elimination")
    assert sp.expand(pc.expr - pe.expr) == 0
    assert sp.expand(fc.expr - fe.expr) == 0


def test_closed_forms_are_the_displayed_polynomials():
    t = F(3, 7)
    T = sp.Rational(3, 7)
    p, f = characteristic_curves(TYP, t)
    assert sp.expand(p.expr - (X ** 2 - Y ** 2 * (T + 3 * Y))) == 0
    assert sp.expand(f.expr - (X ** 2 * (T + 4 * Y) - Y ** 2 * (T + sp.Rational(7, 2) * Y) ** 2)) == 0


def test_closed_form_rejects_other_families():
    with pytest.raises(GeometryError):
        characteristic_curves(CrosscapFamily.affine(1, F(1, 10)), F(1, 10), method="closed")


def test_negative_t_parabolic_census():
    p, _ = characteristic_curves(TYP, F(-1, 10))
    census = sign_census(p, Window(-0.2, 0.2, -0.2, 0.2, 512))
    assert census.components == 1
    assert len(census.isolated_points) == 1
    assert max(abs(v) for v in census.isolated_points[0]) < 1e-9


def test_curve_germ_json_round_trip():
    p, f = characteristic_curves(TYP, F(1, 10))
    for c in (p, f):
        data = json.loads(json.dumps(c.to_json()))
        assert data["label"] == c.label
        assert Jet.from_json(data["poly"]) == c.poly


def test_curve_germ_must_pass_through_origin():
    with pytest.raises(GeometryError):
        PlaneCurveGerm.from_expr(1 + X)


# -- contact orders ----------------------------------------------------------------

def _series_oracle(t):
    # parabolic branches x = +-y sqrt(t + 3y), flecnodal x = +-y (t + 7y/2) / sqrt(t + 4y)
    s = sp.symbols("s")
    T = sp.Rational(t.numerator, t.denominator)
    par = sp.series(s * sp.sqrt(T + 3 * s), s, 0, 6).removeO()
    fle = sp.series(s * (T + sp.Rational(7, 2) * s) / sp.sqrt(T + 4 * s), s, 0, 6).removeO()
    d = sp.Poly(sp.expand(fle - par), s)
    return min(m[0] for m in d.monoms()), d.coeff_monomial(s ** 3)


@pytest.mark.parametrize("t", [F(1, 10), F(1, 20), F(1, 4)])
def test_contact_order_matches_series_oracle(t):
    k, lead = _series_oracle(t)
    assert k == 3
    T = sp.Rational(t.numerator, t.denominator)
    assert sp.simplify(lead - (sp.Rational(9, 8) - 1) * sp.sqrt(T) / T ** 2) == 0
    p, f = characteristic_curves(TYP, t)
    orders = contact_order(p, f)
    assert len(orders) == 2
    assert [o.order for o in orders] == [3, 3]
    assert not any(o.lower_bound for o in orders)


@settings(max_examples=15, deadline=None)
@given(st.fractions(F(1, 500), 1, max_denominator=500))
def test_contact_parity_is_odd(t):
    p, f = characteristic_curves(TYP, t)
    for o in contact_order(p, f):
        assert not o.lower_bound and o.order % 2 == 1


def test_contact_identical_curves_is_a_lower_bound():
    p, _ = characteristic_curves(TYP, F(1, 10))
    orders = contact_order(p, p)
    assert orders and all(o.lower_bound for o in orders)
    assert str(orders[0]).startswith(">= ")


def test_contact_line_and_parabola():
    orders = contact_order(PlaneCurveGerm.from_expr(Y), PlaneCurveGerm.from_expr(Y - X ** 2))
    assert [o.order for o in orders] == [2]


def test_contact_transverse_pairs_listed_with_all():
    orders = contact_order(PlaneCurveGerm.from_expr(Y), PlaneCurveGerm.from_expr(X), branch_pairing="all")
    assert [o.order for o in orders] == [1]
    with pytest.raises(GeometryError):
        contact_order(PlaneCurveGerm.from_expr(Y), PlaneCurveGerm.from_expr(X), branch_pairing="nearest")


def test_contact_at_zero_falls_back_to_resultant():
    p, f = characteristic_curves(TYP, 0)
    orders = contact_order(p, f)
    assert [(o.order, o.method) for o in orders] == [(8, "resultant")]


def test_double_point_curve_runs():
    d = double_point_curve(TYP, F(1, 10))
    assert d.poly[0, 0] == 0
    assert sp.expand(d.expr) != 0


# -- caustics ----------------------------------------------------------------------

def test_caustic_germ_at_origin_is_i23():
    for frame in FRAMES.values():
        g = caustic_germ(frame)
        assert classify(MapGerm(g.f2, g.f1)).tag is Tag.I23_CANDIDATE


@pytest.mark.parametrize("t1,t2", [(F(1, 10), F(-1, 5)), (F(-3, 100), F(1, 7)), (0, 0)])
def test_trivial_frame_is_g_with_swapped_components(t1, t2):
    f1, f2 = reduced_family(FRAMES["trivial"], t1, t2)
    g1, g2 = unfolding_map(U.I23, (0, t1, t2))
    assert sp.expand(sym(f2) - sym(g1)) == 0
    assert sp.expand(sym(f1) - sym(g2)) == 0


def test_perturbed_frame_solves_the_slice():
    fr = FRAMES["perturbed"]
    t1, t2 = F(1, 50), F(-1, 30)
    mu1, mu2 = reduced_family(fr, t1, t2, order=10)
    x, y = Jet.variables(10)
    q1 = t1 + mu1 * fr.a1 + mu2 * fr.a2
    q2 = t2 + mu1 * fr.b1 + mu2 * fr.b2
    resid = mu2 - (x * x + y ** 3 + q1 * y + q2 * y * y)
    assert resid.is_zero()


def test_frame_rejects_non_finite_coefficients():
    with pytest.raises(GeometryError):
        CausticFrame(float("nan"))


def test_trivial_caustic_section_matches_g():
    from mapgerms.contour import apparent_contour
    w = Window(-0.5, 0.5, -0.5, 0.5, 256)
    d = lagrange_caustic_section(FRAMES["trivial"], 0.05, 0.2, w, zoom=False)
    g = apparent_contour(unfolding_map(U.I23, (0.0, 0.05, 0.2)), w)
    assert d.counts == g.counts


def test_constant_path_gives_constant_counts():
    s = perestroika_sweep(FRAMES["trivial"], [(0.03, 0.2)], frames=4)
    assert len(set(s.counts)) == 1 and not s.crossings


def test_sweep_crossings_lie_near_sectioned_strata():
    s = perestroika_sweep(FRAMES["trivial"], [(-0.012, 0.2), (0.012, 0.2)], frames=30)
    assert [c["stratum"] for c in s.crossings] == ["cusp_fold-", "sharksfin_axis+", "cusp_fold+"]
    assert all(c["distance_frames"] <= 2 for c in s.crossings)


def test_sweep_walls_are_the_a0_curves():
    walls = trivial_frame_walls((-0.05, 0.2), (0.05, 0.2))
    pos = {lab: -0.05 + 0.1 * s for s, lab in walls}
    assert pos["beaks_lips+"] == pytest.approx(0.04 / 3)
    assert pos["cusp_fold+"] == pytest.approx(0.01)
    assert pos["cusp_fold-"] == pytest.approx(-0.008)
    assert pos["sharksfin_axis+"] == pytest.approx(0.0, abs=1e-15)


def test_sweep_too_coarse():
    with pytest.raises(SweepTooCoarse):
        perestroika_sweep(FRAMES["trivial"], [(-0.05, 0.2), (0.05, 0.2)], frames=3)


def test_sweep_crossing_only_cusp_fold():
    # one cusp+fold wall between b = 0.009 and b = 0.0115 at c = 0.2
    s = perestroika_sweep(FRAMES["trivial"], [(0.009, 0.2), (0.0115, 0.2)], frames=8)
    assert [c["stratum"] for c in s.crossings] == ["cusp_fold+"]
    before, after = s.crossings[0]["before"], s.crossings[0]["after"]
    assert before[1] == after[1]
    assert abs(before[2] - after[2]) == 1


def test_sweep_json_and_workers():
    s1 = perestroika_sweep(FRAMES["trivial"], [(-0.012, 0.2), (0.012, 0.2)], frames=6, workers=1)
    s2 = perestroika_sweep(FRAMES["trivial"], [(-0.012, 0.2), (0.012, 0.2)], frames=6, workers=2)
    assert s1.counts == s2.counts
    assert json.dumps(s1.to_json(), sort_keys=True) == json.dumps(s2.to_json(), sort_keys=True)
    assert math.isclose(s1.params[-1][0], 0.012)
    assert np.all(np.diff([p[0] for p in s1.params]) > 0)
