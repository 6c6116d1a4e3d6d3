import csv
import io
import json
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mapgerms.contour import Window, apparent_contour
from mapgerms.recognition import Tag, classify
from mapgerms.strata import (
    DomainError,
    StratumError,
    StratumId,
    StratumTag as T,
    UnfoldingId as U,
    gulls_exclusion_i23,
    implicit_residual,
    locate_and_classify,
    parametrize_stratum,
    section_curves,
    series_fit_swallowtail,
)
from mapgerms.strata.types import Surd
from mapgerms.strata.unfoldings import germ_at, unfolding_map


def point(tag, sign, *internal, u=U.I23, **kw):
    return parametrize_stratum(u, StratumId(tag, sign), tuple(internal), **kw)


# -- parametrizations ---------------------------------------------------------------

def test_beaks_lips_example():
    p = point(T.BEAKS_LIPS, 1, F(1), F(1))
    assert p.params == (8, -13, 1)
    assert implicit_residual(T.BEAKS_LIPS, p.params) == 0


def test_beaks_lips_residual_by_hand():
    # 243 a^4 + (256 c^3 - 864 b c) a^2 + 768 b^3 - 256 b^2 c^2 at (8, -13, 1)
    a, b, c = 8, -13, 1
    assert 243 * a ** 4 + (256 * c ** 3 - 864 * b * c) * a ** 2 + 768 * b ** 3 - 256 * b * b * c * c == 0
    assert implicit_residual(T.BEAKS_LIPS, (a, b, c)) == 0


def test_cusp_fold_corrected_and_printed():
    p = point(T.CUSP_FOLD, -1, F(-1), F(0))
    assert p.params == (F(-5, 2), F(-15, 4), 0)
    assert implicit_residual(T.CUSP_FOLD, p.params) == 0
    printed = point(T.CUSP_FOLD, -1, F(-1), F(0), verbatim=True)
    assert printed.params[0] == -5
    assert implicit_residual(T.CUSP_FOLD, printed.params) != 0


def test_goose_example():
    p = point(T.GOOSE, 1, F(1))
    assert p.params[1:] == (F(4, 9), 1)
    assert float(p.params[0]) == pytest.approx(8 / (9 * math.sqrt(3)), rel=1e-15)
    assert p.params[0].square() == F(64, 243)


def test_swallowtail_example():
    p = point(T.SWALLOWTAIL, 1, F(1), F(1))
    assert p.params[1:] == (-14, 1)
    assert p.params[0] == Surd(19, F(1, 5))
    assert implicit_residual(T.SWALLOWTAIL, p.params) == 0


def test_cusp_fold_residual_off_stratum():
    assert implicit_residual(T.CUSP_FOLD, (0, 0, 1)) == 1


def test_series_and_line_strata():
    assert point(T.SWALLOWTAIL, 1, F(1, 2), u=U.SHARKSFIN).params == (F(1, 256) + F(3, 32) / 512, F(1, 2))
    assert point(T.TACNODE, 1, F(-1, 2), u=U.ODD_SHARKSFIN).params == (F(1, 16), 0, F(-1, 2))


def test_domain_and_pair_errors():
    with pytest.raises(DomainError):
        point(T.BEAKS_LIPS, 1, F(1), F(-5))
    with pytest.raises(StratumError):
        point(T.GOOSE, 1, F(1), u=U.SHARKSFIN)
    with pytest.raises(StratumError):
        implicit_residual(T.GOOSE, (0, 0, 1))


@pytest.mark.parametrize("tag,y,c", [(T.SWALLOWTAIL, F(-1, 20), F(2, 5)), (T.CUSP_FOLD, F(-3, 7), F(2, 5))])
def test_parametrization_matches_sympy_oracle(tag, y, c):
    # independent evaluation of the displayed formulas, the cusp+fold one with
    # the factor 1/2; the two signs together give the pair of branches
    ys, cs = sp.Rational(y.numerator, y.denominator), sp.Rational(c.numerator, c.denominator)
    if tag is T.SWALLOWTAIL:
        a, b = ys * (4 * cs + 15 * ys) / sp.sqrt(cs + 4 * ys), -2 * ys * (2 * cs + 5 * ys)
    else:
        a, b = sp.sqrt(-ys) * (3 * cs + 5 * ys) / 2, (cs * cs - 6 * cs * ys - 15 * ys * ys) / 4
    pts = [point(tag, s, y, c).numeric() for s in (1, -1)]
    assert sorted(p[0] for p in pts) == pytest.approx(sorted((float(a), -float(a))), rel=1e-14)
    assert all(p[1] == pytest.approx(float(b), rel=1e-14) and p[2] == float(c) for p in pts)


@settings(max_examples=100, deadline=None)
@given(st.fractions(-2, 2, max_denominator=50), st.fractions(-2, 2, max_denominator=50),
       st.sampled_from([T.BEAKS_LIPS, T.SWALLOWTAIL, T.CUSP_FOLD]), st.sampled_from([1, -1]))
def test_parametric_implicit_consistency(y, c, tag, sign):
    try:
        p = point(tag, sign, y, c)
    except DomainError:
        return
    assert implicit_residual(tag, p.params) == 0


@settings(max_examples=100, deadline=None)
@given(st.fractions(F(1, 1000), 3, max_denominator=1000), st.sampled_from([1, -1]))
def test_edge_coincidences(c, sign):
    assert point(T.GOOSE, sign, c).params == point(T.BEAKS_LIPS, sign, -2 * c / 9, c).params
    assert point(T.BUTTERFLY, sign, c).params == point(T.SWALLOWTAIL, sign, -c / 5, c).params


@pytest.mark.parametrize("tag", [T.BEAKS_LIPS, T.SWALLOWTAIL])
def test_strata_reach_sharksfin_axis(tag):
    c = F(1, 2)
    dists = [math.hypot(*point(tag, 1, F(1, 10 ** k), c).numeric()[:2]) for k in range(1, 6)]
    assert all(d1 < d0 for d0, d1 in zip(dists, dists[1:]))
    assert dists[-1] < 1e-4


# -- sections ---------------------------------------------------------------------

def test_section_c_negative():
    s = section_curves(U.I23, -1.0, (-2, 2, -2, 2))
    assert s.labeled(T.BEAKS_LIPS) and s.labeled(T.SWALLOWTAIL)
    assert s.points(T.DELTOID_AXIS) == [(0.0, 0.0)]
    assert not s.points(T.GOOSE) and not s.points(T.BUTTERFLY)


def test_section_c_positive():
    s = section_curves(U.I23, 1.0)
    branches = {str(c.stratum) for c in s.curves if c.kind == "curve"}
    assert branches == {"beaks_lips+", "beaks_lips-", "swallowtail+", "swallowtail-", "cusp_fold+", "cusp_fold-"}
    assert len(s.points(T.GOOSE)) == 2 and len(s.points(T.BUTTERFLY)) == 2
    for a, b in s.points(T.GOOSE):
        assert abs(a) == pytest.approx(8 / (9 * math.sqrt(3))) and b == pytest.approx(4 / 9)


def test_section_sharksfin():
    s = section_curves(U.SHARKSFIN, 0, (-0.5, 0.5, -1, 1))
    assert {str(c.stratum) for c in s.curves} == {"beaks_lines+", "beaks_lines-", "swallowtail+", "swallowtail-"}


def test_section_export_columns_and_json():
    s = section_curves(U.I23, 1.0, resolution=32)
    rows = list(csv.DictReader(io.StringIO(s.to_csv())))
    assert {"stratum", "sign", "internal", "a", "b", "c"} <= set(rows[0])
    assert json.loads(s.to_json())["unfolding"] == "i23"
    assert s.to_csv() == section_curves(U.I23, 1.0, resolution=32).to_csv()


def test_section_rejects_bad_input():
    with pytest.raises(StratumError):
        section_curves(U.I23, 1.0, resolution=8)
    with pytest.raises(ValueError):
        section_curves(U.I23, 1.0, (1, -1, 0, 1))


# -- recognition on strata ------------------------------------------------------------

@pytest.mark.parametrize("y,expected", [(F(-3, 10), "lips"), (F(-1, 10), "beaks"), (F(1, 10), "beaks")])
def test_beaks_lips_split_at_goose(y, expected):
    r = locate_and_classify(U.I23, seed=point(T.BEAKS_LIPS, 1, y, F(1)))
    assert r.found == expected and r.matches


def test_butterfly_point():
    r = locate_and_classify(U.I23, seed=point(T.BUTTERFLY, 1, F(1, 2)))
    assert r.found == "butterfly" and r.matches


def test_cusp_fold_witness():
    r = locate_and_classify(U.I23, seed=point(T.CUSP_FOLD, 1, F(-3, 10), F(1)))
    assert r.matches and r.residual < 1e-10
    w = r.result
    assert w.Y == pytest.approx(-(1 - 0.9) / 2, abs=1e-9)


def test_gulls_excluded_for_i23():
    rep = gulls_exclusion_i23()
    assert rep["excluded"]


def test_gulls_detected_on_odd_sharksfin():
    r = locate_and_classify(U.ODD_SHARKSFIN, seed=point(T.GULLS, 1, F(1, 5), u=U.ODD_SHARKSFIN))
    assert r.found == "gulls" and r.matches


def test_random_recognition_round_trip():
    rng = random.Random(1)
    for tag in (T.BEAKS_LIPS, T.SWALLOWTAIL):
        for _ in range(10):
            c = F(rng.randint(200, 1000), 1000)
            y = F(rng.randint(100, 500), 1000) * rng.choice((1, -1)) * c
            if tag is T.BEAKS_LIPS and abs(y + 2 * c / 9) < c / 20 or tag is T.SWALLOWTAIL and abs(y + c / 5) < c / 20:
                continue
            try:
                p = point(tag, rng.choice((1, -1)), y, c)
            except DomainError:
                continue
            assert locate_and_classify(U.I23, seed=p).matches


def test_no_extra_strata_off_the_diagram():
    """Generic parameters: cusp points classify as cusps, other singular
    points as folds."""
    rng = np.random.default_rng(3)
    for _ in range(3):
        a, b, c = rng.uniform(-0.2, 0.2, 3)
        d = apparent_contour(unfolding_map(U.I23, (a, b, c)), Window(-0.6, 0.6, -0.6, 0.6, 256))
        for s, _ in d.cusps:
            assert classify(germ_at(U.I23, (a, b, c), s)).tag in (Tag.CUSP,)
        for pl in d.singular_polylines:
            for k in np.linspace(0, len(pl) - 1, 7).astype(int)[1:-1]:
                q = pl[k]
                if all(math.dist(q, s) > 0.05 for s, _ in d.cusps):
                    assert classify(germ_at(U.I23, (a, b, c), q)).tag is Tag.FOLD


# -- series -----------------------------------------------------------------------

def test_sharksfin_series():
    co = series_fit_swallowtail(U.SHARKSFIN).coefficients
    assert co[4] == pytest.approx(1 / 16, rel=1e-3)
    assert co[9] == pytest.approx(3 / 32, rel=0.05)
    assert max(abs(v) for v in co[5:9]) < 1e-4


def test_odd_sharksfin_contact_with_a_plane():
    fit = series_fit_swallowtail(U.ODD_SHARKSFIN, c=0.0)
    assert round(fit.contact_orders["a_branch_in_c"]) == 3


def test_series_fit_rejects_i23():
    with pytest.raises(StratumError):
        series_fit_swallowtail(U.I23)
