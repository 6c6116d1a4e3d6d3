import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapgerms.contour import (
    ContourError,
    NearStratumError,
    PlaneMap,
    Window,
    apparent_contour,
    contour_features,
    singular_set_trace,
    wall_crossing,
    wall_normal,
)
from mapgerms.recognition import MapGerm
from mapgerms.strata import StratumId, StratumTag as T, UnfoldingId as U, parametrize_stratum
from mapgerms.strata.locate import locate_and_classify
from mapgerms.strata.unfoldings import unfolding_map
from mapgerms.validate import deltoid_window

G = MapGerm.parse


def i23(a, b, c):
    return unfolding_map(U.I23, (a, b, c))


# -- tracing ----------------------------------------------------------------------

def test_trace_fold_is_the_x_axis():
    ls = singular_set_trace(G("(x, y^2)"), Window(-1, 1, -1, 1, 64))
    assert len(ls.polylines) == 1
    pl = ls.polylines[0]
    assert np.abs(pl[:, 1]).max() < 1e-10
    assert pl[:, 0].min() < -0.95 and pl[:, 0].max() > 0.95


def test_trace_g_at_001_matches_dense_sampling():
    f = i23(0, 0, 1)
    w = Window(-0.5, 0.5, -0.5, 0.5, 128)
    ls = singular_set_trace(f, w)
    pts = np.vstack(ls.polylines)

    # oracle: lambda = x(2x + a) - y(3y^2 + 2cy + b) evaluated directly
    def lam(x, y):
        return 2 * x * x - y * (3 * y * y + 2 * y)

    assert np.abs(lam(pts[:, 0], pts[:, 1])).max() < 1e-9
    assert min(np.hypot(pts[:, 0], pts[:, 1])) < 1e-6
    # every sign change of lambda on a fine grid lies near the traced set
    xs = np.linspace(-0.45, 0.45, 400)
    X, Y = np.meshgrid(xs, xs)
    V = lam(X, Y)
    flips = np.argwhere(np.sign(V[:, 1:]) != np.sign(V[:, :-1]))
    for i, j in flips[:: max(1, len(flips) // 60)]:
        q = np.array([X[i, j], Y[i, j]])
        assert np.min(np.hypot(*(pts - q).T)) < 4 * (xs[1] - xs[0])


def test_trace_perturbed_deltoid_is_a_closed_loop():
    f = G("(x^2-y^2+x^3 + 1/100*x, x*y)")
    w = Window(-0.01, 0.01, -0.01, 0.01, 128)
    ls = singular_set_trace(f, w)
    assert ls.closed == [True]
    loop = ls.polylines[0]
    # oracle: sign census of lambda = x(2x + 3x^2 + 1/100) + 2y^2 on a fine grid
    xs = np.linspace(w.xmin, w.xmax, 801)
    X, Y = np.meshgrid(xs, xs)
    neg = X * (2 * X + 3 * X * X + 0.01) + 2 * Y * Y < 0
    inside = X[neg], Y[neg]
    cx, cy = inside[0].mean(), inside[1].mean()
    assert neg[0].sum() == neg[-1].sum() == neg[:, 0].sum() == neg[:, -1].sum() == 0
    ang = np.unwrap(np.arctan2(loop[:, 1] - cy, loop[:, 0] - cx))
    assert abs(abs(ang[-1] - ang[0]) - 2 * math.pi) < 0.2
    assert abs(loop[:, 0].min() - inside[0].min()) < 3 * (xs[1] - xs[0])


def test_trace_reports_degenerate_cells():
    ls = singular_set_trace(G("(x^2/2, y)"), Window(-1, 1, -1, 1, 32))
    assert ls.degenerate_cells


def test_window_validation():
    with pytest.raises(ValueError):
        Window(1, -1, 0, 1, 64)
    with pytest.raises(ValueError):
        Window(-1, 1, -1, 1, 16)


# -- apparent contours ------------------------------------------------------------

def test_fold_counts():
    assert apparent_contour(G("(x, y^2)"), Window(-1, 1, -1, 1, 64)).counts == (1, 0, 0)


@pytest.mark.parametrize("p", [(0.001, 0.001, -0.2), (0.0005, -0.001, -0.2), (-0.0007, 0.0002, -0.15)])
def test_deltoid_has_three_cusps(p):
    for res in (256, 512):
        assert apparent_contour(i23(*p), deltoid_window(*p, res)).counts[1] == 3


@pytest.mark.parametrize("p,expected", [
    ((0.01, 0.01), (2, 1, 0)),
    ((-0.01, 0.01), (2, 1, 1)),
    ((0.01, -0.01), (2, 1, 1)),
    ((-0.01, -0.01), (2, 1, 2)),
])
def test_sharksfin_regimes_stable_under_refinement(p, expected):
    f = unfolding_map(U.SHARKSFIN, p)
    counts = [apparent_contour(f, Window(-0.5, 0.5, -0.5, 0.5, r)).counts for r in (256, 512)]
    assert counts[0] == counts[1] == expected


def test_cusps_sit_on_kernel_tangency():
    p = (0.001, 0.001, -0.2)
    f = i23(*p)
    F_ = PlaneMap.of(f)
    d = apparent_contour(f, deltoid_window(*p, 256))
    for s, t in d.cusps:
        assert abs(F_.lam.evaluate(*s)) < 1e-10
        k = F_.kernel(*s)
        g = np.array([F_.lamx.evaluate(*s), F_.lamy.evaluate(*s)])
        assert abs(k @ g) < 1e-6 * np.linalg.norm(g)
        assert np.allclose(F_(*s), t, atol=1e-12)


def test_double_points_have_distinct_preimages():
    f = unfolding_map(U.SHARKSFIN, (-0.01, -0.01))
    w = Window(-0.5, 0.5, -0.5, 0.5, 256)
    F_ = PlaneMap.of(f)
    d = apparent_contour(f, w)
    assert len(d.double_points) == 2
    for dp in d.double_points:
        s0, s1 = dp["sources"]
        assert math.dist(s0, s1) > 10 * w.cell
        for s in (s0, s1):
            assert abs(F_.lam.evaluate(*s)) < 1e-9
            assert np.allclose(F_(*s), dp["image"], atol=1e-9)


def test_contour_exports():
    d = apparent_contour(G("(x, y^2)"), Window(-1, 1, -1, 1, 64))
    assert d.to_csv().splitlines()[0] == "component,closed,index,x,y,u,v"
    assert '"components": 1' in d.to_json()


# -- regimes of the i23 unfolding ----------------------------------------------------

def test_contour_features_deltoid_region():
    p = (0.001, 0.001, -0.2)
    assert contour_features(U.I23, p, deltoid_window(*p, 256))[1] == 3
    assert contour_features(U.I23, p, deltoid_window(*p, 512))[1] == 3


def test_contour_features_same_component():
    # both points sit in the region between the two beaks/lips branches at c < 0
    w = Window(-0.3, 0.3, -0.3, 0.3, 256)
    assert contour_features(U.I23, (0.001, 0.001, -0.2), w) == contour_features(U.I23, (-0.0005, 0.0015, -0.2), w)


def _near_wall(tag, y, c, e=1e-6):
    p = parametrize_stratum(U.I23, StratumId(tag, 1), (y, c))
    n = wall_normal(p)
    src = locate_and_classify(U.I23, seed=p).sources
    hw = 6 * math.sqrt(e)
    w = Window.centered(src[0][0], src[0][1], hw, 256)
    a, b, c = (float(v) for v in p.numeric())
    return [(a - s * e * n[0], b - s * e * n[1], c) for s in (1, -1)], w


@pytest.mark.parametrize("y", [F(-1, 5), F(1, 5)])
def test_contour_features_across_beaks_lips(y):
    (p0, p1), w = _near_wall(T.BEAKS_LIPS, y, F(3, 5))
    c0, c1 = contour_features(U.I23, p0, w), contour_features(U.I23, p1, w)
    assert abs(c0[1] - c1[1]) == 2


def test_contour_features_rejects_points_on_strata():
    with pytest.raises(NearStratumError):
        contour_features(U.I23, (0, 0, 0.3))
    p = parametrize_stratum(U.I23, StratumId(T.BEAKS_LIPS, 1), (F(1, 10), F(1, 2)))
    with pytest.raises(ContourError):
        contour_features(U.I23, p.numeric())


@pytest.mark.parametrize("tag,y,expected", [
    (T.SWALLOWTAIL, F(-1, 10), {(0, 2, 1), (0, -2, -1)}),
    (T.SWALLOWTAIL, F(1, 5), {(0, 2, 1), (0, -2, -1)}),
    (T.BEAKS_LIPS, F(-1, 5), None),
    (T.BEAKS_LIPS, F(1, 5), None),
])
def test_wall_crossing_deltas(tag, y, expected):
    wc = wall_crossing(parametrize_stratum(U.I23, StratumId(tag, 1), (y, F(3, 5))))
    assert wc.stable
    if expected is None:
        assert abs(wc.delta[1]) == 2
    else:
        assert wc.delta in expected


def test_wall_crossing_cusp_fold_changes_one_double_point():
    # the contour module's stated coupling: one double point, no cusps
    wc = wall_crossing(parametrize_stratum(U.I23, StratumId(T.CUSP_FOLD, 1), (F(-1, 5), F(3, 5))))
    assert wc.stable
    assert wc.delta[1] == 0
    assert abs(wc.delta[2]) == 1


@settings(max_examples=6, deadline=None)
@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.3, 0.3))
def test_mirror_symmetry(a, b, c):
    w = Window(-0.6, 0.6, -0.6, 0.6, 256)
    d0, d1 = apparent_contour(i23(a, b, c), w), apparent_contour(i23(-a, b, c), w)
    assert d0.counts == d1.counts
    # the singular sets are mirror images under x -> -x
    s0 = np.vstack(d0.singular_polylines) if d0.singular_polylines else np.zeros((0, 2))
    s1 = np.vstack(d1.singular_polylines) if d1.singular_polylines else np.zeros((0, 2))
    F0, F1 = PlaneMap.of(i23(a, b, c)), PlaneMap.of(i23(-a, b, c))
    if len(s0):
        # lambda of the mirrored member is lambda composed with x -> -x
        assert np.allclose(F1.lam.evaluate(-s0[:, 0], s0[:, 1]), F0.lam.evaluate(s0[:, 0], s0[:, 1]), atol=1e-14)
    assert len(s0) > 0 or len(s1) == 0


@pytest.mark.parametrize("p", [(0.05, 0.02, 0.2), (-0.03, -0.04, 0.25), (0.02, 0.03, -0.2), (0.0, -0.05, 0.1)])
def test_resolution_stability(p):
    f = i23(*p)
    assert apparent_contour(f, Window(resolution=256)).counts == apparent_contour(f, Window(resolution=512)).counts
