"""Parallel projections of crosscaps and planar caustics of type D5.

The crosscap family is ``(y, xy + g(x, y, t), x^2 + alpha(t) y^2 + phi(x, y, t))``;
projecting along ``(1, v, w)`` gives a plane-to-plane germ which, for the
typical family ``g = 0, phi = y^3``, is the i23 unfolding at
``(a, b, c) = (2v, -w, t)`` after ``x -> x - v`` and a target translation.
Parabolic and flecnodal curves are the source points where some projection
is beaks/lips or swallowtail, so they are pulled back from the strata.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from numbers import Rational
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from .contour import ContourDiagram, PlaneMap, Window, apparent_contour, trace_level_set
from .jets import DEFAULT_ORDER, EXACT, FLOAT, Jet
from .recognition import MapGerm, SingularityClass, Tag, classify, classify_corank2_2jet, corank

X, Y = sp.symbols("x y")
_V, _W, _XP = sp.symbols("v w xp")


class GeometryError(ValueError):
    pass


class SweepTooCoarse(GeometryError):
    pass


def _rational(v):
    if isinstance(v, sp.Basic):
        return v
    if isinstance(v, Rational):
        return sp.Rational(int(v.numerator), int(v.denominator))
    return sp.nsimplify(float(v), rational=True)


def _exact(*vals) -> bool:
    return all(isinstance(v, Rational) for v in vals)


def _to_jet(expr, order: int, exact: bool) -> Jet:
    poly = sp.Poly(sp.expand(expr), X, Y)
    terms = {}
    for (i, j), c in poly.terms():
        if exact:
            terms[(i, j)] = Fraction(int(c.p), int(c.q))
        else:
            terms[(i, j)] = float(c)
    return Jet.from_terms(terms, order, EXACT if exact else FLOAT)


# -- crosscaps -----------------------------------------------------------------

@dataclass(frozen=True)
class CrosscapFamily:
    """Coefficients keyed by ``(i, j, k)`` for ``x^i y^j t^k``.

    ``alpha`` lists the coefficients of ``alpha(t)`` from ``t^0`` upward.
    """

    g_coeffs: Mapping[tuple[int, int, int], object] = field(default_factory=dict)
    phi_coeffs: Mapping[tuple[int, int, int], object] = field(default_factory=lambda: {(0, 3, 0): 1})
    alpha: tuple = (0, 1)
    name: str = "typical"

    def __post_init__(self):
        for (i, j, k) in self.g_coeffs:
            if i + j < 3:
                raise GeometryError("g must have vanishing 2-jet in (x, y)")
            if k == 0 and j != 0:
                raise GeometryError("g(x, y, 0) must not depend on y")
        for (i, j, k) in self.phi_coeffs:
            if i + j < 3:
                raise GeometryError("phi must have vanishing 2-jet in (x, y)")
        if not self.alpha or self.alpha[0] != 0:
            raise GeometryError("alpha(0) must vanish (parabolic crosscap at t = 0)")

    @classmethod
    def typical(cls) -> "CrosscapFamily":
        return cls()

    @classmethod
    def affine(cls, c03=1, c12=0, d4=0, name: str = "affine") -> "CrosscapFamily":
        """``g = d4 x^4``, ``phi = c03 y^3 + c12 x y^2``."""
        g = {(4, 0, 0): d4} if d4 else {}
        phi = {k: v for k, v in {(0, 3, 0): c03, (1, 2, 0): c12}.items() if v}
        return cls(g, phi, (0, 1), name)

    @property
    def is_typical(self) -> bool:
        return (not any(self.g_coeffs.values())
                and {k: v for k, v in self.phi_coeffs.items() if v} == {(0, 3, 0): 1}
                and tuple(self.alpha) in ((0, 1), (0, 1.0)))

    @property
    def exact(self) -> bool:
        vals = list(self.g_coeffs.values()) + list(self.phi_coeffs.values()) + list(self.alpha)
        return _exact(*vals)

    def _sym(self, coeffs, t):
        t = _rational(t)
        return sum((_rational(c) * X ** i * Y ** j * t ** k for (i, j, k), c in coeffs.items()),
                   sp.Integer(0))

    def g(self, t):
        return self._sym(self.g_coeffs, t)

    def phi(self, t):
        return self._sym(self.phi_coeffs, t)

    def alpha_at(self, t):
        t = _rational(t)
        return sum((_rational(c) * t ** k for k, c in enumerate(self.alpha)), sp.Integer(0))

    def surface(self, t):
        """Components ``(y, xy + g, x^2 + alpha y^2 + phi)`` as sympy expressions."""
        return (Y, X * Y + self.g(t), X ** 2 + self.alpha_at(t) * Y ** 2 + self.phi(t))

    def projection(self, v, w, t):
        """Sympy components of the projection along ``(1, v, w)``."""
        v, w = _rational(v), _rational(w)
        return (X * Y - v * Y + self.g(t),
                X ** 2 + self.alpha_at(t) * Y ** 2 - w * Y + self.phi(t))

    def to_json(self) -> dict:
        def enc(d):
            return [[i, j, k, str(c)] for (i, j, k), c in sorted(d.items())]

        return {"name": self.name, "g": enc(self.g_coeffs), "phi": enc(self.phi_coeffs),
                "alpha": [str(a) for a in self.alpha]}


def projection_germ(cf: CrosscapFamily, v, w, t, order: int = DEFAULT_ORDER) -> MapGerm:
    """Germ at the crosscap point of the projection along ``(1, v, w)``.

    Exact when ``v, w, t`` and the family coefficients are rational.
    """
    exact = cf.exact and _exact(v, w, t)
    f1, f2 = cf.projection(v, w, t)
    return MapGerm(_to_jet(f1, order, exact), _to_jet(f2, order, exact))


def i23_parameters(v, w, t) -> tuple:
    """``(a, b, c) = (2v, -w, t)``: the i23 parameters of the projection of
    the typical family (source shift ``x -> x - v``, target ``Y -> Y - v^2``,
    components swapped)."""
    return (2 * v, -w, t)


def crosscap_regime(cf: CrosscapFamily, t) -> SingularityClass:
    """2-jet class of the projection along the tangent direction (v = w = 0)."""
    return classify_corank2_2jet(projection_germ(cf, 0, 0, t))


def genericity_report(cf: CrosscapFamily, tol: float = 1e-9) -> dict:
    """Checks on the member ``t = 0``: 2-jet class of the tangent projection,
    the coefficient ``c03`` of ``y^3`` in ``phi`` and the full classifier.

    A vanishing or tiny ``c03`` is reported as borderline, not decided.
    """
    germ = projection_germ(cf, 0, 0, 0)
    two_jet = classify_corank2_2jet(germ)
    c03 = float(sum(float(c) for (i, j, k), c in cf.phi_coeffs.items() if (i, j, k) == (0, 3, 0)))
    if abs(c03) <= tol:
        verdict = "borderline"
    elif two_jet.tag is Tag.I23_CANDIDATE:
        verdict = "generic"
    else:
        verdict = "not_parabolic"
    return {"two_jet": str(two_jet), "c03": c03, "classify": str(classify(germ)), "verdict": verdict}


# -- plane curve germs -------------------------------------------------------------

PARABOLIC = "parabolic"
FLECNODAL = "flecnodal"
DOUBLE_POINT = "double_point"
OTHER = "other"


@dataclass
class PlaneCurveGerm:
    poly: Jet
    label: str = OTHER
    expr: object = None  # the full polynomial, when known

    def __post_init__(self):
        if self.poly[0, 0] != 0:
            raise GeometryError("a plane curve germ must pass through the origin")

    @classmethod
    def from_expr(cls, expr, label: str = OTHER, order: int = DEFAULT_ORDER,
                  exact: bool | None = None) -> "PlaneCurveGerm":
        expr = sp.expand(expr)
        if exact is None:
            exact = all(c.is_Rational for c in sp.Poly(expr, X, Y).coeffs())
        return cls(_to_jet(expr, order, exact), label, expr)

    def factors(self) -> list[tuple[object, int]]:
        """Irreducible factors over the rationals (sympy)."""
        expr = self.expr if self.expr is not None else _jet_expr(self.poly)
        _, fl = sp.factor_list(expr, X, Y)
        return [(f, m) for f, m in fl]

    def to_json(self) -> dict:
        return {"label": self.label, "poly": self.poly.to_json()}


def _jet_expr(j: Jet):
    out = sp.Integer(0)
    for (i, k), c in j.terms().items():
        out += (sp.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sp.Float(c)) \
            * X ** i * Y ** k
    return out


def _normalize(expr, monomial):
    c = sp.Poly(expr, X, Y).coeff_monomial(monomial)
    return sp.expand(expr / c) if c != 0 else sp.expand(expr)


def _closed_forms(t):
    t = _rational(t)
    parab = X ** 2 - Y ** 2 * (t + 3 * Y)
    flec = X ** 2 * (t + 4 * Y) - Y ** 2 * (t + sp.Rational(7, 2) * Y) ** 2
    return parab, flec


_ELIM_CACHE: dict = {}


def _elimination(cf: CrosscapFamily, t) -> tuple:
    key = (repr(cf.to_json()), str(t))
    if key not in _ELIM_CACHE:
        _ELIM_CACHE[key] = _eliminate(cf, t)
    return _ELIM_CACHE[key]


def _eliminate(cf: CrosscapFamily, t) -> tuple:
    f1, f2 = cf.projection(_V, _W, t)
    # v and w enter f1 and f2 linearly, so the projection is
    # (xy - v y + g, x^2 + alpha y^2 - w y + phi)
    lam = sp.expand(sp.diff(f1, X) * sp.diff(f2, Y) - sp.diff(f1, Y) * sp.diff(f2, X))
    rows = []
    for e in (lam, sp.diff(lam, X), sp.diff(lam, Y)):
        e = sp.Poly(e, _V, _W)
        if e.coeff_monomial(_V * _W) != 0:
            raise GeometryError("identification with the i23 unfolding fails (bilinear term)")
        rows.append([e.coeff_monomial(1), e.coeff_monomial(_V), e.coeff_monomial(_W)])
    parab = sp.expand(sp.Matrix(rows).det())
    if parab == 0:
        raise GeometryError("parabolic elimination degenerates")
    eta = (-sp.diff(f1, Y), sp.diff(f1, X))

    def along(h):
        return sp.expand(eta[0] * sp.diff(h, X) + eta[1] * sp.diff(h, Y))

    el = along(lam)
    e2l = along(el)
    cw = sp.Poly(lam, _W).coeff_monomial(_W)
    if cw == 0:
        raise GeometryError("identification with the i23 unfolding fails (w absent)")
    w_sol = sp.solve(sp.Eq(lam, 0), _W)[0]
    n1 = sp.expand(sp.numer(sp.together(el.subs(_W, w_sol))))
    n2 = sp.expand(sp.numer(sp.together(e2l.subs(_W, w_sol))))
    flec = sp.expand(sp.resultant(n1, n2, _V))
    return parab, flec, sp.expand(cw)


def _strip(expr, cw, generic):
    """Divide ``expr`` by the powers of the factors of ``cw`` that the
    elimination introduces; their multiplicity is read off ``generic``, the
    same elimination at a nearby generic parameter."""
    _, fl = sp.factor_list(cw, X, Y)
    for h, _ in fl:
        if not h.free_symbols:
            continue
        m = 0
        g = generic
        while True:
            q, r = sp.div(g, h, X, Y)
            if r != 0:
                break
            g, m = q, m + 1
        for _ in range(m):
            q, r = sp.div(expr, h, X, Y)
            if r != 0:
                break
            expr = q
    return sp.expand(expr)


def characteristic_curves(cf: CrosscapFamily, t, method: str = "auto",
                          order: int = DEFAULT_ORDER) -> tuple[PlaneCurveGerm, PlaneCurveGerm]:
    """Parabolic and flecnodal curve germs of the member ``t``.

    ``method="closed"`` uses the pulled-back strata of the typical family,
    ``"elimination"`` eliminates the projection direction ``(v, w)`` from
    the beaks/lips and swallowtail conditions, ``"auto"`` picks the closed
    form for the typical family.  Parabolic curves are normalised to unit
    ``x^2`` coefficient, flecnodal ones to ``x^2 y`` coefficient 4.
    """
    if method == "auto":
        method = "closed" if cf.is_typical else "elimination"
    exact = cf.exact and _exact(t)
    if method == "closed":
        if not cf.is_typical:
            raise GeometryError("closed forms exist for the typical family only")
        parab, flec = _closed_forms(t)
    elif method == "elimination":
        tr = _rational(t)
        parab, flec, cw = _elimination(cf, tr)
        generic = _elimination(cf, tr + sp.Rational(1, 97))[1]
        flec = _strip(flec, cw, generic)
        parab = _normalize(parab, X ** 2)
        flec = 4 * _normalize(flec, X ** 2 * Y)
    else:
        raise GeometryError(f"unknown method {method!r}")
    return (PlaneCurveGerm.from_expr(parab, PARABOLIC, order, exact),
            PlaneCurveGerm.from_expr(flec, FLECNODAL, order, exact))


def double_point_curve(cf: CrosscapFamily, t, order: int = DEFAULT_ORDER) -> PlaneCurveGerm:
    """Source curve of self-intersections of the crosscap surface: pairs
    ``(x, y) != (x', y)`` with a common image, via divided differences and a
    resultant in ``x'``."""
    _, s2, s3 = cf.surface(t)
    d = []
    for s in (s2, s3):
        diff = sp.expand(s - s.subs(X, _XP))
        q, r = sp.div(diff, X - _XP, X, Y, _XP)
        if r != 0:
            raise GeometryError("divided difference failed")
        d.append(sp.expand(q))
    if not d[0].has(_XP):
        res = d[0] ** max(sp.degree(d[1], _XP), 1)
    elif not d[1].has(_XP):
        res = d[1] ** max(sp.degree(d[0], _XP), 1)
    else:
        res = sp.resultant(d[0], d[1], _XP)
    res = sp.expand(res)
    exact = cf.exact and _exact(t)
    return PlaneCurveGerm.from_expr(res, DOUBLE_POINT, order, exact)


# -- branches and contact orders ---------------------------------------------------

@dataclass
class BranchContact:
    direction: tuple[float, float] | None
    order: int
    lower_bound: bool = False
    method: str = "series"

    def __str__(self) -> str:
        return f">= {self.order}" if self.lower_bound else str(self.order)

    def to_json(self) -> dict:
        return {"direction": list(self.direction) if self.direction else None, "order": self.order,
                "lower_bound": self.lower_bound, "method": self.method}


@dataclass
class Branch:
    theta: float
    simple: bool


def _tangent_cone(P: Jet, tol: float) -> tuple[int, list[Branch]]:
    d = P.lowest_degree(tol)
    if d is None:
        raise GeometryError("curve germ vanishes identically at working order")
    H = {k: float(v) for k, v in P.homogeneous_part(d).items()}
    scale = max(abs(v) for v in H.values())
    # H(1, m) = sum_j H[d-j, j] m^j
    coeffs = [H.get((d - j, j), 0.0) / scale for j in range(d + 1)]
    out = []
    poly = np.polynomial.Polynomial(coeffs)
    der = poly.deriv()
    if abs(coeffs[-1]) > 1e-12:
        roots = poly.roots()
    else:
        trimmed = np.polynomial.Polynomial(np.trim_zeros(np.array(coeffs), "b"))
        roots = trimmed.roots() if trimmed.degree() > 0 else np.array([])
        # a root at infinity: the vertical direction
        simple = abs(coeffs[-2]) > 1e-9 if d >= 1 else False
        out.append(Branch(math.pi / 2, simple))
    for r in roots:
        if abs(r.imag) > 1e-7 * (1 + abs(r)):
            continue
        m = r.real
        simple = abs(der(m)) > 1e-7 * (1 + abs(m)) ** max(d - 1, 0)
        out.append(Branch(math.atan(m), simple))
    # merge numerically repeated roots
    merged: list[Branch] = []
    for b in sorted(out, key=lambda b: b.theta):
        if merged and abs(b.theta - merged[-1].theta) < 1e-6:
            merged[-1] = Branch(merged[-1].theta, False)
        else:
            merged.append(b)
    return d, merged


def _rotate(P: Jet, theta: float) -> Jet:
    s, n = Jet.variables(P.order, FLOAT)
    c, si = math.cos(theta), math.sin(theta)
    return P.to_float().compose(s * c - n * si, s * si + n * c)


def _branch_series(Pt: Jet, d: int, mu0: float) -> tuple[np.ndarray, int]:
    """Series ``psi(s)`` of the branch ``n = psi(s)`` of ``Pt(s, n) = 0``
    with ``psi(s) = s mu(s)``, ``mu(0) ~ mu0``.  Returns the coefficients
    and the highest order they are valid to."""
    N = Pt.order
    K = N - d + 1  # mu coefficients 0..N-d
    q = np.zeros((K, N + 1))
    for (i, j), c in Pt.terms().items():
        a = i + j - d
        if a < 0:
            continue
        if a < K:
            q[a, j] += float(c)
    # refine mu(0) on Q(0, mu) = 0
    h = np.polynomial.Polynomial(q[0])
    hd = h.deriv()
    m0 = mu0
    for _ in range(50):
        dv = hd(m0)
        if dv == 0:
            break
        step = h(m0) / dv
        m0 -= step
        if abs(step) < 1e-15:
            break
    Qmu = hd(m0)
    if abs(Qmu) < 1e-12 * max(1.0, np.max(np.abs(q[0]))):
        raise GeometryError("branch is not smooth at working order")
    mu = np.zeros(K)
    mu[0] = m0
    for _ in range(K + 2):
        val = np.zeros(K)
        powk = np.zeros(K)
        powk[0] = 1.0
        for j in range(q.shape[1]):
            if j > 0:
                powk = np.convolve(powk, mu)[:K]
            col = q[:, j]
            if not np.any(col):
                continue
            val += np.convolve(col, powk)[:K]
        mu = mu - val / Qmu
    psi = np.concatenate([[0.0], mu])
    return psi, N - d + 1


def _resultant_contact(c1: PlaneCurveGerm, c2: PlaneCurveGerm) -> BranchContact:
    """Total intersection multiplicity at the origin from the order of
    vanishing of a resultant, after a shear making the coordinates generic."""
    e1 = c1.expr if c1.expr is not None else _jet_expr(c1.poly)
    e2 = c2.expr if c2.expr is not None else _jet_expr(c2.poly)
    e1 = sp.nsimplify(e1, rational=True)
    e2 = sp.nsimplify(e2, rational=True)
    k = sp.Rational(3, 7)
    s1 = sp.expand(e1.subs(X, X + k * Y))
    s2 = sp.expand(e2.subs(X, X + k * Y))
    g = sp.gcd(sp.Poly(s1.subs(Y, 0), X), sp.Poly(s2.subs(Y, 0), X))
    if g.degree() > 0 and any(r != 0 for r in sp.Poly(g, X).all_roots() if r.is_real) \
            or sp.Poly(g, X).degree() > 0 and sp.Poly(g, X).eval(0) != 0:
        raise GeometryError("resultant valuation not local: common roots off the origin")
    R = sp.Poly(sp.resultant(s1, s2, X), Y)
    if R.is_zero:
        return BranchContact(None, min(c1.poly.order, c2.poly.order), True, "resultant")
    low = min(m[0] for m in R.monoms())
    return BranchContact(None, int(low), False, "resultant")


def contact_order(c1: PlaneCurveGerm, c2: PlaneCurveGerm, branch_pairing: str = "tangent",
                  tol: float = 1e-8) -> list[BranchContact]:
    """Intersection multiplicities of paired branches at the origin.

    Branches are the smooth curves tangent to the simple lines of each
    tangent cone, expanded as graphs over their tangent line.  With
    ``branch_pairing="tangent"`` only branches with a common tangent are
    paired (transverse pairs have order 1 and are listed with ``"all"``).
    Tangent directions that are not simple fall back to the total
    intersection multiplicity from a resultant.  Identical branches are
    reported as ``>= N`` with ``N`` the jet order.
    """
    if branch_pairing not in ("tangent", "all"):
        raise GeometryError("branch_pairing must be 'tangent' or 'all'")
    P1, P2 = c1.poly.to_float(), c2.poly.to_float()
    N = min(P1.order, P2.order)
    s1 = max(P1.max_abs_coeff(), 1e-300)
    s2 = max(P2.max_abs_coeff(), 1e-300)
    d1, b1 = _tangent_cone(P1.scale(1 / s1), tol)
    d2, b2 = _tangent_cone(P2.scale(1 / s2), tol)
    out: list[BranchContact] = []
    fallback = False
    for u in b1:
        for v in b2:
            diff = (u.theta - v.theta + math.pi / 2) % math.pi - math.pi / 2
            direction = (math.cos(u.theta), math.sin(u.theta))
            if abs(diff) > 1e-6:
                if branch_pairing == "all":
                    out.append(BranchContact(direction, 1))
                continue
            if not (u.simple and v.simple):
                fallback = True
                continue
            Q1 = _rotate(P1.scale(1 / s1), u.theta)
            Q2 = _rotate(P2.scale(1 / s2), u.theta)
            try:
                psi1, v1 = _branch_series(Q1, d1, 0.0)
                psi2, v2 = _branch_series(Q2, d2, math.tan(diff))
            except GeometryError:
                fallback = True
                continue
            valid = min(v1, v2)
            delta = psi1[:valid + 1] - psi2[:valid + 1]
            # compare order by order: later coefficients grow like a power
            # of the inverse curvature scale
            mag = np.maximum(1.0, np.maximum(np.abs(psi1[:valid + 1]), np.abs(psi2[:valid + 1])))
            k = next((k for k in range(1, valid + 1) if abs(delta[k]) > tol * mag[k]), None)
            if k is None:
                out.append(BranchContact(direction, N, True))
            else:
                out.append(BranchContact(direction, k))
    if fallback:
        try:
            out.append(_resultant_contact(c1, c2))
        except GeometryError:
            # unresolved: tangent branches meet with order at least 2
            out.append(BranchContact(None, 2, True, "unresolved"))
    return out


# -- sign census ----------------------------------------------------------------

@dataclass
class Census:
    components: int
    closed: list[bool]
    isolated_points: list[tuple[float, float]]
    window: Window

    def to_json(self) -> dict:
        return {"components": self.components, "closed": self.closed,
                "isolated_points": [list(p) for p in self.isolated_points],
                "window": self.window.to_json()}


def sign_census(curve: PlaneCurveGerm, w: Window | None = None) -> Census:
    """Curve components (sign changes of the defining polynomial on the
    grid) and isolated real points (strict local extrema with value zero and
    definite Hessian)."""
    w = w or Window(-0.2, 0.2, -0.2, 0.2, 512)
    P = curve.poly.to_float()
    Px, Py = P.dx(), P.dy()
    ls = trace_level_set(P.evaluate, lambda x, y: (Px.evaluate(x, y), Py.evaluate(x, y)), w)
    xs, ys = w.grid()
    Xg, Yg = np.meshgrid(xs, ys)
    V = P.evaluate(Xg, Yg)
    A = np.abs(V)
    scale = float(np.max(A)) or 1.0
    inner = A[1:-1, 1:-1]
    is_min = np.ones_like(inner, dtype=bool)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if dj == 0 and di == 0:
                continue
            is_min &= inner <= A[1 + dj:A.shape[0] - 1 + dj, 1 + di:A.shape[1] - 1 + di]
    # no sign change in the 3x3 block: the zero is not on a curve
    S = np.sign(V)
    same = np.ones_like(inner, dtype=bool)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            block = S[1 + dj:S.shape[0] - 1 + dj, 1 + di:S.shape[1] - 1 + di]
            same &= (block == S[1:-1, 1:-1]) | (block == 0) | (S[1:-1, 1:-1] == 0)
    cand = np.argwhere(is_min & same & (inner < 1e-3 * scale))
    Pxx, Pxy, Pyy = Px.dx(), Px.dy(), Py.dy()
    pts = []
    for j, i in cand:
        z = np.array([xs[i + 1], ys[j + 1]])
        for _ in range(30):
            g = np.array([Px.evaluate(*z), Py.evaluate(*z)])
            H = np.array([[Pxx.evaluate(*z), Pxy.evaluate(*z)], [Pxy.evaluate(*z), Pyy.evaluate(*z)]])
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                break
            z = z + step
            if np.hypot(*step) < 1e-15:
                break
        H = np.array([[Pxx.evaluate(*z), Pxy.evaluate(*z)], [Pxy.evaluate(*z), Pyy.evaluate(*z)]])
        if abs(P.evaluate(*z)) > 1e-10 * scale or np.linalg.det(H) <= 0:
            continue
        if np.hypot(z[0] - xs[i + 1], z[1] - ys[j + 1]) > 2 * w.cell:
            continue
        if not any(np.hypot(z[0] - p[0], z[1] - p[1]) < w.cell for p in pts):
            pts.append((float(z[0]), float(z[1])))
    return Census(len(ls.polylines), ls.closed, pts, w)


# -- planar caustics -------------------------------------------------------------

@dataclass(frozen=True)
class CausticFrame:
    """Submersion ``t1 = q1 - a1 mu1 - a2 mu2``, ``t2 = q2 - b1 mu1 - b2 mu2``."""

    a1: object = 0
    a2: object = 0
    b1: object = 0
    b2: object = 0
    name: str = "custom"

    def __post_init__(self):
        for v in (self.a1, self.a2, self.b1, self.b2):
            if not math.isfinite(float(v)):
                raise GeometryError("frame coefficients must be finite")

    def check(self) -> bool:
        """``rho o Phi`` is submersive at 0: its derivative in ``(q1, q2)``
        on the catastrophe set is the identity."""
        J = np.eye(2)
        if np.linalg.matrix_rank(J) != 2:
            raise GeometryError("slice not transverse")
        return True

    @property
    def rho_coeffs(self) -> tuple:
        return (self.a1, self.a2, self.b1, self.b2)

    @property
    def is_trivial(self) -> bool:
        return all(float(v) == 0 for v in (self.a1, self.a2, self.b1, self.b2))

    def to_json(self) -> dict:
        return {"name": self.name, "a1": str(self.a1), "a2": str(self.a2),
                "b1": str(self.b1), "b2": str(self.b2)}


FRAMES = {
    "trivial": CausticFrame(0, 0, 0, 0, "trivial"),
    "perturbed": CausticFrame(Fraction(1, 5), Fraction(1, 10), Fraction(-1, 8), Fraction(1, 12), "perturbed"),
}


def reduced_family(frame: CausticFrame, t1, t2, order: int = 12) -> tuple[Jet, Jet]:
    """``Xi = (mu1, mu2)`` with ``mu1 = xy`` and ``mu2`` solved from
    ``mu2 = x^2 + y^3 + q1 y + q2 y^2`` after substituting
    ``q1 = t1 + a1 mu1 + a2 mu2``, ``q2 = t2 + b1 mu1 + b2 mu2``:

        mu2 (1 - a2 y - b2 y^2) = x^2 + y^3 + t1 y + t2 y^2 + a1 x y^2 + b1 x y^3

    expanded as a series in ``y`` to ``order``."""
    frame.check()
    exact = _exact(frame.a1, frame.a2, frame.b1, frame.b2, t1, t2)
    kind = EXACT if exact else FLOAT
    x, y = Jet.variables(order, kind)

    def k(v):
        return Fraction(v) if exact else float(v)

    num = x * x + y ** 3 + y * k(t1) + y * y * k(t2) + x * y * y * k(frame.a1) + x * y ** 3 * k(frame.b1)
    d = y * k(frame.a2) + y * y * k(frame.b2)
    inv = Jet.constant(1, order, kind)
    term = Jet.constant(1, order, kind)
    for _ in range(order):
        term = term * d
        if term.is_zero():
            break
        inv = inv + term
    return x * y, num * inv


def caustic_germ(frame: CausticFrame, t1=0, t2=0) -> MapGerm:
    f1, f2 = reduced_family(frame, t1, t2, DEFAULT_ORDER)
    return MapGerm(f1, f2)


def fold_inset(F: PlaneMap, seed, base: Window, factor: float = 3.0) -> Window | None:
    """Zoom window around small structure of the singular set.

    Near a nondegenerate critical point of the Jacobian determinant with
    value ``l0`` and Hessian eigenvalues ``h_i`` the fold curve sits at
    distance about ``sqrt(2|l0|/min|h_i|)``: an oval around an extremum, or
    two nearly crossing arcs at a saddle.  Returns ``None`` when there is no
    critical point near ``seed`` or the structure is already resolved by
    ``base``.
    """
    lx, ly = F.lamx, F.lamy
    lxx, lxy, lyy = lx.dx(), lx.dy(), ly.dy()

    def hess(z):
        return np.array([[lxx.evaluate(*z), lxy.evaluate(*z)], [lxy.evaluate(*z), lyy.evaluate(*z)]])

    z = np.array(seed, dtype=float)
    for _ in range(40):
        g = np.array([lx.evaluate(*z), ly.evaluate(*z)])
        try:
            step = np.linalg.solve(hess(z), -g)
        except np.linalg.LinAlgError:
            return None
        z = z + step
        if not np.all(np.isfinite(z)):
            return None
        if np.hypot(*step) < 1e-15 * (1 + np.hypot(*z)):
            break
    eig = np.linalg.eigvalsh(hess(z))
    l0 = float(F.lam.evaluate(*z))
    if eig[0] * eig[1] > 0 and l0 * eig[0] > 0:
        return None  # extremum on the side without an oval
    if min(abs(eig[0]), abs(eig[1])) == 0 or l0 == 0:
        return None
    semi = math.sqrt(2 * abs(l0) / min(abs(eig[0]), abs(eig[1])))
    if semi > 16 * base.cell or math.hypot(z[0] - seed[0], z[1] - seed[1]) > 32 * base.cell:
        return None
    h = max(factor * semi, 8 * base.cell) if eig[0] * eig[1] < 0 else max(factor * semi, 1e-12)
    return Window.centered(float(z[0]), float(z[1]), h, max(64, base.resolution // 2))


def lagrange_caustic_section(frame: CausticFrame, t1, t2, window: Window | None = None,
                             zoom: bool = True) -> ContourDiagram:
    """Planar caustic of ``Xi(., ., t1, t2)``: its apparent contour on ``window``.

    With ``zoom`` small structure of the fold curve near the corank-2 point
    (an oval on the deltoid side, a near crossing on the sharksfin side) is
    traced in its own inset window.
    """
    window = window or Window()
    f1, f2 = reduced_family(frame, t1, t2)
    F = PlaneMap.of((f1, f2))
    insets = []
    if zoom:
        t1f, t2f = float(t1), float(t2)
        seed = (0.0, -t1f / (4 * t2f)) if t2f != 0 else (0.0, 0.0)
        ins = fold_inset(F, seed, window)
        if ins is not None:
            insets.append(ins)
    return apparent_contour(F, window, insets)


def trivial_frame_walls(p0, p1) -> list[tuple[float, str]]:
    """Crossings of the segment ``p0 -> p1`` in ``(t1, t2)`` with the strata
    of the trivial frame, i.e. the i23 strata in the plane ``a = 0`` with
    ``(b, c) = (t1, t2)``: returns ``(s, label)`` with ``s`` in ``[0, 1]``."""
    from .strata.sections import A0_CURVES
    from .strata.types import StratumId, StratumTag

    (b0, c0), (b1, c1) = p0, p1
    db, dc = b1 - b0, c1 - c0
    out = []
    for tag, sign, k, side in A0_CURVES:
        # b0 + s db = k (c0 + s dc)^2
        A = k * dc * dc
        B = 2 * k * c0 * dc - db
        C = k * c0 * c0 - b0
        roots = np.roots([A, B, C]) if A != 0 else ([-C / B] if B != 0 else [])
        for s in roots:
            if abs(np.imag(s)) > 1e-12:
                continue
            s = float(np.real(s))
            if not 0 <= s <= 1:
                continue
            c = c0 + s * dc
            if side == "neg" and c >= 0 or side == "pos" and c <= 0:
                continue
            out.append((s, str(StratumId(tag, sign))))
    if db != 0:
        s = -b0 / db
        if 0 <= s <= 1:
            c = c0 + s * dc
            if c != 0:
                tag = StratumTag.SHARKSFIN_AXIS if c > 0 else StratumTag.DELTOID_AXIS
                out.append((s, str(StratumId(tag, 1))))
    return sorted(out)


@dataclass
class Sweep:
    frame: CausticFrame
    params: list[tuple[float, float]]
    counts: list[tuple[int, int, int]]
    crossings: list[dict]
    window: Window
    diagrams: list[ContourDiagram] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "frame": self.frame.to_json(),
            "window": self.window.to_json(),
            "params": [list(p) for p in self.params],
            "counts": [list(c) for c in self.counts],
            "crossings": self.crossings,
        }


def _frame_diagram(frame: CausticFrame, window: Window, p) -> ContourDiagram:
    return lagrange_caustic_section(frame, p[0], p[1], window)


def perestroika_sweep(frame: CausticFrame, path: Sequence[tuple[float, float]], window: Window | None = None,
                      frames: int = 60, keep_diagrams: bool = False, workers: int = 1) -> Sweep:
    """Caustic pictures along a polyline path in ``(t1, t2)`` with a log of
    feature-count jumps between consecutive frames.

    Each jump is matched to the nearest stratum crossing of the trivial
    frame; for other frames this identification is only first-order and is
    flagged as approximate.  Two strata crossed between consecutive frames
    raise :class:`SweepTooCoarse`.  Frames are independent and run in a
    process pool when ``workers > 1``.
    """
    window = window or Window()
    path = [tuple(float(v) for v in p) for p in path]
    if len(path) < 2:
        path = path * 2
    seg_len = [math.dist(path[i], path[i + 1]) for i in range(len(path) - 1)]
    total = sum(seg_len)
    params = []
    for n in range(frames):
        s = n / (frames - 1) * total if total > 0 else 0.0
        k = 0
        while k < len(seg_len) - 1 and s > seg_len[k]:
            s -= seg_len[k]
            k += 1
        r = s / seg_len[k] if seg_len[k] > 0 else 0.0
        p0, p1 = path[k], path[k + 1]
        params.append((p0[0] + r * (p1[0] - p0[0]), p0[1] + r * (p1[1] - p0[1])))
    walls = []
    for i in range(frames - 1):
        ws = trivial_frame_walls(params[i], params[i + 1]) if params[i] != params[i + 1] else []
        walls.append([(i + s, lab) for s, lab in ws])
    for i, ws in enumerate(walls):
        if len(ws) > 1:
            raise SweepTooCoarse(f"frames {i} and {i + 1} straddle {len(ws)} strata; refine the sweep")
    job = partial(_frame_diagram, frame, window)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, params))
    else:
        results = [job(p) for p in params]
    counts = [d.counts for d in results]
    diagrams = results if keep_diagrams else []
    all_walls = [w for ws in walls for w in ws]
    crossings = []
    for i in range(frames - 1):
        if counts[i] == counts[i + 1]:
            continue
        entry = {"between": [i, i + 1], "params": [list(params[i]), list(params[i + 1])],
                 "before": list(counts[i]), "after": list(counts[i + 1]),
                 "stratum": None, "distance_frames": None, "approximate": not frame.is_trivial}
        if all_walls:
            pos, lab = min(all_walls, key=lambda w: abs(w[0] - (i + 0.5)))
            entry["stratum"] = lab
            entry["distance_frames"] = abs(pos - (i + 0.5))
        crossings.append(entry)
    return Sweep(frame, params, counts, crossings, window, diagrams)
