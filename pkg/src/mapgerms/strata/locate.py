"""Locate the singular point behind a stratum point and classify it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from ..recognition import SingularityClass, Tag, classify
from .formulas import check_pair
from .series import newton_fixed, odd_sharksfin_branch, sharksfin_branch
from .types import MultiGermWitness, StratumError, StratumPoint, StratumTag, UnfoldingId
from .unfoldings import X, Y, components, germ_at, lambdified, param_symbols, symbolic

NEWTON_TOL = 1e-12


class NewtonDivergence(RuntimeError):
    pass


@dataclass
class LocateResult:
    point: StratumPoint
    params: tuple[float, ...]
    sources: list[tuple[float, float]]
    result: SingularityClass | MultiGermWitness
    expected: str
    found: str
    residual: float
    notes: list[str] = field(default_factory=list)

    @property
    def matches(self) -> bool:
        return self.expected == self.found

    def to_json(self) -> dict:
        res = self.result.to_json() if isinstance(self.result, MultiGermWitness) else str(self.result)
        return {
            "stratum": self.point.to_json(),
            "params": list(self.params),
            "sources": [list(p) for p in self.sources],
            "result": res,
            "expected": self.expected,
            "found": self.found,
            "matches": self.matches,
            "residual": self.residual,
            "notes": self.notes,
        }


# which system and kernel field cut out each stratum
_SYSTEMS = {
    StratumTag.BEAKS_LIPS: "beaks_lips",
    StratumTag.GOOSE: "goose",
    StratumTag.SWALLOWTAIL: "swallowtail",
    StratumTag.BUTTERFLY: "butterfly",
    StratumTag.BEAKS_LINES: "beaks_lips",
    StratumTag.GULLS: "gulls",
}


def gauss_newton(fun, jac, z0, tol: float | None = None, maxiter: int = 50) -> tuple[np.ndarray, float]:
    """Least-squares Newton for a (possibly overdetermined) polynomial system."""
    tol = NEWTON_TOL if tol is None else tol
    z = np.array(z0, dtype=float)
    for _ in range(maxiter):
        f = np.asarray(fun(z), dtype=float)
        J = np.asarray(jac(z), dtype=float)
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        z = z + step
        if not np.all(np.isfinite(z)):
            break
        if np.linalg.norm(step) <= tol * (1 + np.linalg.norm(z)):
            f = np.asarray(fun(z), dtype=float)
            return z, float(np.max(np.abs(f)))
    raise NewtonDivergence(f"Newton did not converge from {list(z0)}")


def _refine_source(u, name, eta_from, params, seed) -> tuple[np.ndarray, float]:
    fv, fj = lambdified(u, name, eta_from, "numpy", ("x", "y"))
    p = [float(v) for v in params]
    return gauss_newton(lambda z: fv(z[0], z[1], *p), lambda z: fj(z[0], z[1], *p), seed)


def _i23_seed(tag: StratumTag, params, internal) -> tuple[float, float]:
    a, b, c = (float(v) for v in params)
    if tag is StratumTag.GOOSE:
        return (-a / 4, -2 * c / 9)
    if tag is StratumTag.BUTTERFLY:
        y = -c / 5
    else:
        y = float(internal[0])
    if tag is StratumTag.BEAKS_LIPS:
        return (-a / 4, y)
    # swallowtail / butterfly: a x = -2x^2 + b y + 2c y^2 + 3y^3 and x^2 = y^2 (c + 4y)
    if a != 0:
        return ((b * y - 5 * y ** 3) / a, y)
    return (y * math.sqrt(max(c + 4 * y, 0.0)), y)


def _expected_i23(tag: StratumTag, internal) -> str:
    if tag is StratumTag.BEAKS_LIPS:
        y, c = (float(v) for v in internal)
        # det H_lambda = -8 (2c + 9y)
        return Tag.LIPS.value if 2 * c + 9 * y < 0 else Tag.BEAKS.value
    return {
        StratumTag.GOOSE: Tag.GOOSE,
        StratumTag.SWALLOWTAIL: Tag.SWALLOWTAIL,
        StratumTag.BUTTERFLY: Tag.BUTTERFLY,
        StratumTag.SHARKSFIN_AXIS: Tag.SHARKSFIN,
        StratumTag.DELTOID_AXIS: Tag.DELTOID_TWO_JET,
    }[tag].value


def cusp_fold_witness(params, y: float) -> MultiGermWitness:
    """Refine and check the cusp point ``p`` and fold point ``q`` of a
    cusp+fold point of the i23 unfolding.

    Seed: ``Y = -(c + 3y)/2``, ``X = s y sqrt(-y)``, ``x = X Y / y`` with
    ``s`` the sign of ``a (3c + 5y)``.  The five equations
    ``xy = XY``, ``G1(p) = G1(q)``, ``lambda(p) = lambda(q) = 0``,
    ``eta lambda(p) = 0`` are then solved by least squares.
    """
    a, b, c = (float(v) for v in params)
    s = 1.0 if a * (3 * c + 5 * y) >= 0 else -1.0
    Yq = -(c + 3 * y) / 2
    Xq = s * y * math.sqrt(-y)
    xp = Xq * Yq / y
    fv, fj = _cusp_fold_funcs()
    z, res = gauss_newton(lambda z: fv(*z, a, b, c), lambda z: fj(*z, a, b, c), [xp, y, Xq, Yq])
    names = ("xy=XY", "G1(p)=G1(q)", "lambda(p)", "lambda(q)", "eta_lambda(p)")
    vals = fv(*z, a, b, c)
    w = MultiGermWitness((float(z[0]), float(z[1])), (float(z[2]), float(z[3])), tuple(params),
                         {n: float(v) for n, v in zip(names, vals)})
    return w


_CF_CACHE: dict = {}


def _cusp_fold_funcs():
    if "f" not in _CF_CACHE:
        from .unfoldings import XX, YY

        s = symbolic(UnfoldingId.I23, 2)
        a, b, c = s["params"]
        lam, eta_lam = s["lam"], s["tower"][1]
        f1 = s["f1"]
        eqs = [X * Y - XX * YY,
               f1 - f1.subs({X: XX, Y: YY}, simultaneous=True),
               lam,
               lam.subs({X: XX, Y: YY}, simultaneous=True),
               eta_lam]
        unknowns = (X, Y, XX, YY)
        jac = [[sp.diff(e, v) for v in unknowns] for e in eqs]
        args = unknowns + (a, b, c)
        _CF_CACHE["f"] = (sp.lambdify(args, eqs, "numpy"), sp.lambdify(args, jac, "numpy"))
    return _CF_CACHE["f"]


def tacnode_witness(params) -> MultiGermWitness:
    """Two fold points ``(0, +-sqrt(-c/2))`` with a common image on the
    tacnode stratum ``4a = c^2, b = 0`` of the odd-shaped sharksfin."""
    a, b, c = (float(v) for v in params)
    s = math.sqrt(-c / 2)
    u = UnfoldingId.ODD_SHARKSFIN
    fv, fj = lambdified(u, "beaks_lips", 1, "numpy", ("x", "y"))
    pts = []
    for y0 in (s, -s):
        # lambda = 0 and d/dy of f1 along x = 0 vanish there; polish lambda only
        lam_v = fv(0.0, y0, a, b, c)[0]
        pts.append((0.0, y0, float(lam_v)))
    f = [components(u, p[0], p[1], (a, b, c)) for p in pts]
    w = MultiGermWitness((pts[0][0], pts[0][1]), (pts[1][0], pts[1][1]), tuple(params), {
        "lambda(p)": pts[0][2],
        "lambda(q)": pts[1][2],
        "F1(p)-F1(q)": float(f[0][0] - f[1][0]),
        "F2(p)-F2(q)": float(f[0][1] - f[1][1]),
    })
    return w


def locate_and_classify(u: UnfoldingId, p=None, seed: StratumPoint | None = None) -> LocateResult:
    """Find the source point(s) of the stratum point ``seed`` (or of the
    parameter point ``p`` near it), classify the germ there and compare with
    the stratum's label.

    A mismatch is reported through ``LocateResult.matches``, never hidden.
    """
    if seed is None:
        raise StratumError("locate_and_classify needs a seed StratumPoint")
    u = UnfoldingId(u)
    check_pair(u, seed.stratum)
    tag = seed.stratum.tag
    params = tuple(float(v) for v in (p if p is not None else seed.params))
    notes: list[str] = []

    if u is UnfoldingId.I23:
        if tag is StratumTag.CUSP_FOLD:
            w = cusp_fold_witness(params, float(seed.internal[0]))
            cp = classify(germ_at(u, params, w.p)).tag.value
            cq = classify(germ_at(u, params, w.q)).tag.value
            w.classes = (cp, cq)
            found = "cusp+fold" if (cp, cq) == ("cusp", "fold") else f"{cp}+{cq}"
            return LocateResult(seed, params, [w.p, w.q], w, "cusp+fold", found,
                                w.max_residual(), notes)
        if tag in (StratumTag.SHARKSFIN_AXIS, StratumTag.DELTOID_AXIS):
            src, res = np.zeros(2), 0.0
        else:
            src, res = _refine_source(u, _SYSTEMS[tag], 2, params,
                                      _i23_seed(tag, seed.params, seed.internal))
        expected = _expected_i23(tag, seed.internal)
    elif tag is StratumTag.SWALLOWTAIL:
        # the series point is only approximately on the stratum: move along
        # the branch's free parameter onto it before classifying
        t = float(seed.internal[0])
        if u is UnfoldingId.SHARKSFIN:
            branch = sharksfin_branch(seed.stratum.sign)
        else:
            branch = odd_sharksfin_branch(seed.stratum.sign, params[2])
        names = u.param_names
        free_val = params[names.index(branch.free)]
        from .series import asymptotic_seed

        x0, y0, _ = asymptotic_seed(branch, t)
        v = newton_fixed(branch, [x0, y0, free_val], t)
        shift = float(v[2]) - free_val
        if shift != 0:
            notes.append(f"parameter {branch.free} moved by {shift:.3e} onto the stratum")
        params = tuple(float(v) for v in branch.params(v[2], t))
        src, res = _refine_source(u, "swallowtail", branch.eta_from, params, v[:2])
        expected = Tag.SWALLOWTAIL.value
    elif tag is StratumTag.TACNODE:
        w = tacnode_witness(params)
        cp = classify(germ_at(u, params, w.p)).tag.value
        cq = classify(germ_at(u, params, w.q)).tag.value
        w.classes = (cp, cq)
        found = "fold+fold" if (cp, cq) == ("fold", "fold") else f"{cp}+{cq}"
        return LocateResult(seed, params, [w.p, w.q], w, "fold+fold", found,
                            w.max_residual(), notes)
    else:
        # beaks lines and the gulls axis sit over the source origin
        src, res = np.zeros(2), 0.0
        if tag is StratumTag.GULLS:
            expected = Tag.GULLS.value
        else:
            expected = Tag.BEAKS.value
    cls = classify(germ_at(u, params, (float(src[0]), float(src[1]))))
    return LocateResult(seed, params, [(float(src[0]), float(src[1]))], cls, expected,
                        cls.tag.value, res, notes)


def gulls_exclusion_i23() -> dict:
    """Exact elimination: on the i23 unfolding with ``eta = -x d/dx + y d/dy``
    the system ``lambda = lambda_x = lambda_y = eta^2 lambda = 0`` forces
    ``x = y = a = b = 0``.

    Returns the Groebner basis and, for each of ``x, y, a, b``, the least
    power lying in the ideal (``None`` if none up to 8).
    """
    s = symbolic(UnfoldingId.I23, 2)
    a, b, c = s["params"]
    eqs = [s["lam"], s["lam_x"], s["lam_y"], s["tower"][2]]
    G = sp.groebner(eqs, X, Y, a, b, c, order="lex")
    powers = {}
    for v in (X, Y, a, b):
        powers[str(v)] = next((k for k in range(1, 9) if G.reduce(v ** k)[1] == 0), None)
    return {
        "basis": [str(e) for e in G.exprs],
        "nilpotent_powers": powers,
        "excluded": all(k is not None for k in powers.values()),
    }
