"""The unfolding maps and the polynomial systems cutting out their strata.

Components are written once as plain arithmetic so the same code evaluates
on floats, mpmath numbers, sympy symbols and :class:`Jet` objects.
"""

from __future__ import annotations

from functools import lru_cache

import sympy as sp

from ..jets import EXACT, FLOAT, Jet
from ..recognition import MapGerm
from .types import UnfoldingId

JET_ORDER = 9


def components(u: UnfoldingId, x, y, params):
    """The two components of the unfolding at parameter ``params``."""
    u = UnfoldingId(u)
    if u is UnfoldingId.I23:
        a, b, c = params
        return x * x + y ** 3 + a * x + b * y + c * y * y, x * y
    if u is UnfoldingId.SHARKSFIN:
        a, b = params
        return x * x + y ** 3 + a * y, y * y + x ** 3 + b * x
    a, b, c = params
    return x * x + y ** 5 + c * y ** 3 + a * y, y * y + x ** 3 + b * x


def unfolding_map(u: UnfoldingId, params, order: int = JET_ORDER) -> tuple[Jet, Jet]:
    """The polynomial map at fixed parameters as a pair of jets.

    The jets hold the full polynomials (degree <= 5), so they can be
    translated to any source point without loss.
    """
    exact = all(isinstance(v, (int,)) or type(v).__name__ == "Fraction" for v in params)
    kind = EXACT if exact else FLOAT
    vals = params if exact else [float(v) for v in params]
    x, y = Jet.variables(order, kind)
    f1, f2 = components(u, x, y, vals)
    return f1, f2


def germ_at(u: UnfoldingId, params, point, order: int = JET_ORDER) -> MapGerm:
    """The germ of the unfolding at the source ``point``, recentred."""
    f1, f2 = unfolding_map(u, params, order)
    if f1.kind == EXACT and not all(type(v).__name__ in ("int", "Fraction") for v in point):
        f1, f2 = f1.to_float(), f2.to_float()
    return MapGerm.at_point(f1, f2, point[0], point[1])


X, Y = sp.symbols("x y")
XX, YY = sp.symbols("X Y")


def param_symbols(u: UnfoldingId) -> tuple[sp.Symbol, ...]:
    return sp.symbols(" ".join(UnfoldingId(u).param_names))


@lru_cache(maxsize=None)
def symbolic(u: UnfoldingId, eta_from: int = 1) -> dict:
    """Symbolic ``lambda``, its derivatives, and the ``eta`` tower.

    ``eta_from`` selects the component whose rotated gradient is used as
    the kernel field (1 or 2).  For ``i23`` with ``eta_from = 2`` this is
    ``eta = -x d/dx + y d/dy``.
    """
    u = UnfoldingId(u)
    ps = param_symbols(u)
    f1, f2 = components(u, X, Y, ps)
    f1, f2 = sp.expand(f1), sp.expand(f2)
    lam = sp.expand(sp.diff(f1, X) * sp.diff(f2, Y) - sp.diff(f1, Y) * sp.diff(f2, X))
    g = f1 if eta_from == 1 else f2
    e1, e2 = -sp.diff(g, Y), sp.diff(g, X)

    def eta(h):
        return sp.expand(e1 * sp.diff(h, X) + e2 * sp.diff(h, Y))

    tower = [lam]
    for _ in range(3):
        tower.append(eta(tower[-1]))
    lx, ly = sp.diff(lam, X), sp.diff(lam, Y)
    hess = sp.expand(sp.diff(lam, X, 2) * sp.diff(lam, Y, 2) - sp.diff(lam, X, Y) ** 2)
    return {
        "params": ps,
        "f1": f1,
        "f2": f2,
        "lam": lam,
        "lam_x": lx,
        "lam_y": ly,
        "hess_det": hess,
        "tower": tower,
        "eta": (e1, e2),
    }


@lru_cache(maxsize=None)
def system(u: UnfoldingId, name: str, eta_from: int = 1) -> tuple:
    """Named defining system as a tuple of sympy polynomials in x, y and
    the unfolding parameters."""
    s = symbolic(u, eta_from)
    lam, tower = s["lam"], s["tower"]
    systems = {
        "beaks_lips": (lam, s["lam_x"], s["lam_y"]),
        "goose": (lam, s["lam_x"], s["lam_y"], s["hess_det"]),
        "swallowtail": (lam, tower[1], tower[2]),
        "butterfly": (lam, tower[1], tower[2], tower[3]),
        "gulls": (lam, s["lam_x"], s["lam_y"], tower[2]),
    }
    return systems[name]


@lru_cache(maxsize=None)
def lambdified(u: UnfoldingId, name: str, eta_from: int = 1, module: str = "mpmath",
               wrt: tuple[str, ...] = ("x", "y")):
    """Callable ``(x, y, *params) -> (values, jacobian)`` for a system.

    The Jacobian is taken with respect to the variables named in ``wrt``
    (source coordinates and possibly some parameters).
    """
    eqs = system(u, name, eta_from)
    ps = param_symbols(u)
    allvars = (X, Y) + tuple(ps)
    byname = {str(v): v for v in allvars}
    jac = [[sp.diff(e, byname[w]) for w in wrt] for e in eqs]
    fv = sp.lambdify(allvars, list(eqs), module)
    fj = sp.lambdify(allvars, jac, module)
    return fv, fj
