"""Numerical continuation of swallowtail branches and series fits.

The swallowtail stratum is cut out by ``lambda = eta lambda = eta^2 lambda = 0``
in the source coordinates and one free parameter.  Branches are traced by
pseudo-arclength continuation in double precision, then every sample is
polished with mpmath Newton before fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from .types import StratumError, UnfoldingId
from .unfoldings import lambdified

FIT_WINDOW = (0.005, 0.08)
FIT_SAMPLES = 200
FIT_DEGREE = 9
POLISH_DPS = 40


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Branch:
    """A swallowtail branch: which parameter is solved for (``free``) and
    which one drives the continuation (``drive``).  The remaining parameters
    are held fixed."""

    unfolding: UnfoldingId
    free: str
    drive: str
    fixed: tuple[tuple[str, float], ...] = ()
    eta_from: int = 2

    def params(self, free_val, drive_val) -> list:
        vals = dict(self.fixed)
        vals[self.free] = free_val
        vals[self.drive] = drive_val
        return [vals[n] for n in UnfoldingId(self.unfolding).param_names]


def sharksfin_branch(sign: int = 1) -> Branch:
    """``a = S(b)`` for ``sign = +1``, ``b = S(a)`` for ``-1``."""
    if sign > 0:
        return Branch(UnfoldingId.SHARKSFIN, "a", "b", (), eta_from=2)
    return Branch(UnfoldingId.SHARKSFIN, "b", "a", (), eta_from=1)


def odd_sharksfin_branch(sign: int, c: float) -> Branch:
    """The branch near ``a = 0`` (``+1``, driven by ``b``) or near ``b = 0``
    (``-1``, driven by ``a``) at fixed ``c``."""
    if sign > 0:
        return Branch(UnfoldingId.ODD_SHARKSFIN, "a", "b", (("c", c),), eta_from=2)
    return Branch(UnfoldingId.ODD_SHARKSFIN, "b", "a", (("c", c),), eta_from=1)


def asymptotic_seed(branch: Branch, t: float) -> tuple[float, float, float]:
    """Leading-order ``(x, y, free)`` on a branch for small drive value ``t``.

    The sharksfin branch is ``x ~ -t^3/4, y ~ -t^2/4, a ~ t^4/16``; the
    odd-shaped branches follow from it by weighted rescaling.
    """
    u = UnfoldingId(branch.unfolding)
    c = dict(branch.fixed).get("c", 1.0)
    if u is UnfoldingId.SHARKSFIN:
        c = 1.0
    if branch.free == "a":
        # x^2 + c y^3 + a y: x = c^(-2/5) X, y = c^(-3/5) Y maps onto the sharksfin
        return (-c * c * t ** 3 / 4, -c * t * t / 4, c ** 3 * t ** 4 / 16)
    return (-t * t / 4, -t ** 3 / 4, t ** 4 / 16)


@lru_cache(maxsize=None)
def _funcs(branch_key: tuple, module: str):
    u, free, drive, eta_from = branch_key
    return lambdified(UnfoldingId(u), "swallowtail", eta_from, module, ("x", "y", free, drive))


def _eval(branch: Branch, z, module="numpy"):
    fv, fj = _funcs((branch.unfolding, branch.free, branch.drive, branch.eta_from), module)
    x, y, p, t = z
    args = [x, y] + branch.params(p, t)
    return fv(*args), fj(*args)


def _float_eval(branch: Branch, z):
    f, j = _eval(branch, [float(v) for v in z])
    return np.array(f, dtype=float), np.array(j, dtype=float)


def newton_fixed(branch: Branch, seed, t, tol: float = 1e-13, maxiter: int = 60) -> np.ndarray:
    """Solve for ``(x, y, free)`` at fixed drive value ``t`` in double precision."""
    v = np.array(seed, dtype=float)
    for _ in range(maxiter):
        f, j = _float_eval(branch, [*v, t])
        step = np.linalg.lstsq(j[:, :3], -f, rcond=None)[0]
        v = v + step
        scale = np.abs(v) + 1e-300
        if np.all(np.abs(step) <= tol * np.maximum(scale, np.abs(v).max() * 1e-6)):
            return v
    raise ContinuationError(f"Newton did not converge at {branch.drive} = {t}")


def polish(branch: Branch, seed, t, dps: int = POLISH_DPS, maxiter: int = 60) -> list:
    """mpmath Newton at fixed drive value; returns ``[x, y, free]`` as mpf."""
    with mp.workdps(dps):
        t = mp.mpf(t)
        v = mp.matrix([mp.mpf(s) for s in seed])
        eps = mp.mpf(10) ** (-(dps - 5))
        for _ in range(maxiter):
            f, j = _eval(branch, [v[0], v[1], v[2], t], module="mpmath")
            J = mp.matrix([[j[r][k] for k in range(3)] for r in range(3)])
            step = mp.lu_solve(J, -mp.matrix(f))
            v = v + step
            if all(abs(step[k]) <= eps * (abs(v[k]) + eps) for k in range(3)):
                return [+v[0], +v[1], +v[2]]
    raise ContinuationError(f"mpmath polish did not converge at {branch.drive} = {t}")


@dataclass
class Trace:
    branch: Branch
    points: np.ndarray  # rows (x, y, free, drive)
    steps: int = 0
    rejected: int = 0

    def interpolate(self, t: float) -> np.ndarray:
        d = self.points[:, 3]
        order = np.argsort(d)
        d = d[order]
        pts = self.points[order]
        return np.array([np.interp(t, d, pts[:, k]) for k in range(3)])


def continue_branch(branch: Branch, t0: float, t1: float, h0: float = 1e-3,
                    hmax: float = 0.02, seed=None, max_steps: int = 20000) -> Trace:
    """Pseudo-arclength continuation from drive value ``t0`` to ``t1``.

    Starts from the asymptotic seed (or ``seed``) corrected at ``t0``.  The
    step length adapts to the corrector's iteration count.
    """
    start = asymptotic_seed(branch, t0) if seed is None else seed
    v = newton_fixed(branch, start, t0)
    z = np.array([*v, t0])
    direction = math.copysign(1.0, t1 - t0)
    pts = [z.copy()]
    f, j = _float_eval(branch, z)
    tau = _tangent(j, direction)
    h = h0
    steps = rejected = 0
    while (t1 - z[3]) * direction > 0:
        if steps > max_steps:
            raise ContinuationError("continuation step budget exhausted")
        pred = z + h * tau
        ok, znew, iters = _correct(branch, pred, tau)
        if not ok:
            rejected += 1
            h *= 0.5
            if h < 1e-12:
                raise ContinuationError(f"step size collapsed at {branch.drive} = {z[3]:.6g}")
            continue
        _, jn = _float_eval(branch, znew)
        tnew = _tangent(jn, direction)
        if np.dot(tnew, tau) < 0:
            tnew = -tnew
        z, tau = znew, tnew
        pts.append(z.copy())
        steps += 1
        if iters <= 3:
            h = min(h * 1.5, hmax)
        elif iters > 6:
            h *= 0.5
    return Trace(branch, np.array(pts), steps, rejected)


def _tangent(j: np.ndarray, direction: float) -> np.ndarray:
    _, _, vt = np.linalg.svd(j)
    tau = vt[-1]
    if tau[3] * direction < 0:
        tau = -tau
    return tau / np.linalg.norm(tau)


def _correct(branch: Branch, pred: np.ndarray, tau: np.ndarray, maxiter: int = 12):
    z = pred.copy()
    for it in range(1, maxiter + 1):
        f, j = _float_eval(branch, z)
        F = np.append(f, np.dot(tau, z - pred))
        J = np.vstack([j, tau])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return False, z, it
        z = z + step
        if np.linalg.norm(step) <= 1e-13 * (1 + np.linalg.norm(z)):
            return True, z, it
    return False, z, maxiter


def sample_branch(branch: Branch, ts, dps: int = POLISH_DPS, h0: float = 1e-3) -> list:
    """Polished ``(t, x, y, free)`` samples (mpf) at the drive values ``ts``."""
    ts = sorted(float(t) for t in ts)
    trace = continue_branch(branch, ts[0], ts[-1], h0=h0,
                            hmax=max((ts[-1] - ts[0]) / 20, 1e-4))
    out = []
    for t in ts:
        v = polish(branch, trace.interpolate(t), t, dps)
        out.append((mp.mpf(t), *v))
    return out


def vandermonde_fit(ts, vals, degree: int = FIT_DEGREE, dps: int = 50) -> list[float]:
    """Least-squares polynomial coefficients ``c_0 .. c_degree`` in extended
    precision."""
    with mp.workdps(dps):
        A = mp.matrix([[mp.mpf(t) ** k for k in range(degree + 1)] for t in ts])
        rhs = mp.matrix([mp.mpf(v) for v in vals])
        coef, _ = mp.qr_solve(A, rhs)
        return [float(coef[k]) for k in range(degree + 1)]


@dataclass
class SeriesFit:
    unfolding: UnfoldingId
    coefficients: list[float] = field(default_factory=list)
    window: tuple[float, float] = FIT_WINDOW
    samples: int = 0
    max_residual: float = 0.0
    contact_orders: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "unfolding": self.unfolding.value,
            "coefficients": self.coefficients,
            "window": list(self.window),
            "samples": self.samples,
            "max_residual": self.max_residual,
            "contact_orders": self.contact_orders,
        }


def _residual(branch: Branch, sample) -> float:
    with mp.workdps(POLISH_DPS):
        t, x, y, p = sample
        f, _ = _eval(branch, [x, y, p, t], module="mpmath")
        return float(max(abs(v) for v in f))


def fit_sharksfin(window=FIT_WINDOW, samples: int = FIT_SAMPLES, degree: int = FIT_DEGREE) -> SeriesFit:
    branch = sharksfin_branch(+1)
    ts = np.linspace(window[0], window[1], samples)
    data = sample_branch(branch, ts)
    coefs = vandermonde_fit([d[0] for d in data], [d[3] for d in data], degree)
    res = max(_residual(branch, d) for d in data)
    return SeriesFit(UnfoldingId.SHARKSFIN, coefs, tuple(window), samples, res)


def _loglog_order(ts, vals) -> float:
    lt = np.log(np.abs(np.asarray(ts, dtype=float)))
    lv = np.log(np.abs(np.asarray([float(v) for v in vals])))
    return float(np.polyfit(lt, lv, 1)[0])


def fit_odd_sharksfin(c: float = 0.1, b_fixed: float = 0.1, samples: int = 40) -> SeriesFit:
    """Leading contact orders of the two swallowtail branches with the
    beaks planes.

    * ``a_branch_in_b``: order of ``a`` in ``b`` on the branch near ``a = 0``
      at fixed ``c`` (tangency along the c-axis);
    * ``b_branch_in_a``: order of ``b`` in ``a`` on the branch near ``b = 0``;
    * ``a_branch_in_c``: order of ``a`` in ``c`` at fixed ``b`` on the branch
      near ``a = 0`` (tangency along the b-axis, measured as ``c -> 0``).
    """
    orders: dict[str, float] = {}
    ts = np.geomspace(2e-3, 2e-2, samples)
    if c != 0:
        data = sample_branch(odd_sharksfin_branch(+1, c), ts)
        orders["a_branch_in_b"] = _loglog_order([d[0] for d in data], [d[3] for d in data])
    data = sample_branch(odd_sharksfin_branch(-1, c), ts)
    orders["b_branch_in_a"] = _loglog_order([d[0] for d in data], [d[3] for d in data])
    cs = np.geomspace(1e-3, 1e-2, samples)
    avals = []
    for cv in cs:
        (_, _, _, a), = sample_branch(odd_sharksfin_branch(+1, float(cv)), [b_fixed])
        avals.append(a)
    orders["a_branch_in_c"] = _loglog_order(cs, avals)
    return SeriesFit(UnfoldingId.ODD_SHARKSFIN, [], (float(ts[0]), float(ts[-1])), samples,
                     0.0, orders)


def series_fit_swallowtail(u: UnfoldingId, **kw) -> SeriesFit:
    u = UnfoldingId(u)
    if u is UnfoldingId.SHARKSFIN:
        return fit_sharksfin(**kw)
    if u is UnfoldingId.ODD_SHARKSFIN:
        return fit_odd_sharksfin(**kw)
    raise StratumError("series fits exist only for the sharksfin unfoldings")


def odd_sharksfin_swallowtail_point(sign: int, t: float, c: float) -> tuple[float, float, float]:
    """A point of the odd-shaped sharksfin swallowtail stratum, found by
    continuation from the small-``t`` asymptotics."""
    if t == 0:
        raise StratumError("swallowtail branch parameter must be nonzero")
    if sign > 0 and c == 0:
        raise StratumError("the branch near a = 0 needs c != 0 for a b-parametrization")
    branch = odd_sharksfin_branch(sign, c)
    t0 = math.copysign(min(abs(t), 1e-3), t)
    trace = continue_branch(branch, t0, t, h0=min(1e-3, abs(t) / 10))
    v = newton_fixed(branch, trace.interpolate(t), t)
    return tuple(float(p) for p in branch.params(v[2], t))
