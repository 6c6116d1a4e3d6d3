"""Jet criteria for A-types of plane-to-plane germs.

Corank-one germs are recognised from the Jacobian ``lambda``, a kernel
field ``eta`` and (for a rank-one Hessian of ``lambda``) a constant kernel
direction ``theta`` of that Hessian.  Corank-two germs are sorted by the
pencil of their quadratic parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .jets import DEFAULT_ORDER, EXACT, FLOAT, Jet
from .parse import parse_germ

# relative zero threshold for floating germs
FLOAT_ZERO = 1e-10


class Tag(str, Enum):
    REGULAR = "regular"
    FOLD = "fold"
    CUSP = "cusp"
    SWALLOWTAIL = "swallowtail"
    LIPS = "lips"
    BEAKS = "beaks"
    BUTTERFLY = "butterfly"
    GULLS = "gulls"
    GOOSE = "goose"
    SHARKSFIN = "sharksfin"
    DELTOID = "deltoid"
    ODD_SHARKSFIN = "odd_sharksfin"
    I23_CANDIDATE = "i23_candidate"
    DELTOID_TWO_JET = "deltoid_two_jet"
    HYPERBOLIC_PAIR_DEGENERATE = "hyperbolic_pair_degenerate"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class SingularityClass:
    tag: Tag
    reason: str | None = None

    @property
    def resolved(self) -> bool:
        return self.tag is not Tag.UNRESOLVED

    def __str__(self) -> str:
        return self.tag.value if self.reason is None else f"{self.tag.value}({self.reason})"


def unresolved(reason: str) -> SingularityClass:
    return SingularityClass(Tag.UNRESOLVED, reason)


@dataclass(frozen=True)
class MapGerm:
    """A germ ``(f1, f2): (R^2, 0) -> (R^2, 0)`` given by two jets."""

    f1: Jet
    f2: Jet

    def __post_init__(self):
        if self.f1.kind != self.f2.kind:
            raise TypeError("germ components must share a scalar kind")
        if self.f1[0, 0] != 0 or self.f2[0, 0] != 0:
            raise ValueError("a map-germ must send the origin to the origin")

    @classmethod
    def parse(cls, text: str, order: int = DEFAULT_ORDER) -> "MapGerm":
        return cls(*parse_germ(text, order))

    @classmethod
    def at_point(cls, f1: Jet, f2: Jet, x0, y0) -> "MapGerm":
        """Germ of the polynomial map ``(f1, f2)`` at ``(x0, y0)``, recentred at 0."""
        g1 = f1.translate(x0, y0)
        g2 = f2.translate(x0, y0)
        g1.coeffs[0, 0] = 0
        g2.coeffs[0, 0] = 0
        return cls(g1, g2)

    @property
    def kind(self) -> str:
        return self.f1.kind

    @property
    def order(self) -> int:
        return min(self.f1.order, self.f2.order)

    def conjugate(self, sigma: tuple[Jet, Jet], tau: tuple[Jet, Jet]) -> "MapGerm":
        """Return ``tau o f o sigma`` (both maps origin preserving)."""
        g1 = self.f1.compose(*sigma)
        g2 = self.f2.compose(*sigma)
        return MapGerm(tau[0].compose(g1, g2), tau[1].compose(g1, g2))

    def to_float(self) -> "MapGerm":
        return MapGerm(self.f1.to_float(), self.f2.to_float())

    def to_json(self) -> dict:
        return {"f1": self.f1.to_json(), "f2": self.f2.to_json()}

    @classmethod
    def from_json(cls, data) -> "MapGerm":
        return cls(Jet.from_json(data["f1"]), Jet.from_json(data["f2"]))


@dataclass(frozen=True)
class KernelField:
    eta1: Jet
    eta2: Jet

    def apply(self, g: Jet) -> Jet:
        return g.directional(self.eta1, self.eta2)

    def at_origin(self) -> tuple:
        return (self.eta1[0, 0], self.eta2[0, 0])


@dataclass
class CriteriaReport:
    lambda0: object
    dlambda0: tuple
    eta_tower: list = field(default_factory=list)
    hess_det: object = None
    hess_rank: int | None = None
    theta3lambda0: object = None

    def to_json(self) -> dict:
        def enc(v):
            if v is None:
                return None
            if isinstance(v, (tuple, list)):
                return [enc(u) for u in v]
            if isinstance(v, (int, Fraction)):
                return str(v)
            return float(v)

        return {
            "lambda0": enc(self.lambda0),
            "dlambda0": enc(self.dlambda0),
            "eta_tower": enc(self.eta_tower),
            "hess_det": enc(self.hess_det),
            "hess_rank": self.hess_rank,
            "theta3lambda0": enc(self.theta3lambda0),
        }


class _Zero:
    """Zero test: exact for rational germs, scaled threshold for floats."""

    def __init__(self, f: MapGerm, scale: float | None = None):
        self.exact = f.kind == EXACT
        if scale is None:
            scale = max(f.f1.max_abs_coeff(), f.f2.max_abs_coeff())
        self.scale = max(1.0, float(scale))

    def __call__(self, v, degree: int = 2) -> bool:
        if self.exact:
            return v == 0
        return abs(float(v)) < FLOAT_ZERO * self.scale ** degree

    def sign(self, v, degree: int = 2) -> int:
        if self(v, degree):
            return 0
        return 1 if v > 0 else -1


def _balanced(f: MapGerm) -> MapGerm:
    """Rescale source and target so coefficient sizes stay near one.

    ``x -> x / rho`` together with a constant factor per component is an
    A-equivalence, so recognition is unaffected while fixed float thresholds
    become meaningful.
    """
    parts = []
    rho = 1.0
    for g in (f.f1, f.f2):
        sizes = [max(abs(float(v)) for v in g.homogeneous_part(d).values())
                 for d in range(g.order + 1)]
        d0 = next((d for d, v in enumerate(sizes) if v > 0), None)
        parts.append((d0, sizes))
        if d0 is None:
            continue
        for d in range(d0 + 1, g.order + 1):
            if sizes[d] > 0:
                rho = max(rho, (sizes[d] / sizes[d0]) ** (1.0 / (d - d0)))
    x, y = Jet.variables(f.order, FLOAT)
    xs, ys = x.scale(1 / rho), y.scale(1 / rho)
    out = []
    for g, (d0, sizes) in zip((f.f1, f.f2), parts):
        h = g.to_float().compose(xs, ys)
        if d0 is not None:
            h = h.scale(rho ** d0 / sizes[d0])
        out.append(h)
    return MapGerm(out[0], out[1])


def _linear_rank(f: MapGerm) -> int:
    zero = _Zero(f)
    m = [[f.f1[1, 0], f.f1[0, 1]], [f.f2[1, 0], f.f2[0, 1]]]
    if all(zero(v, 1) for row in m for v in row):
        return 0
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return 1 if zero(det, 2) else 2


def corank(f: MapGerm) -> int:
    """``2 - rank`` of the linear part of ``f``."""
    return 2 - _linear_rank(f)


def jacobian_jet(f: MapGerm) -> Jet:
    """The Jacobian determinant ``f1_x f2_y - f1_y f2_x`` (order ``N - 1``)."""
    return f.f1.dx() * f.f2.dy() - f.f1.dy() * f.f2.dx()


def _rotated_gradient(g: Jet) -> KernelField:
    return KernelField(-g.dy(), g.dx())


def kernel_field(f: MapGerm) -> KernelField:
    """A vector field spanning ``ker df`` along the singular set.

    Uses ``(-f1_y, f1_x)`` when ``grad f1(0) != 0`` and ``(-f2_y, f2_x)``
    otherwise.  For floating germs the component with the larger gradient at
    0 is used, which only rescales ``eta`` by a unit.

    For corank-two germs the rotated gradient of a component with a
    nondegenerate Hessian at 0 is used (``f2`` preferred); for the I_{2,3}
    unfolding this is ``eta = -x d/dx + y d/dy``.
    """
    zero = _Zero(f)
    r = corank(f)
    if r <= 1:
        g1 = f.f1.gradient_at_origin()
        g2 = f.f2.gradient_at_origin()
        if zero.exact:
            use_f1 = not (g1[0] == 0 and g1[1] == 0)
        else:
            use_f1 = math.hypot(*map(float, g1)) >= math.hypot(*map(float, g2))
        return _rotated_gradient(f.f1 if use_f1 else f.f2)
    for g in (f.f2, f.f1):
        (h11, h12), (_, h22) = g.hessian_at_origin()
        if not zero(h11 * h22 - h12 * h12, 2):
            return _rotated_gradient(g)
    raise ValueError("corank-2 germ without a component of nondegenerate Hessian; "
                     "no kernel-field convention registered")


def _third_derivative(lam: Jet, theta: tuple) -> object:
    """``theta^3 lambda (0)`` for a constant field ``theta``."""
    tx, ty = theta
    # d^3/dx^i dy^(3-i) lambda(0) = i! (3-i)! c[i, 3-i]
    total = 0
    for i in range(4):
        total += math.comb(3, i) * tx ** i * ty ** (3 - i) * math.factorial(i) * math.factorial(3 - i) * lam[i, 3 - i]
    return total


def criteria_report(f: MapGerm, depth: int = 4) -> CriteriaReport:
    """Evaluate the recognition quantities at the origin of a corank-one germ."""
    if corank(f) != 1:
        raise ValueError(f"criteria_report needs a corank-1 germ (got corank {corank(f)})")
    if f.order < depth + 1:
        raise ValueError(f"jet order {f.order} too low for eta^{depth} lambda")
    zero = _Zero(f)
    lam = jacobian_jet(f)
    eta = kernel_field(f)
    tower = []
    g = lam
    for _ in range(depth):
        g = eta.apply(g)
        tower.append(g[0, 0])
    (h11, h12), (_, h22) = lam.hessian_at_origin()
    det = h11 * h22 - h12 * h12
    if all(zero(v, 2) for v in (h11, h12, h22)):
        rank = 0
    elif zero(det, 4):
        rank = 1
    else:
        rank = 2
    theta3 = None
    if rank == 1:
        theta = (-h12, h11) if not (zero(h11, 2) and zero(h12, 2)) else (-h22, h12)
        if not zero.exact:
            n = math.hypot(float(theta[0]), float(theta[1]))
            theta = (theta[0] / n, theta[1] / n)
        theta3 = _third_derivative(lam, theta)
    return CriteriaReport(
        lambda0=lam[0, 0],
        dlambda0=lam.gradient_at_origin(),
        eta_tower=tower,
        hess_det=det,
        hess_rank=rank,
        theta3lambda0=theta3,
    )


# tower entry k (eta^k lambda) is polynomial of degree k + 2 in the germ coefficients
def _tower_deg(k: int) -> int:
    return k + 2


def classify_corank1(f: MapGerm) -> SingularityClass:
    """First matching criterion in the order fold, cusp, swallowtail, lips,
    beaks, butterfly, gulls, goose."""
    if corank(f) != 1:
        raise ValueError("classify_corank1 needs a corank-1 germ")
    if f.order < 6:
        raise ValueError("classification needs jets of order >= 6")
    if f.kind == FLOAT:
        f = _balanced(f)
    zero = _Zero(f)
    rep = criteria_report(f)
    t = rep.eta_tower
    z = [zero(t[k], _tower_deg(k + 1)) for k in range(4)]
    dl_zero = zero(rep.dlambda0[0], 2) and zero(rep.dlambda0[1], 2)
    if not z[0]:
        return SingularityClass(Tag.FOLD)
    if not dl_zero:
        if not z[1]:
            return SingularityClass(Tag.CUSP)
        if not z[2]:
            return SingularityClass(Tag.SWALLOWTAIL)
        if not z[3]:
            return SingularityClass(Tag.BUTTERFLY)
        return unresolved("eta^4 lambda(0) = 0")
    det_sign = zero.sign(rep.hess_det, 4)
    if rep.hess_rank == 2 and det_sign > 0:
        return SingularityClass(Tag.LIPS)
    if rep.hess_rank == 2 and det_sign < 0:
        if not z[1]:
            return SingularityClass(Tag.BEAKS)
        if not z[2]:
            return SingularityClass(Tag.GULLS)
        return unresolved("eta^3 lambda(0) = 0 with det H < 0")
    if rep.hess_rank == 1:
        if z[1]:
            return unresolved("eta^2 lambda(0) = 0 with rk H = 1")
        if zero(rep.theta3lambda0, 2):
            return unresolved("theta^3 lambda(0) = 0")
        return SingularityClass(Tag.GOOSE)
    return unresolved("H_lambda(0) = 0")


# -- corank two ---------------------------------------------------------------

def _quadratic(g: Jet) -> tuple:
    return (g[2, 0], g[1, 1], g[0, 2])


def pencil_discriminant(f: MapGerm) -> tuple:
    """Coefficients ``(A, B, C)`` of ``Delta(s, t) = disc(s Q1 + t Q2)``."""
    p1, q1, r1 = _quadratic(f.f1)
    p2, q2, r2 = _quadratic(f.f2)
    A = q1 * q1 - 4 * p1 * r1
    B = 2 * q1 * q2 - 4 * (p1 * r2 + p2 * r1)
    C = q2 * q2 - 4 * p2 * r2
    return A, B, C


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    return np.convolve(a, b)[:n]


def _series_recip(a: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1:k + 1], out[k - 1::-1][:k]) / a[0]
    return out


def _series_sqrt_unit(a: np.ndarray) -> np.ndarray:
    """Square root of a series with ``a[0] = 1``."""
    n = len(a)
    out = np.zeros(n)
    out[0] = 1.0
    for k in range(1, n):
        out[k] = (a[k] - np.dot(out[1:k], out[k - 1:0:-1])) / 2.0
    return out


def _series_compose(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``a(v(s))`` for ``v(0) = 0``."""
    n = len(a)
    out = np.zeros(n)
    for c in a[::-1]:
        out = _series_mul(out, v)
        out[0] += c
    return out


def _odd_order(g1: Jet, g2: Jet, tol: float) -> int | None:
    """Least odd exponent of ``g1`` along its polar curve, measured in the
    coordinate ``s = sqrt(g2)`` of that curve.

    ``g1`` must have quadratic part ``u^2`` and ``g2`` quadratic part ``v^2``
    (u = x, v = y).  Even powers of ``s`` can be absorbed by target changes
    ``g1 -> g1 - phi(g2)``; the first odd power is the invariant.
    """
    n = g1.order
    _, y = Jet.variables(n, FLOAT)
    gu = g1.dx()
    U = Jet.zero(n, FLOAT)
    for _ in range(n + 1):
        U = U - gu.with_order(n).compose(U, y).scale(0.5)
    h = g1.compose(U, y)
    w = g2.compose(U, y)
    hs = np.array([h[0, k] for k in range(n + 1)])
    ws = np.array([w[0, k] for k in range(n + 1)])
    if abs(ws[2]) < tol:
        return None
    unit = np.concatenate([ws[2:], [0.0, 0.0]]) / ws[2]
    r = _series_sqrt_unit(unit)
    # s = v r(v); invert by fixed point v = s / r(v)
    s = np.zeros(n + 1)
    s[1] = 1.0
    v = s.copy()
    for _ in range(n + 1):
        v = _series_mul(s, _series_recip(_series_compose(r, v)))
    H = _series_compose(hs, v)
    for k in range(3, n + 1, 2):
        if abs(H[k]) > tol:
            return k
    return None


def _linear_change(g: Jet, m_inv: np.ndarray) -> Jet:
    n = g.order
    x, y = Jet.variables(n, FLOAT)
    return g.compose(x.scale(m_inv[0, 0]) + y.scale(m_inv[0, 1]),
                     x.scale(m_inv[1, 0]) + y.scale(m_inv[1, 1]))


def _square_root_form(p: float, q: float, r: float) -> tuple[float, float, float]:
    """Write a rank-one form as ``sigma (alpha x + beta y)^2``."""
    if abs(p) >= abs(r):
        sigma = 1.0 if p > 0 else -1.0
        alpha = math.sqrt(abs(p))
        return sigma, alpha, sigma * q / (2 * alpha)
    sigma = 1.0 if r > 0 else -1.0
    beta = math.sqrt(abs(r))
    return sigma, sigma * q / (2 * beta), beta


def hyperbolic_orders(f: MapGerm) -> tuple[int | None, int | None]:
    """Odd orders read on the two kernel lines of a hyperbolic pencil."""
    ff = f.to_float() if f.kind == EXACT else f
    A, B, C = (float(v) for v in pencil_discriminant(ff))
    D = B * B - 4 * A * C
    sq = math.sqrt(D)
    if A == 0 and C == 0:
        members = [(1.0, 0.0), (0.0, 1.0)]
    elif abs(A) >= abs(C):
        members = [((-B + sq) / (2 * A), 1.0), ((-B - sq) / (2 * A), 1.0)]
    else:
        members = [(1.0, (-B + sq) / (2 * C)), (1.0, (-B - sq) / (2 * C))]
    gs, lines = [], []
    for s, t in members:
        g = ff.f1.scale(s) + ff.f2.scale(t)
        sigma, alpha, beta = _square_root_form(*(float(v) for v in _quadratic(g)))
        gs.append(g.scale(sigma))
        lines.append((alpha, beta))
    m = np.array(lines)
    m_inv = np.linalg.inv(m)
    h1 = _linear_change(gs[0], m_inv)
    h2 = _linear_change(gs[1], m_inv)
    x, y = Jet.variables(h1.order, FLOAT)
    # balance coefficient growth by a uniform rescaling of the source
    rho = 1.0
    for h in (h1, h2):
        for d in range(3, h.order + 1):
            top = max(abs(v) for v in h.homogeneous_part(d).values())
            if top > 0:
                rho = max(rho, top ** (1.0 / (d - 2)))
    h1 = h1.compose(x.scale(1 / rho), y.scale(1 / rho)).scale(rho * rho)
    h2 = h2.compose(x.scale(1 / rho), y.scale(1 / rho)).scale(rho * rho)
    tol = 1e-11
    k1 = _odd_order(h1, h2, tol)
    # swap roles so the second member has quadratic part u^2
    k2 = _odd_order(h2.compose(y, x), h1.compose(y, x), tol)
    return k1, k2


def classify_corank2_2jet(f: MapGerm) -> SingularityClass:
    """Sort a corank-two germ by the pencil of its quadratic parts.

    Hyperbolic pencils are sub-classified by the odd orders on the two kernel
    lines; (3, 3) is sharksfin, (3, 5) odd-shaped sharksfin.  This last step
    is a heuristic modelled on the normal forms, not a full recognition.
    """
    if corank(f) != 2:
        raise ValueError("classify_corank2_2jet needs a corank-2 germ")
    p1, q1, r1 = _quadratic(f.f1)
    p2, q2, r2 = _quadratic(f.f2)
    zero = _Zero(f, max(abs(float(v)) for v in (p1, q1, r1, p2, q2, r2)))
    minors = (p1 * q2 - q1 * p2, p1 * r2 - r1 * p2, q1 * r2 - r1 * q2)
    if all(zero(m, 2) for m in minors):
        return unresolved("quadratic parts linearly dependent")
    A, B, C = pencil_discriminant(f)
    D = B * B - 4 * A * C
    if all(zero(v, 2) for v in (A, B, C)):
        return unresolved("pencil discriminant vanishes")
    sign = zero.sign(D, 4)
    if sign < 0:
        return SingularityClass(Tag.DELTOID_TWO_JET)
    if sign == 0:
        return SingularityClass(Tag.I23_CANDIDATE)
    k = hyperbolic_orders(f)
    if k == (3, 3):
        return SingularityClass(Tag.SHARKSFIN)
    if sorted(k, key=lambda v: v or 99) == [3, 5]:
        return SingularityClass(Tag.ODD_SHARKSFIN)
    return SingularityClass(Tag.HYPERBOLIC_PAIR_DEGENERATE)


def classify(f: MapGerm) -> SingularityClass:
    """Dispatch on corank."""
    r = corank(f)
    if r == 0:
        return SingularityClass(Tag.REGULAR)
    if r == 1:
        return classify_corank1(f)
    return classify_corank2_2jet(f)


def random_diffeo(rng, order: int = DEFAULT_ORDER, degree: int = 3,
                  kind: str = EXACT, denom: int = 4) -> tuple[Jet, Jet]:
    """A random origin-preserving polynomial map with invertible linear part."""
    def coeff():
        if kind == EXACT:
            return Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, denom + 1)))
        return float(rng.uniform(-1, 1))

    while True:
        lin = [[coeff() for _ in range(2)] for _ in range(2)]
        det = lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0]
        # float draws keep the linear part well conditioned
        if (det != 0) if kind == EXACT else abs(det) > 0.25:
            break
    comps = []
    for r in range(2):
        terms = {(1, 0): lin[r][0], (0, 1): lin[r][1]}
        for d in range(2, degree + 1):
            for i in range(d + 1):
                if rng.random() < 0.5:
                    terms[(i, d - i)] = coeff()
        comps.append(Jet.from_terms(terms, order, kind))
    return comps[0], comps[1]


def germ_from_sequence(components: Sequence[Jet]) -> MapGerm:
    return MapGerm(components[0], components[1])
