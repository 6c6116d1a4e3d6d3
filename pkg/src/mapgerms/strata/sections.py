"""Plane sections of the bifurcation diagrams."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .formulas import parametrize_stratum, series_value
from .series import ContinuationError, continue_branch, odd_sharksfin_branch
from .types import DomainError, StratumError, StratumId, StratumTag, UnfoldingId


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("empty window")

    def contains(self, x, y) -> np.ndarray:
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)

    @property
    def radius(self) -> float:
        return max(abs(self.xmin), abs(self.xmax), abs(self.ymin), abs(self.ymax))


@dataclass
class SectionCurve:
    """One labeled branch of a section.

    ``polylines`` hold rows ``(t, u, v)``: the internal sweep coordinate and
    the two plane coordinates (``(a, b)`` for ``c = const`` sections,
    ``(b, c)`` for the ``a = 0`` plane).  Marked points have a single row.
    """

    stratum: StratumId
    kind: str  # "curve" or "point"
    polylines: list[np.ndarray] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.polylines


@dataclass
class Section:
    unfolding: UnfoldingId
    plane: str  # "c" or "a=0"
    value: float | None
    window: Rect
    curves: list[SectionCurve] = field(default_factory=list)

    def labeled(self, tag: StratumTag, kind: str | None = None) -> list[SectionCurve]:
        return [c for c in self.curves if c.stratum.tag is tag and (kind is None or c.kind == kind)]

    def points(self, tag: StratumTag) -> list[tuple[float, float]]:
        return [(float(p[0, 1]), float(p[0, 2])) for c in self.labeled(tag, "point") for p in c.polylines]

    def to_rows(self) -> list[dict]:
        rows = []
        cname = "c"
        for curve in self.curves:
            for k, poly in enumerate(curve.polylines):
                for t, u, v in poly:
                    row = {"stratum": curve.stratum.tag.value, "sign": curve.stratum.sign_str,
                           "piece": k, "internal": _r(t)}
                    if self.plane == "a=0":
                        row.update(a=0.0, b=_r(u), c=_r(v))
                    else:
                        row.update(a=_r(u), b=_r(v))
                        if self.unfolding is not UnfoldingId.SHARKSFIN:
                            row[cname] = _r(self.value)
                    rows.append(row)
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["stratum", "sign", "piece", "internal", "a", "b", "c"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in self.to_rows():
            w.writerow({k: row.get(k, "") for k in cols})
        return buf.getvalue()

    def to_json(self) -> str:
        data = {
            "unfolding": self.unfolding.value,
            "plane": self.plane,
            "value": self.value,
            "window": [self.window.xmin, self.window.xmax, self.window.ymin, self.window.ymax],
            "curves": [
                {
                    "stratum": c.stratum.tag.value,
                    "sign": c.stratum.sign_str,
                    "kind": c.kind,
                    "polylines": [[[_r(v) for v in row] for row in p] for p in c.polylines],
                }
                for c in self.curves
            ],
        }
        return json.dumps(data, sort_keys=True, indent=1)


def _r(v) -> float:
    return float(round(float(v), 12))


def _clip(t: np.ndarray, u: np.ndarray, v: np.ndarray, w: Rect) -> list[np.ndarray]:
    """Split a sampled curve into the runs lying inside the window."""
    ok = w.contains(u, v) & np.isfinite(u) & np.isfinite(v)
    runs, start = [], None
    for k, inside in enumerate(ok):
        if inside and start is None:
            start = k
        if not inside and start is not None:
            if k - start >= 2:
                runs.append(np.column_stack([t[start:k], u[start:k], v[start:k]]))
            start = None
    if start is not None and len(ok) - start >= 2:
        runs.append(np.column_stack([t[start:], u[start:], v[start:]]))
    return runs


def _sweep(u: UnfoldingId, tag: StratumTag, sign: int, ys: np.ndarray, c: float):
    a = np.full(len(ys), np.nan)
    b = np.full(len(ys), np.nan)
    for k, y in enumerate(ys):
        try:
            p = parametrize_stratum(u, StratumId(tag, sign), (float(y), c)).numeric()
        except DomainError:
            continue
        a[k], b[k] = p[0], p[1]
    return a, b


def _point(tag, sign, u, v, t) -> SectionCurve:
    return SectionCurve(StratumId(tag, sign), "point", [np.array([[t, u, v]], dtype=float)])


def _i23_section(c: float, w: Rect, n: int) -> list[SectionCurve]:
    R = w.radius
    ymax = abs(c) + math.sqrt(R) + 1.0
    out = []
    ranges = {
        StratumTag.BEAKS_LIPS: (-c / 3, ymax),
        StratumTag.SWALLOWTAIL: (-c / 4, ymax),
        StratumTag.CUSP_FOLD: (-ymax, 0.0),
    }
    for tag, (lo, hi) in ranges.items():
        lo = max(lo, -ymax)
        # cluster samples near the ends where the curves turn fast
        s = np.linspace(0.0, 1.0, n)
        ys = lo + (hi - lo) * (0.5 - 0.5 * np.cos(np.pi * s))
        for sign in (1, -1):
            a, b = _sweep(UnfoldingId.I23, tag, sign, ys, c)
            out.append(SectionCurve(StratumId(tag, sign), "curve", _clip(ys, a, b, w)))
    if c > 0:
        for tag in (StratumTag.GOOSE, StratumTag.BUTTERFLY):
            for sign in (1, -1):
                a, b, _ = parametrize_stratum(UnfoldingId.I23, StratumId(tag, sign), (c,)).numeric()
                if w.contains(a, b):
                    out.append(_point(tag, sign, a, b, c))
    if c != 0 and w.contains(0.0, 0.0):
        tag = StratumTag.SHARKSFIN_AXIS if c > 0 else StratumTag.DELTOID_AXIS
        out.append(_point(tag, 1, 0.0, 0.0, c))
    return out


def _sharksfin_section(w: Rect, n: int) -> list[SectionCurve]:
    R = w.radius
    ts = np.linspace(-R, R, n)
    zero = np.zeros_like(ts)
    S = np.array([float(series_value(float(t))) for t in ts])
    return [
        SectionCurve(StratumId(StratumTag.BEAKS_LINES, 1), "curve", _clip(ts, zero, ts, w)),
        SectionCurve(StratumId(StratumTag.BEAKS_LINES, -1), "curve", _clip(ts, ts, zero, w)),
        SectionCurve(StratumId(StratumTag.SWALLOWTAIL, 1), "curve", _clip(ts, S, ts, w)),
        SectionCurve(StratumId(StratumTag.SWALLOWTAIL, -1), "curve", _clip(ts, ts, S, w)),
    ]


def _odd_branch(sign: int, c: float, w: Rect, n: int) -> list[np.ndarray]:
    R = w.radius
    pieces = []
    for direction in (1.0, -1.0):
        t0 = direction * 1e-3
        try:
            tr = continue_branch(odd_sharksfin_branch(sign, c), t0, direction * R, h0=1e-3,
                                 hmax=R / n * 4)
        except ContinuationError:
            continue
        pts = tr.points
        t = pts[:, 3]
        free = pts[:, 2]
        a, b = (free, t) if sign > 0 else (t, free)
        order = np.argsort(t)
        pieces.append((t[order], a[order], b[order]))
    if not pieces:
        return []
    t = np.concatenate([p[0] for p in pieces])
    a = np.concatenate([p[1] for p in pieces])
    b = np.concatenate([p[2] for p in pieces])
    order = np.argsort(t)
    return _clip(t[order], a[order], b[order], w)


def _odd_sharksfin_section(c: float, w: Rect, n: int) -> list[SectionCurve]:
    R = w.radius
    ts = np.linspace(-R, R, n)
    zero = np.zeros_like(ts)
    out = [
        SectionCurve(StratumId(StratumTag.BEAKS_LINES, 1), "curve", _clip(ts, zero, ts, w)),
        SectionCurve(StratumId(StratumTag.BEAKS_LINES, -1), "curve", _clip(ts, ts, zero, w)),
    ]
    if c == 0:
        out.append(SectionCurve(StratumId(StratumTag.GULLS, 1), "curve", _clip(ts, zero, ts, w)))
    else:
        out.append(SectionCurve(StratumId(StratumTag.SWALLOWTAIL, 1), "curve", _odd_branch(1, c, w, n)))
    out.append(SectionCurve(StratumId(StratumTag.SWALLOWTAIL, -1), "curve", _odd_branch(-1, c, w, n)))
    if c < 0 and w.contains(c * c / 4, 0.0):
        out.append(_point(StratumTag.TACNODE, 1, c * c / 4, 0.0, c))
    return out


def section_curves(u: UnfoldingId, c: float = 0.0, window=(-2.0, 2.0, -2.0, 2.0),
                   resolution: int = 256) -> Section:
    """Intersection of the strata with the plane ``c = const`` (or the
    ``ab``-plane for the two-parameter sharksfin unfolding)."""
    u = UnfoldingId(u)
    if resolution < 16:
        raise StratumError("resolution must be at least 16")
    w = window if isinstance(window, Rect) else Rect(*window)
    n = resolution * 8
    if u is UnfoldingId.I23:
        curves = _i23_section(float(c), w, n)
    elif u is UnfoldingId.SHARKSFIN:
        curves = _sharksfin_section(w, n)
    else:
        curves = _odd_sharksfin_section(float(c), w, n)
    return Section(u, "c", None if u is UnfoldingId.SHARKSFIN else float(c), w, curves)


# closed forms of the i23 strata in the plane a = 0, as b = k c^2 on a c-range
A0_CURVES = [
    (StratumTag.BEAKS_LIPS, 1, 1 / 3, None),
    (StratumTag.SWALLOWTAIL, 1, 16 / 45, "neg"),
    (StratumTag.CUSP_FOLD, 1, 1 / 4, None),
    (StratumTag.CUSP_FOLD, -1, -1 / 5, "pos"),
]


def a0_section(window=(-1.0, 1.0, -1.0, 1.0), resolution: int = 256) -> Section:
    """Strata of the i23 unfolding in the plane ``a = 0``, in ``(b, c)``
    coordinates (window given as ``bmin, bmax, cmin, cmax``).

    Setting the ``a``-coordinate of each parametrization to zero gives
    ``b = c^2/3`` (beaks/lips, ``y = -c/3``), ``b = 16c^2/45`` for ``c < 0``
    (swallowtail, ``y = -4c/15``), ``b = c^2/4`` (cusp+fold, ``y -> 0``),
    ``b = -c^2/5`` for ``c > 0`` (cusp+fold, ``y = -3c/5``) and the c-axis.
    The sign field distinguishes the two cusp+fold curves.
    """
    w = window if isinstance(window, Rect) else Rect(*window)
    n = resolution * 8
    cs = np.linspace(w.ymin, w.ymax, n)
    out = []
    for tag, sign, k, side in A0_CURVES:
        cc = cs
        if side == "neg":
            cc = cs[cs < 0]
        elif side == "pos":
            cc = cs[cs > 0]
        b = k * cc * cc
        out.append(SectionCurve(StratumId(tag, sign), "curve", _clip(cc, b, cc, w)))
    for tag, mask in ((StratumTag.SHARKSFIN_AXIS, cs > 0), (StratumTag.DELTOID_AXIS, cs < 0)):
        cc = cs[mask]
        out.append(SectionCurve(StratumId(tag, 1), "curve", _clip(cc, np.zeros_like(cc), cc, w)))
    return Section(UnfoldingId.I23, "a=0", 0.0, w, out)


def a0_walls(c: float) -> list[tuple[StratumId, float]]:
    """The ``b``-values where the line ``c = const`` of the ``a = 0`` plane
    meets a stratum."""
    walls = []
    for tag, sign, k, side in A0_CURVES:
        if side == "neg" and c >= 0 or side == "pos" and c <= 0:
            continue
        walls.append((StratumId(tag, sign), k * c * c))
    if c != 0:
        walls.append((StratumId(StratumTag.SHARKSFIN_AXIS if c > 0 else StratumTag.DELTOID_AXIS, 1), 0.0))
    return sorted(walls, key=lambda w: w[1])


def _segment_distance(P: np.ndarray, q: np.ndarray) -> float:
    if len(P) == 1:
        return float(np.hypot(*(P[0] - q)))
    A, B = P[:-1], P[1:]
    d = B - A
    L = np.einsum("ij,ij->i", d, d)
    t = np.where(L > 0, np.einsum("ij,ij->i", q - A, d) / np.where(L > 0, L, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    close = A + t[:, None] * d
    return float(np.min(np.hypot(close[:, 0] - q[0], close[:, 1] - q[1])))


def _refine_distance(s: StratumId, pl: np.ndarray, c: float, q: np.ndarray) -> float:
    """Distance to a closed-form i23 branch, refined on the internal
    parameter around the nearest polyline vertex (the chord error of the
    polyline alone is far above the tolerances used here)."""
    k = int(np.argmin(np.hypot(pl[:, 1] - q[0], pl[:, 2] - q[1])))
    lo, hi = pl[max(k - 1, 0), 0], pl[min(k + 1, len(pl) - 1), 0]
    best = math.inf
    for _ in range(6):
        ts = np.linspace(lo, hi, 33)
        ds = []
        for t in ts:
            try:
                a, b, _c = parametrize_stratum(UnfoldingId.I23, s, (float(t), c)).numeric()
            except (DomainError, StratumError, ValueError, ZeroDivisionError):
                ds.append(math.inf)
                continue
            ds.append(math.hypot(a - q[0], b - q[1]))
        j = int(np.argmin(ds))
        best = min(best, ds[j])
        step = ts[1] - ts[0]
        lo, hi = ts[j] - step, ts[j] + step
    return best


def distance_to_strata(u: UnfoldingId, p, resolution: int = 1024) -> tuple[float, StratumId | None]:
    """Distance from the parameter point ``p`` to the strata, measured in
    the section through ``p`` (``c = p[2]``; the ``ab``-plane for the
    sharksfin unfolding), together with the nearest stratum.

    For the odd-shaped sharksfin the gulls axis ``a = c = 0`` is measured in
    three dimensions.
    """
    u = UnfoldingId(u)
    a, b = float(p[0]), float(p[1])
    c = float(p[2]) if len(p) > 2 else 0.0
    R = max(2.0, 2 * abs(a), 2 * abs(b))
    sec = section_curves(u, c, Rect(-R, R, -R, R), resolution)
    q = np.array([a, b])
    best, which = math.inf, None
    for cur in sec.curves:
        for pl in cur.polylines:
            d = _segment_distance(pl[:, 1:3], q)
            if u is UnfoldingId.I23 and cur.kind == "curve" and len(pl) > 1 and d < 1e-2:
                d = min(d, _refine_distance(cur.stratum, pl, c, q))
            if d < best:
                best, which = d, cur.stratum
    if u is UnfoldingId.ODD_SHARKSFIN:
        d = math.hypot(a, c)
        if d < best:
            best, which = d, StratumId(StratumTag.GULLS, 1)
    if u is UnfoldingId.I23 and c == 0:
        d = math.hypot(a, b)
        if d < best:
            best, which = d, None
    return best, which
