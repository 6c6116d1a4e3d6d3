"""Singular sets and apparent contours of polynomial plane maps on a window.

The singular set ``{lambda = 0}`` is extracted by marching squares (saddle
cells resolved by the sign at the cell centre), chained into polylines and
polished by Newton steps along the gradient.  Cusps are located where the
kernel direction becomes tangent to the singular curve; double points are
transverse self-intersections of the image polylines whose two preimages
are far apart in the source.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .jets import FLOAT, Jet
from .recognition import MapGerm

DEFAULT_RESOLUTION = 512
DEFAULT_HALF_WIDTH = 0.6
# source preimages of a double point must be this many grid cells apart
DOUBLE_POINT_CELLS = 10
POLISH_TOL = 1e-10


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class Window:
    xmin: float = -DEFAULT_HALF_WIDTH
    xmax: float = DEFAULT_HALF_WIDTH
    ymin: float = -DEFAULT_HALF_WIDTH
    ymax: float = DEFAULT_HALF_WIDTH
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("empty window")
        if self.resolution < 32:
            raise ValueError("window resolution must be at least 32")

    @classmethod
    def centered(cls, cx: float, cy: float, half: float, resolution: int = DEFAULT_RESOLUTION,
                 half_y: float | None = None) -> "Window":
        hy = half if half_y is None else half_y
        return cls(cx - half, cx + half, cy - hy, cy + hy, resolution)

    def with_resolution(self, resolution: int) -> "Window":
        return Window(self.xmin, self.xmax, self.ymin, self.ymax, resolution)

    @property
    def hx(self) -> float:
        return (self.xmax - self.xmin) / self.resolution

    @property
    def hy(self) -> float:
        return (self.ymax - self.ymin) / self.resolution

    @property
    def cell(self) -> float:
        return max(self.hx, self.hy)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.xmin, self.xmax, self.resolution + 1)
        ys = np.linspace(self.ymin, self.ymax, self.resolution + 1)
        return xs, ys

    def to_json(self) -> dict:
        return {"xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax,
                "resolution": self.resolution}


class PlaneMap:
    """A polynomial map ``(f1, f2)`` with its Jacobian data, evaluated
    globally (the jets hold the complete polynomials)."""

    def __init__(self, f1: Jet, f2: Jet):
        self.f1 = f1.to_float()
        self.f2 = f2.to_float()
        self.f1x, self.f1y = self.f1.dx(), self.f1.dy()
        self.f2x, self.f2y = self.f2.dx(), self.f2.dy()
        self.lam = self.f1x * self.f2y - self.f1y * self.f2x
        self.lamx, self.lamy = self.lam.dx(), self.lam.dy()

    @classmethod
    def of(cls, f) -> "PlaneMap":
        if isinstance(f, PlaneMap):
            return f
        if isinstance(f, MapGerm):
            return cls(f.f1, f.f2)
        f1, f2 = f
        return cls(f1, f2)

    def __call__(self, x, y):
        return self.f1.evaluate(x, y), self.f2.evaluate(x, y)

    def jacobian(self, x, y):
        return (self.f1x.evaluate(x, y), self.f1y.evaluate(x, y),
                self.f2x.evaluate(x, y), self.f2y.evaluate(x, y))

    def kernel(self, x, y) -> np.ndarray:
        """Unit kernel vector of dF: the rotated larger row of the Jacobian."""
        a, b, c, d = self.jacobian(x, y)
        if a * a + b * b >= c * c + d * d:
            k = np.array([-b, a])
        else:
            k = np.array([-d, c])
        n = np.hypot(*k)
        return k / n if n > 0 else k

    def eta_lambda(self, x, y, row: int) -> float:
        """``eta lambda`` with ``eta`` the rotated gradient of component ``row``."""
        if row == 0:
            kx, ky = -self.f1y.evaluate(x, y), self.f1x.evaluate(x, y)
        else:
            kx, ky = -self.f2y.evaluate(x, y), self.f2x.evaluate(x, y)
        return kx * self.lamx.evaluate(x, y) + ky * self.lamy.evaluate(x, y)


# -- level sets ---------------------------------------------------------------

@dataclass
class LevelSet:
    polylines: list[np.ndarray]
    closed: list[bool]
    degenerate_cells: list[tuple[int, int]]
    scale: float


def _edge_point(kind, j, i, xs, ys, V):
    if kind == 0:  # horizontal edge (j, i) -> (j, i + 1)
        v0, v1 = V[j, i], V[j, i + 1]
        t = v0 / (v0 - v1)
        return xs[i] + t * (xs[i + 1] - xs[i]), ys[j]
    v0, v1 = V[j, i], V[j + 1, i]
    t = v0 / (v0 - v1)
    return xs[i], ys[j] + t * (ys[j + 1] - ys[j])


def trace_level_set(func: Callable, grad: Callable, w: Window, polish: bool = True) -> LevelSet:
    """Zero set of ``func`` on the window as polylines.

    ``func`` and ``grad`` are vectorised: ``func(x, y)`` and
    ``grad(x, y) -> (fx, fy)``.
    """
    xs, ys = w.grid()
    X, Y = np.meshgrid(xs, ys)
    V = np.asarray(func(X, Y), dtype=float)
    scale = float(np.max(np.abs(V))) or 1.0
    zero = V == 0
    degenerate = []
    if zero.any():
        hz = zero[:, :-1] & zero[:, 1:]
        vz = zero[:-1, :] & zero[1:, :]
        cells = set()
        for j, i in zip(*np.nonzero(hz)):
            for jj in (j - 1, j):
                if 0 <= jj < w.resolution:
                    cells.add((int(jj), int(i)))
        for j, i in zip(*np.nonzero(vz)):
            for ii in (i - 1, i):
                if 0 <= ii < w.resolution:
                    cells.add((int(j), int(ii)))
        degenerate = sorted(cells)
        # exact zeros are nudged to the positive side
        V = np.where(zero, scale * 1e-300 + 1e-300, V)
    S = V > 0
    hcross = S[:, :-1] != S[:, 1:]
    vcross = S[:-1, :] != S[1:, :]
    # cell edges: bottom h(j,i), right v(j,i+1), top h(j+1,i), left v(j,i)
    bottom, top = hcross[:-1, :], hcross[1:, :]
    left, right = vcross[:, :-1], vcross[:, 1:]
    count = bottom.astype(int) + top + left + right
    adjacency: dict[tuple, list[tuple]] = {}

    def link(e1, e2):
        adjacency.setdefault(e1, []).append(e2)
        adjacency.setdefault(e2, []).append(e1)

    for j, i in zip(*np.nonzero(count)):
        eb, er, et, el = (0, j, i), (1, j, i + 1), (0, j + 1, i), (1, j, i)
        present = [e for e, on in ((eb, bottom[j, i]), (er, right[j, i]), (et, top[j, i]),
                                   (el, left[j, i])) if on]
        if len(present) == 2:
            link(*present)
        elif len(present) == 4:
            xc = 0.5 * (xs[i] + xs[i + 1])
            yc = 0.5 * (ys[j] + ys[j + 1])
            center_pos = float(func(xc, yc)) > 0
            if center_pos == S[j, i]:
                link(eb, er)
                link(et, el)
            else:
                link(el, eb)
                link(er, et)
    polylines, closed = [], []
    seen = set()
    starts = [e for e, nb in adjacency.items() if len(nb) == 1]
    for start in sorted(starts) + sorted(adjacency):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        is_closed = False
        while True:
            nxt = [e for e in adjacency[cur] if e != prev]
            if not nxt:
                break
            n = nxt[0]
            if n in seen:
                is_closed = n == start and len(chain) > 2
                break
            chain.append(n)
            seen.add(n)
            prev, cur = cur, n
        pts = np.array([_edge_point(k, j, i, xs, ys, V) for k, j, i in chain])
        if len(pts) < 2:
            continue
        polylines.append(pts)
        closed.append(is_closed)
    if polish:
        polylines = [_polish(p, func, grad, w, scale) for p in polylines]
    return LevelSet(polylines, closed, degenerate, scale)


def _polish(pts: np.ndarray, func, grad, w: Window, scale: float, iters: int = 4) -> np.ndarray:
    x, y = pts[:, 0].copy(), pts[:, 1].copy()
    x0, y0 = x.copy(), y.copy()
    for _ in range(iters):
        f = np.asarray(func(x, y), dtype=float)
        gx, gy = (np.asarray(g, dtype=float) for g in grad(x, y))
        g2 = gx * gx + gy * gy
        ok = g2 > 0
        step = np.where(ok, f / np.where(ok, g2, 1.0), 0.0)
        x = x - step * gx
        y = y - step * gy
    # reject moves of more than a cell (polishing onto a different branch)
    moved = np.hypot(x - x0, y - y0) > w.cell
    x = np.where(moved, x0, x)
    y = np.where(moved, y0, y)
    return np.column_stack([x, y])


# -- contour diagram ---------------------------------------------------------

@dataclass
class ContourDiagram:
    singular_polylines: list[np.ndarray]
    closed: list[bool]
    contour_polylines: list[np.ndarray]
    cusps: list[tuple[tuple[float, float], tuple[float, float]]]
    double_points: list[dict]
    window: Window
    degenerate_cells: list[tuple] = field(default_factory=list)
    collision: bool = False
    windows: list[Window] = field(default_factory=list)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.singular_polylines), len(self.cusps), len(self.double_points))

    def to_json(self) -> str:
        def r(v):
            return float(round(float(v), 9))

        data = {
            "windows": [v.to_json() for v in (self.windows or [self.window])],
            "counts": dict(zip(("components", "cusps", "double_points"), self.counts)),
            "collision": self.collision,
            "degenerate_cells": [list(c) for c in self.degenerate_cells],
            "cusps": [{"source": [r(v) for v in s], "image": [r(v) for v in t]} for s, t in self.cusps],
            "double_points": [
                {"image": [r(v) for v in d["image"]],
                 "sources": [[r(v) for v in p] for p in d["sources"]]}
                for d in self.double_points
            ],
        }
        return json.dumps(data, sort_keys=True, indent=1)

    def to_csv(self) -> str:
        lines = ["component,closed,index,x,y,u,v"]
        for k, (src, img) in enumerate(zip(self.singular_polylines, self.contour_polylines)):
            for n, (p, q) in enumerate(zip(src, img)):
                lines.append(f"{k},{int(self.closed[k])},{n},{p[0]:.9g},{p[1]:.9g},{q[0]:.9g},{q[1]:.9g}")
        return "\n".join(lines) + "\n"


def singular_set_trace(f, w: Window) -> LevelSet:
    """Marching-squares extraction of ``{lambda = 0}`` on ``w``."""
    F = PlaneMap.of(f)
    return trace_level_set(F.lam.evaluate, lambda x, y: (F.lamx.evaluate(x, y), F.lamy.evaluate(x, y)), w)


def _cusps_on(F: PlaneMap, pts: np.ndarray, closed: bool, w: Window) -> list[tuple]:
    n = len(pts)
    if n < 3:
        return []
    a, b, c, d = F.jacobian(pts[:, 0], pts[:, 1])
    use1 = a * a + b * b >= c * c + d * d
    k = np.where(use1[:, None], np.column_stack([-b, a]), np.column_stack([-d, c]))
    k /= np.maximum(np.hypot(k[:, 0], k[:, 1]), 1e-300)[:, None]
    flips = 0
    for m in range(1, n):
        if np.dot(k[m], k[m - 1]) < 0:
            k[m] = -k[m]
    if closed and np.dot(k[0], k[-1]) < 0:
        flips = 1
    # eta lambda with the continuously oriented kernel field
    gx = F.lamx.evaluate(pts[:, 0], pts[:, 1])
    gy = F.lamy.evaluate(pts[:, 0], pts[:, 1])
    s = k[:, 0] * gx + k[:, 1] * gy
    # sign changes, skipping exact zeros (symmetric grids hit them)
    idx = []
    prev, prev_m = 0.0, None
    first, first_m = 0.0, None
    for m in range(n):
        if s[m] == 0:
            continue
        if first_m is None:
            first, first_m = s[m], m
        if prev_m is not None and prev * s[m] < 0:
            idx.append((prev_m, m))
        prev, prev_m = s[m], m
    if closed and first_m is not None and prev_m != first_m:
        if prev * (-1 if flips else 1) * first < 0:
            idx.append((prev_m, first_m))
    out = []
    for m0, m1 in idx:
        p0, p1 = pts[m0], pts[m1]
        row = 0 if use1[m0] else 1
        p = _refine_cusp(F, 0.5 * (p0 + p1), row, w)
        out.append(p)
    return out


def _refine_cusp(F: PlaneMap, p: np.ndarray, row: int, w: Window) -> np.ndarray:
    """Newton on ``lambda = eta lambda = 0`` with finite-difference Jacobian."""
    z = p.astype(float).copy()
    h = 1e-7 * max(w.cell, 1e-12)

    def G(v):
        return np.array([F.lam.evaluate(v[0], v[1]), F.eta_lambda(v[0], v[1], row)], dtype=float)

    for _ in range(20):
        g = G(z)
        J = np.empty((2, 2))
        for c in range(2):
            e = np.zeros(2)
            e[c] = h
            J[:, c] = (G(z + e) - G(z - e)) / (2 * h)
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            return p
        z = z + step
        if np.hypot(*step) < 1e-14 * (1 + np.hypot(*z)):
            break
    if np.hypot(*(z - p)) > 3 * w.cell or not np.all(np.isfinite(z)):
        return p
    return z


def _segments(polylines: list[np.ndarray], closed: list[bool]):
    segs, owner = [], []
    for k, (pl, cl) in enumerate(zip(polylines, closed)):
        n = len(pl)
        m = n if cl else n - 1
        for i in range(m):
            segs.append((pl[i], pl[(i + 1) % n]))
            owner.append((k, i))
    return segs, owner


def _double_points(src: list[np.ndarray], img: list[np.ndarray], closed: list[bool], w: Window,
                   cell_at: Callable | None = None) -> list[dict]:
    segs, owner = _segments(img, closed)
    ssegs, _ = _segments(src, closed)
    if len(segs) < 2:
        return []
    P0 = np.array([s[0] for s in segs])
    P1 = np.array([s[1] for s in segs])
    S0 = np.array([s[0] for s in ssegs])
    S1 = np.array([s[1] for s in ssegs])
    lo = np.minimum(P0, P1)
    hi = np.maximum(P0, P1)
    lens = np.max(hi - lo, axis=1)
    # the coarsest polyline sets the bucket size: images of different
    # windows may differ in scale by orders of magnitude
    per_line = [np.median(lens[[i for i, o in enumerate(owner) if o[0] == k]])
                for k in sorted({o[0] for o in owner})]
    size = 2 * float(max(per_line))
    if not size > 0:
        size = max(float(np.max(lens)), 1e-300)
    origin = np.min(lo, axis=0)
    ilo = np.floor((lo - origin) / size).astype(np.int64)
    ihi = np.floor((hi - origin) / size).astype(np.int64)
    # long segments are spread over every bucket they touch
    pairs_seg, pairs_key = [], []
    span = (ihi - ilo + 1)
    for n in np.nonzero((span[:, 0] > 1) | (span[:, 1] > 1))[0]:
        for bx in range(ilo[n, 0], ihi[n, 0] + 1):
            for by in range(ilo[n, 1], ihi[n, 1] + 1):
                pairs_seg.append(n)
                pairs_key.append((bx, by))
    single = np.nonzero((span[:, 0] == 1) & (span[:, 1] == 1))[0]
    seg_ids = np.concatenate([single, np.array(pairs_seg, dtype=np.int64)])
    keys = np.concatenate([ilo[single], np.array(pairs_key, dtype=np.int64).reshape(-1, 2)])
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    seg_ids, keys = seg_ids[order], keys[order]
    breaks = np.nonzero(np.any(np.diff(keys, axis=0) != 0, axis=1))[0] + 1
    cell_at = cell_at or (lambda x, y: w.cell)
    found = {}
    for members in np.split(seg_ids, breaks):
        if len(members) < 2:
            continue
        I, J = np.triu_indices(len(members), 1)
        n, m = members[I], members[J]
        da = P1[n] - P0[n]
        db = P1[m] - P0[m]
        den = da[:, 0] * db[:, 1] - da[:, 1] * db[:, 0]
        r = P0[m] - P0[n]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (r[:, 0] * db[:, 1] - r[:, 1] * db[:, 0]) / den
            uu = (r[:, 0] * da[:, 1] - r[:, 1] * da[:, 0]) / den
        hit = (den != 0) & (t >= 0) & (t < 1) & (uu >= 0) & (uu < 1)
        for k in np.nonzero(hit)[0]:
            a, b = int(n[k]), int(m[k])
            key = (a, b) if a < b else (b, a)
            if key in found:
                continue
            sp = S0[a] + t[k] * (S1[a] - S0[a])
            sq = S0[b] + uu[k] * (S1[b] - S0[b])
            min_sep = DOUBLE_POINT_CELLS * min(cell_at(*sp), cell_at(*sq))
            if np.hypot(*(sp - sq)) <= min_sep:
                continue
            found[key] = {
                "image": tuple(P0[a] + t[k] * da[k]),
                "sources": (tuple(sp), tuple(sq)),
                "segments": (owner[a], owner[b]),
            }
    return [found[k] for k in sorted(found)]


def _polish_double_points(F: PlaneMap, dps: list[dict], w: Window,
                          cell_at: Callable | None = None) -> list[dict]:
    """Newton on ``F(p) = F(q)``, ``lambda(p) = lambda(q) = 0``.

    Candidates that do not converge, or whose preimages merge (spurious
    crossings of nearly collinear segments next to a cusp), are dropped;
    survivors are deduplicated by their polished preimage pair.
    """
    cell_at = cell_at or (lambda x, y: w.cell)
    out = []
    for d in dps:
        z = np.array(d["sources"][0] + d["sources"][1], dtype=float)
        z0 = z.copy()
        cell = min(cell_at(*z[:2]), cell_at(*z[2:]))
        min_sep = DOUBLE_POINT_CELLS * cell
        ok = False
        for _ in range(30):
            p, q = z[:2], z[2:]
            fp, fq = F(p[0], p[1]), F(q[0], q[1])
            g = np.array([fp[0] - fq[0], fp[1] - fq[1],
                          F.lam.evaluate(p[0], p[1]), F.lam.evaluate(q[0], q[1])])
            ap, bp, cp, dp_ = F.jacobian(p[0], p[1])
            aq, bq, cq, dq = F.jacobian(q[0], q[1])
            J = np.array([
                [ap, bp, -aq, -bq],
                [cp, dp_, -cq, -dq],
                [F.lamx.evaluate(p[0], p[1]), F.lamy.evaluate(p[0], p[1]), 0, 0],
                [0, 0, F.lamx.evaluate(q[0], q[1]), F.lamy.evaluate(q[0], q[1])],
            ])
            try:
                step = np.linalg.solve(J, -g)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(step)):
                break
            z = z + step
            # rounding noise of the ill-conditioned system near a
            # swallowtail sets the floor
            floor = min(16 * np.finfo(float).eps * np.linalg.cond(J) * (1 + np.linalg.norm(z)), 1e-2 * cell)
            if np.linalg.norm(step) <= max(1e-6 * cell, 2e-10 * (1 + np.linalg.norm(z)), floor):
                ok = True
                break
        if not ok:
            continue
        p, q = z[:2], z[2:]
        if np.hypot(*(p - q)) <= min_sep or np.max(np.abs(z - z0)) > 3 * cell:
            continue
        u, v = F(p[0], p[1])
        out.append({"image": (float(u), float(v)),
                    "sources": (tuple(float(t) for t in p), tuple(float(t) for t in q)),
                    "segments": d["segments"], "cell": cell})
    unique = []
    for d in out:
        pts = np.array(d["sources"])
        if any(min(np.abs(pts - np.array(e["sources"])).max(),
                   np.abs(pts[::-1] - np.array(e["sources"])).max()) < d["cell"] for e in unique):
            continue
        unique.append(d)
    for d in unique:
        del d["cell"]
    return unique


def _intersect(a0, a1, b0, b1):
    """Proper intersection of two segments (half-open in both parameters)."""
    da = a1 - a0
    db = b1 - b0
    den = da[0] * db[1] - da[1] * db[0]
    if den == 0:
        return None
    r = b0 - a0
    t = (r[0] * db[1] - r[1] * db[0]) / den
    u = (r[0] * da[1] - r[1] * da[0]) / den
    if 0 <= t < 1 and 0 <= u < 1:
        return t, u
    return None


def _inside(pl: np.ndarray, w: Window) -> np.ndarray:
    return ((pl[:, 0] > w.xmin) & (pl[:, 0] < w.xmax)
            & (pl[:, 1] > w.ymin) & (pl[:, 1] < w.ymax))


def _clip_out(pl: np.ndarray, closed: bool, w: Window) -> list[tuple[np.ndarray, bool, bool]]:
    """Pieces of ``pl`` outside ``w`` as ``(points, start_cut, end_cut)``."""
    inside = _inside(pl, w)
    if not inside.any():
        return [(pl, False, False)] if not closed else [(pl, None, None)]
    if inside.all():
        return []
    if closed:
        k = int(np.argmax(inside))
        pl, inside = np.roll(pl, -k, axis=0), np.roll(inside, -k)
        pl, inside = np.vstack([pl, pl[:1]]), np.append(inside, True)
    out = []
    n = len(pl)
    i = 0
    while i < n:
        if inside[i]:
            i += 1
            continue
        j = i
        while j < n and not inside[j]:
            j += 1
        if j - i >= 2:
            out.append((pl[i:j], i > 0, j < n))
        i = j
    return out


def _splice(polylines, closed, owners, ins: Window, F: PlaneMap, base: Window):
    """Replace the trace inside ``ins`` by the finer one; ``None`` if the
    ends on the inset boundary cannot be matched one to one."""
    ls = singular_set_trace(F, ins)
    pieces, kinds = [], []  # (points, start_cut, end_cut), owner
    kept = []
    for pl, cl, ow in zip(polylines, closed, owners):
        parts = _clip_out(pl, cl, ins)
        if len(parts) == 1 and parts[0][1] is None:
            kept.append((pl, True, ow))
            continue
        for part in parts:
            pieces.append(part)
            kinds.append(ow)
    for pl, cl in zip(ls.polylines, ls.closed):
        if cl:
            kept.append((pl, True, ins))
        else:
            pieces.append((pl, True, True))
            kinds.append(None)
    outer = [(k, e) for k, (pts, a, b) in enumerate(pieces) if kinds[k] is not None
             for e, cut in ((0, a), (1, b)) if cut]
    inner = [(k, e) for k, (pts, a, b) in enumerate(pieces) if kinds[k] is None for e in (0, 1)]
    if len(outer) != len(inner):
        return None

    def end(k, e):
        pts = pieces[k][0]
        return pts[0] if e == 0 else pts[-1]

    cand = sorted((float(np.hypot(*(end(*a) - end(*b)))), a, b) for a in outer for b in inner)
    partner = {}
    for d, a, b in cand:
        if a in partner or b in partner:
            continue
        if d > 3 * base.cell:
            break
        partner[a], partner[b] = b, a
    if len(partner) != 2 * len(outer):
        return None
    seen = set()
    out = []

    def walk(k, e):
        # enter piece k at end e, follow joins until a free end or back to start
        chain = []
        while k not in seen:
            seen.add(k)
            pts = pieces[k][0] if e == 0 else pieces[k][0][::-1]
            chain.append(pts)
            other = (k, 1 - e)
            if other not in partner:
                return np.vstack(chain), False
            k, e = partner[other]
        return np.vstack(chain), True

    for k, (pts, a, b) in enumerate(pieces):
        if k in seen:
            continue
        if (k, 0) not in partner:
            out.append(walk(k, 0))
        elif (k, 1) not in partner:
            pl, cl = walk(k, 1)
            out.append((pl, cl))
    for k in range(len(pieces)):
        if k not in seen:
            out.append(walk(k, 0))
    polylines = [p for p, _, _ in kept] + [p for p, _ in out]
    closed = [c for _, c, _ in kept] + [c for _, c in out]
    owners = [o for _, _, o in kept] + [base] * len(out)
    return polylines, closed, owners


def apparent_contour(f, w, insets: Sequence[Window] = ()) -> ContourDiagram:
    """Singular set, its image, cusps and double folds of ``f`` on ``w``.

    ``w`` is a :class:`Window` or a sequence of disjoint windows; in the
    latter case double points are searched across all of them, which keeps
    two distant small neighbourhoods at full resolution.

    An inset is a finer window strictly inside the first window.  The trace
    inside it replaces the coarse one, the curves being joined where they
    cross its boundary; an inset whose boundary crossings cannot be matched
    is ignored.
    """
    F = PlaneMap.of(f)
    windows = [w] if isinstance(w, Window) else list(w)
    if not windows:
        raise ValueError("no window given")
    polylines, closed, degenerate, owners = [], [], [], []
    for n, win in enumerate(windows):
        ls = singular_set_trace(F, win)
        polylines += ls.polylines
        closed += ls.closed
        degenerate += [(n,) + c if len(windows) > 1 else c for c in ls.degenerate_cells]
        owners += [win] * len(ls.polylines)
    base = windows[0]
    used = []
    for ins in insets:
        if not (base.xmin < ins.xmin and ins.xmax < base.xmax
                and base.ymin < ins.ymin and ins.ymax < base.ymax):
            continue
        spliced = _splice(polylines, closed, owners, ins, F, base)
        if spliced is None:
            continue
        polylines, closed, owners = spliced
        used.append(ins)
    finest = min(windows, key=lambda v: v.cell)

    def cell_at(x, y):
        for ins in used:
            if ins.xmin <= x <= ins.xmax and ins.ymin <= y <= ins.ymax:
                return ins.cell
        return finest.cell

    windows = windows + used
    images = []
    for pl in polylines:
        u, v = F(pl[:, 0], pl[:, 1])
        images.append(np.column_stack([u, v]))
    cusps = []
    for pl, cl, win in zip(polylines, closed, owners):
        for p in _cusps_on(F, pl, cl, win):
            u, v = F(p[0], p[1])
            cusps.append(((float(p[0]), float(p[1])), (float(u), float(v))))
    dps = _double_points(polylines, images, closed, finest, cell_at)
    dps = _polish_double_points(F, dps, finest, cell_at)
    collision = False
    if cusps and dps:
        # image-space resolution: typical image segment length
        lens = [np.median(np.hypot(*np.diff(im, axis=0).T)) for im in images if len(im) > 1]
        tol = 2 * (float(np.median(lens)) if lens else 0.0)
        for _, ci in cusps:
            for d in dps:
                if math.hypot(ci[0] - d["image"][0], ci[1] - d["image"][1]) < tol:
                    collision = True
    return ContourDiagram(polylines, closed, images, cusps, dps, windows[0], degenerate, collision,
                          windows)


def polynomial_map(f1, f2, order: int = 12) -> PlaneMap:
    """Convenience: ``PlaneMap`` from two callables of ``(x, y)`` evaluated on
    float jets."""
    x, y = Jet.variables(order, FLOAT)
    return PlaneMap(f1(x, y), f2(x, y))


# -- regimes of the unfoldings -------------------------------------------------

class NearStratumError(ContourError):
    pass


def contour_features(u, p, w: Window | None = None, delta: float = 1e-9) -> tuple[int, int, int]:
    """(components, cusps, double points) of the unfolding member at ``p``.

    ``p`` must stay at least ``delta`` away from every stratum, measured in
    the section through ``p``.
    """
    from .strata.sections import distance_to_strata
    from .strata.unfoldings import unfolding_map

    d, which = distance_to_strata(u, p)
    if d < delta:
        label = str(which) if which is not None else "origin"
        raise NearStratumError(f"parameter point {tuple(p)} lies within {d:.3g} of {label}")
    return apparent_contour(unfolding_map(u, tuple(float(v) for v in p)), w or Window()).counts


# walls of the i23 unfolding crossed transversally, with the local change of
# (components, cusps, double points) seen from the side the normal points to
WALL_EPS = (1e-3 * 4.0 ** -5, 1e-3 * 4.0 ** -6)
WALL_WINDOW_FACTOR = 6.0


@dataclass
class WallCrossing:
    stratum: str
    params: tuple[float, ...]
    normal: tuple[float, float]
    sources: list[tuple[float, float]]
    counts: dict  # (eps, resolution) -> (before, after)
    delta: tuple[int, int, int] | None

    @property
    def stable(self) -> bool:
        return self.delta is not None

    def to_json(self) -> dict:
        return {
            "stratum": self.stratum,
            "params": list(self.params),
            "normal": list(self.normal),
            "sources": [list(s) for s in self.sources],
            "counts": [{"eps": e, "resolution": r, "before": list(b), "after": list(a)}
                       for (e, r), (b, a) in sorted(self.counts.items())],
            "delta": list(self.delta) if self.delta is not None else None,
        }


def wall_normal(point) -> np.ndarray:
    """Unit normal in the ``(a, b)``-plane of an i23 wall at a stratum point,
    from the gradient of its implicit equation."""
    from .strata.formulas import IMPLICIT

    a, b, c = (float(v) for v in point.numeric())
    P = IMPLICIT[point.stratum.tag]
    h = 1e-6 * max(1.0, abs(a), abs(b))
    n = np.array([(P((a + h) ** 2, b, c) - P((a - h) ** 2, b, c)) / (2 * h),
                  (P(a * a, b + h, c) - P(a * a, b - h, c)) / (2 * h)])
    norm = np.linalg.norm(n)
    if not norm > 0:
        raise ContourError("wall normal vanishes (singular point of the stratum)")
    return n / norm


def _wall_windows(sources, hw: float, res: int) -> list[Window]:
    ws = [Window(x - hw, x + hw, y - hw, y + hw, res) for x, y in sources]
    if len(ws) == 2 and max(abs(sources[0][0] - sources[1][0]), abs(sources[0][1] - sources[1][1])) < 2 * hw:
        # overlapping squares would trace the same curves twice: use one
        # square covering both
        (x0, y0), (x1, y1) = sources
        half = hw + 0.5 * max(abs(x0 - x1), abs(y0 - y1))
        ws = [Window.centered(0.5 * (x0 + x1), 0.5 * (y0 + y1), half, res)]
    return ws


CORE_FRACTION = 0.8


def _core_counts(d: ContourDiagram, ws: list[Window]) -> tuple[int, int, int]:
    """Counts with cusps and double points restricted to the inner part of
    the windows; features in the margin belong to curves that merely pass
    through and flicker in and out as the parameter moves."""
    def core(pt):
        for w in ws:
            cx, cy = 0.5 * (w.xmin + w.xmax), 0.5 * (w.ymin + w.ymax)
            hx, hy = 0.5 * (w.xmax - w.xmin), 0.5 * (w.ymax - w.ymin)
            if abs(pt[0] - cx) <= CORE_FRACTION * hx and abs(pt[1] - cy) <= CORE_FRACTION * hy:
                return True
        return False

    cusps = sum(1 for src, _ in d.cusps if core(src))
    dps = sum(1 for dp in d.double_points if core(dp["sources"][0]) or core(dp["sources"][1]))
    return (len(d.singular_polylines), cusps, dps)


def wall_crossing(point, eps=WALL_EPS, resolution: int = 256,
                  factor: float = WALL_WINDOW_FACTOR) -> WallCrossing:
    """Count features on both sides of an i23 wall at ``point``.

    The path is the normal segment ``p -/+ eps n``.  The windows are squares
    of half-width ``factor sqrt(eps)`` around the singular source points of
    the wall germ (both of them for cusp+fold, merged when they overlap),
    the scale on which the local transition lives.  Cusps and double points
    are counted in the inner ``CORE_FRACTION`` of the windows.  Counts are
    taken at ``resolution`` and twice that for every ``eps``; ``delta`` is
    reported only when all of them agree.
    """
    from .strata.locate import locate_and_classify
    from .strata.unfoldings import unfolding_map

    loc = locate_and_classify("i23", seed=point)
    p = np.array([float(v) for v in point.numeric()])
    n = wall_normal(point)
    counts = {}
    deltas = set()
    for e in eps:
        hw = factor * math.sqrt(e)
        for res in (resolution, 2 * resolution):
            ws = _wall_windows(loc.sources, hw, res)
            side = []
            for s in (-1, 1):
                q = (p[0] + s * e * n[0], p[1] + s * e * n[1], p[2])
                side.append(_core_counts(apparent_contour(unfolding_map("i23", q), ws), ws))
            counts[(e, res)] = (side[0], side[1])
            deltas.add(tuple(int(v) for v in np.subtract(side[1], side[0])))
    delta = deltas.pop() if len(deltas) == 1 else None
    return WallCrossing(str(point.stratum), tuple(p), (float(n[0]), float(n[1])),
                        list(loc.sources), counts, delta)
