"""Acceptance checks shared by ``mapgerms validate`` and the test suite.

Every check returns a :class:`Check` with a pass flag and the residuals or
counts it looked at; nothing is loosened to make a check pass.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .contour import Window, apparent_contour, wall_crossing
from .geometry import (
    FRAMES,
    CrosscapFamily,
    SweepTooCoarse,
    characteristic_curves,
    contact_order,
    perestroika_sweep,
    sign_census,
    trivial_frame_walls,
)
from .recognition import MapGerm, Tag, classify, random_diffeo
from .strata import (
    StratumId,
    StratumTag,
    UnfoldingId,
    gulls_exclusion_i23,
    implicit_residual,
    locate_and_classify,
    parametrize_stratum,
    series_fit_swallowtail,
)
from .strata.unfoldings import unfolding_map

T = StratumTag


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    limit: float | None = None

    @property
    def within_time(self) -> bool:
        return self.limit is None or self.seconds < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        lim = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"[{status}] {self.name}: {self.seconds:.1f} s{lim}"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.ok, "checks_passed": self.passed,
                "seconds": round(self.seconds, 3), "limit": self.limit, "details": self.details}


def _timed(name: str, limit: float | None, fn: Callable[[], tuple[bool, dict]]) -> Check:
    t0 = time.perf_counter()
    passed, details = fn()
    return Check(name, passed, details, time.perf_counter() - t0, limit)


def _rq(rng: random.Random, lo: float, hi: float, den: int = 1000) -> Fraction:
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


# -- 1. stratum identities ------------------------------------------------------

def check_stratum_identities(seed: int = 0, samples: int = 1000) -> Check:
    def run():
        rng = random.Random(seed)
        worst = {}
        nonzero = {}
        for tag in (T.BEAKS_LIPS, T.SWALLOWTAIL, T.CUSP_FOLD):
            n = bad = 0
            while n < samples:
                c = _rq(rng, -2, 2)
                y = _rq(rng, -2, 2)
                if y == 0:
                    continue
                sign = rng.choice((1, -1))
                try:
                    p = parametrize_stratum(UnfoldingId.I23, StratumId(tag, sign), (y, c))
                except Exception:
                    continue  # outside the real domain of the branch
                n += 1
                if implicit_residual(tag, p.params) != 0:
                    bad += 1
            worst[tag.value] = bad
        printed = parametrize_stratum(UnfoldingId.I23, StratumId(T.CUSP_FOLD, 1), (Fraction(-1), Fraction(0)),
                                      verbatim=True)
        r = implicit_residual(T.CUSP_FOLD, printed.params)
        nonzero["cusp_fold_printed_at_(c,y)=(0,-1)"] = str(r)
        ok = all(v == 0 for v in worst.values()) and r != 0
        return ok, {"nonzero_residuals": worst, "uncorrected": nonzero}

    return _timed("1 stratum identities (exact)", 5.0, run)


# -- 2. edge coincidences ------------------------------------------------------

def check_edge_coincidences(seed: int = 0, samples: int = 100) -> Check:
    def run():
        rng = random.Random(seed)
        bad = []
        for _ in range(samples):
            c = _rq(rng, 0.001, 3)
            for sign in (1, -1):
                goose = parametrize_stratum(UnfoldingId.I23, StratumId(T.GOOSE, sign), (c,))
                bl = parametrize_stratum(UnfoldingId.I23, StratumId(T.BEAKS_LIPS, sign), (-2 * c / 9, c))
                bf = parametrize_stratum(UnfoldingId.I23, StratumId(T.BUTTERFLY, sign), (c,))
                sw = parametrize_stratum(UnfoldingId.I23, StratumId(T.SWALLOWTAIL, sign), (-c / 5, c))
                if goose.params != bl.params:
                    bad.append(("goose", str(c), sign))
                if bf.params != sw.params:
                    bad.append(("butterfly", str(c), sign))
        return not bad, {"mismatches": bad[:10], "samples": samples}

    return _timed("2 edge coincidences (exact)", None, run)


# -- 3. corank-1 normal forms -----------------------------------------------------

NORMAL_FORMS = {
    "fold": "(x, y^2)",
    "cusp": "(x, x*y + y^3)",
    "swallowtail": "(x, x*y + y^4)",
    "lips": "(x, y^3 + x^2*y)",
    "beaks": "(x, y^3 - x^2*y)",
    "butterfly": "(x, x*y + y^5 + y^7)",
    "gulls": "(x, x*y^2 + y^4 + y^5)",
    "goose": "(x, y^3 + x^3*y)",
}


def check_normal_forms(seed: int = 0, conjugations: int = 100) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        report = {}
        ok = True
        for tag, text in NORMAL_FORMS.items():
            f = MapGerm.parse(text)
            direct = classify(f).tag.value
            f = f.to_float()
            wrong = skipped = 0
            for _ in range(conjugations):
                g = f.conjugate(random_diffeo(rng, kind="float"), random_diffeo(rng, kind="float"))
                c = classify(g)
                if c.tag is Tag.UNRESOLVED:
                    skipped += 1
                elif c.tag.value != tag:
                    wrong += 1
            report[tag] = {"direct": direct, "wrong": wrong, "unresolved": skipped}
            ok &= direct == tag and wrong == 0
        return ok, report

    return _timed("3 corank-1 classification + conjugation invariance", 30.0, run)


# -- 4. sharksfin series ----------------------------------------------------------

def check_sharksfin_series() -> Check:
    def run():
        fit = series_fit_swallowtail(UnfoldingId.SHARKSFIN)
        co = fit.coefficients
        e4 = abs(co[4] - 1 / 16) / (1 / 16)
        e9 = abs(co[9] - 3 / 32) / (3 / 32)
        mid = max(abs(v) for v in co[5:9])
        ok = e4 < 1e-3 and e9 < 0.05 and mid < 1e-4
        return ok, {"b4": co[4], "b4_rel_err": e4, "b9": co[9], "b9_rel_err": e9, "max_b5_b8": mid,
                    "window": list(fit.window)}

    return _timed("4 sharksfin swallowtail series", 10.0, run)


# -- 5. recognition on strata ------------------------------------------------------

def _stratum_sample(tag: StratumTag, rng: random.Random):
    c = _rq(rng, 0.1, 1) * rng.choice((1, -1))
    if tag in (T.GOOSE, T.BUTTERFLY, T.SHARKSFIN_AXIS):
        return (abs(c),)
    if tag is T.DELTOID_AXIS:
        return (-abs(c),)
    while True:
        if tag is T.BEAKS_LIPS:
            y = _rq(rng, -1, 1)
            if c + 3 * y > 0 and y != 0 and abs(y + 2 * c / 9) > Fraction(1, 50):
                return (y, c)
        elif tag is T.SWALLOWTAIL:
            y = _rq(rng, -1, 1)
            if c + 4 * y > Fraction(1, 100) and y != 0 and abs(y + c / 5) > Fraction(1, 50) \
                    and abs(4 * c + 15 * y) > Fraction(1, 100):
                return (y, c)
        else:
            y = _rq(rng, -1, -0.01)
            if abs(y + c / 5) > Fraction(1, 50) and abs(3 * c + 5 * y) > Fraction(1, 100):
                return (y, c)


I23_STRATA = (T.BEAKS_LIPS, T.GOOSE, T.SWALLOWTAIL, T.BUTTERFLY, T.CUSP_FOLD, T.SHARKSFIN_AXIS, T.DELTOID_AXIS)


def check_strata_recognition(seed: int = 0, per_stratum: int = 100) -> Check:
    def run():
        rng = random.Random(seed)
        report = {}
        ok = True
        for tag in I23_STRATA:
            mism = []
            worst = 0.0
            for _ in range(per_stratum):
                internal = _stratum_sample(tag, rng)
                p = parametrize_stratum(UnfoldingId.I23, StratumId(tag, rng.choice((1, -1))), internal)
                try:
                    r = locate_and_classify(UnfoldingId.I23, seed=p)
                except Exception as e:  # a failed locate is a mismatch, not a skip
                    mism.append((str(p.stratum), [str(v) for v in internal], repr(e)))
                    continue
                if not r.matches:
                    mism.append((str(p.stratum), [str(v) for v in internal], r.expected, r.found))
                if tag is T.CUSP_FOLD:
                    worst = max(worst, r.residual)
            entry = {"samples": per_stratum, "mismatches": len(mism), "examples": mism[:3]}
            if tag is T.CUSP_FOLD:
                entry["max_witness_residual"] = worst
                ok &= worst <= 1e-10
            report[tag.value] = entry
            ok &= not mism
        return ok, report

    return _timed("5 recognition round-trip on i23 strata", None, run)


# -- 6. gulls -----------------------------------------------------------------

def check_gulls() -> Check:
    def run():
        ex = gulls_exclusion_i23()
        found = []
        for b in (Fraction(1, 5), Fraction(-1, 3), Fraction(1, 2)):
            p = parametrize_stratum(UnfoldingId.ODD_SHARKSFIN, StratumId(T.GULLS, 1), (b,))
            r = locate_and_classify(UnfoldingId.ODD_SHARKSFIN, seed=p)
            found.append((str(b), r.found))
        ok = ex["excluded"] and all(f == Tag.GULLS.value for _, f in found)
        return ok, {"nilpotent_powers": ex["nilpotent_powers"], "odd_sharksfin_gulls": found}

    return _timed("6 gulls excluded on i23, detected on odd sharksfin", None, run)


# -- 7. contour regimes -----------------------------------------------------------

def deltoid_window(a: float, b: float, c: float, resolution: int) -> Window:
    """Window around the small deltoid oval of the i23 unfolding at ``c < 0``:
    centred at the critical point ``(-a/4, -b/(4c))`` of the Jacobian
    determinant, three times the oval's semi-axes wide."""
    m = a * a / 8 + b * b / (8 * abs(c))
    h = 3 * max(math.sqrt(m / 2), math.sqrt(m / (2 * abs(c))))
    return Window.centered(-a / 4, -b / (4 * c), h, resolution)


def _crossing_point(tag: StratumTag, rng: random.Random):
    while True:
        c = rng.choice((1, -1)) * rng.uniform(0.5, 1.0)
        s = abs(c)
        sign = rng.choice((1, -1))
        if tag is T.BEAKS_LIPS:
            y = rng.uniform(max(-c / 3, -0.6 * s) + 0.02 * s, 0.6 * s)
            bad = abs(y + 2 * c / 9) < 0.05 * s
        elif tag is T.SWALLOWTAIL:
            y = rng.uniform(max(-c / 4, -0.6 * s) + 0.02 * s, 0.6 * s)
            bad = abs(y + c / 5) < 0.05 * s
        else:
            y = rng.uniform(-0.6 * s, -0.1 * s)
            # away from the butterfly line y = -c/5, where p and q merge
            bad = abs(3 * c + 5 * y) < 0.3 * s or abs(y + c / 5) < 0.05 * s
        if abs(y) >= 0.15 * s and not bad:
            return parametrize_stratum(UnfoldingId.I23, StratumId(tag, sign), (y, c))


def _expected_delta(tag: StratumTag, delta) -> bool:
    _, dc, dd = delta
    if tag is T.BEAKS_LIPS:
        return abs(dc) == 2
    if tag is T.SWALLOWTAIL:
        return (dc, dd) in ((2, 1), (-2, -1))
    return dc == 0 and abs(dd) == 1


def check_contour_regimes(seed: int = 0, perturbations: int = 20, paths: int = 10) -> Check:
    def run():
        rng = random.Random(seed)
        deltoid_bad = []
        for _ in range(perturbations):
            c = rng.uniform(-0.3, -0.1)
            a = rng.uniform(-0.05, 0.05) * abs(c) ** 1.5
            b = rng.uniform(-0.05, 0.05) * c * c
            f = unfolding_map(UnfoldingId.I23, (a, b, c))
            for res in (256, 512):
                counts = apparent_contour(f, deltoid_window(a, b, c, res)).counts
                if counts[1] != 3:
                    deltoid_bad.append(((a, b, c), res, counts))
        walls = {}
        ok = not deltoid_bad
        for tag in (T.BEAKS_LIPS, T.SWALLOWTAIL, T.CUSP_FOLD):
            seen = []
            good = True
            for _ in range(paths):
                wc = wall_crossing(_crossing_point(tag, rng))
                seen.append(list(wc.delta) if wc.delta else None)
                good &= wc.delta is not None and _expected_delta(tag, wc.delta)
            walls[tag.value] = {"deltas": seen, "matches_expected": good}
            ok &= good
        return ok, {"deltoid_failures": deltoid_bad, "wall_crossings": walls,
                    "expected": {"beaks_lips": "cusps +-2", "swallowtail": "cusps +-2, double points +-1",
                                 "cusp_fold": "cusps 0, double points +-1"}}

    return _timed("7 contour regimes (deltoid cusps, wall-crossing deltas)", 120.0, run)


# -- 8. crosscap curves -----------------------------------------------------------

def check_crosscap_curves() -> Check:
    def run():
        import sympy as sp

        x, y = sp.symbols("x y")
        cf = CrosscapFamily.typical()
        details = {}
        p0, f0 = characteristic_curves(cf, 0)
        pe, fe = characteristic_curves(cf, 0, method="elimination")
        parab_ok = sp.expand(p0.expr - (x ** 2 - 3 * y ** 3)) == 0 and sp.expand(pe.expr - p0.expr) == 0
        target = y * (4 * x ** 2 - sp.Rational(49, 4) * y ** 3)
        flec_ok = sp.expand(f0.expr - target) == 0 and sp.expand(fe.expr - f0.expr) == 0
        q, r = sp.div(f0.expr, y, x, y)
        flec_ok &= r == 0 and sp.expand(q - (4 * x ** 2 - sp.Rational(49, 4) * y ** 3)) == 0
        details["t=0"] = {"parabolic": str(p0.expr), "flecnodal": str(sp.factor(f0.expr))}
        p1, f1 = characteristic_curves(cf, Fraction(1, 10))
        orders = contact_order(p1, f1)
        contact_ok = len(orders) == 2 and all(o.order == 3 and not o.lower_bound for o in orders)
        details["t=0.1 contact orders"] = [str(o) for o in orders]
        pm, _ = characteristic_curves(cf, Fraction(-1, 10))
        census = sign_census(pm, Window(-0.2, 0.2, -0.2, 0.2, 512))
        census_ok = census.components == 1 and len(census.isolated_points) == 1 \
            and max(abs(v) for v in census.isolated_points[0]) < 1e-9
        details["t=-0.1 census"] = census.to_json()
        return parab_ok and flec_ok and contact_ok and census_ok, details

    return _timed("8 crosscap parabolic/flecnodal curves", None, run)


# -- 9. caustic sections --------------------------------------------------------

def _segment_distance(p0, p1) -> float:
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    d = p1 - p0
    s = float(np.clip(-(p0 @ d) / (d @ d), 0.0, 1.0))
    return float(np.hypot(*(p0 + s * d)))


def random_caustic_paths(seed: int, n: int) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Straight paths across the strata in one half plane of ``(t1, t2)``,
    kept away from the origin where all strata meet."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        sg = rng.choice((-1, 1))
        c0, c1 = sg * rng.uniform(0.15, 0.3, 2)
        p0 = (float(rng.uniform(-0.03, -0.01)), float(c0))
        p1 = (float(rng.uniform(0.02, 0.04)), float(c1))
        if _segment_distance(p0, p1) >= 0.1:
            out.append((p0, p1))
    return out


def check_caustic_sections(seed: int = 0, paths: int = 5, frames: int = 40,
                           resolutions: tuple[int, int] = (512, 1024), workers: int = 1) -> Check:
    def run():
        report = []
        ok = True
        for p0, p1 in random_caustic_paths(seed, paths):
            n = frames
            while True:
                try:
                    sweeps = [perestroika_sweep(FRAMES["trivial"], [p0, p1],
                                                Window(-0.6, 0.6, -0.6, 0.6, r), frames=n, workers=workers)
                              for r in resolutions]
                    break
                except SweepTooCoarse:
                    n *= 2  # honour the refinement request
            coarse, fine = sweeps
            far = [c for c in coarse.crossings
                   if c["distance_frames"] is None or c["distance_frames"] > 2]
            stable = coarse.counts == fine.counts
            walls = trivial_frame_walls(p0, p1)
            report.append({
                "path": [list(p0), list(p1)], "frames": n, "strata": [w[1] for w in walls],
                "jumps": [[c["between"], c["before"], c["after"], c["stratum"], c["distance_frames"]]
                          for c in coarse.crossings],
                "unmatched_jumps": len(far), "stable_under_doubling": stable,
            })
            ok &= not far and stable and bool(coarse.crossings)
        return ok, {"paths": report}

    return _timed("9 caustic sections vs strata (trivial frame)", None, run)


ALL_CHECKS = {
    "1": check_stratum_identities,
    "2": check_edge_coincidences,
    "3": check_normal_forms,
    "4": check_sharksfin_series,
    "5": check_strata_recognition,
    "6": check_gulls,
    "7": check_contour_regimes,
    "8": check_crosscap_curves,
    "9": check_caustic_sections,
}


def run_checks(only=None, seed: int = 0, workers: int = 1) -> list[Check]:
    out = []
    for key, fn in ALL_CHECKS.items():
        if only and key not in only:
            continue
        kw = {}
        if "seed" in fn.__code__.co_varnames:
            kw["seed"] = seed
        if "workers" in fn.__code__.co_varnames:
            kw["workers"] = workers
        out.append(fn(**kw))
    return out
