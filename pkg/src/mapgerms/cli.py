"""Command-line front end: ``mapgerms <verb> [options]``.

Exit status: 0 on success, 1 when ``validate`` reports a failing check,
2 on malformed input, 3 on a numerical failure (a diagnostic JSON object is
written to stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import contour, export, recognition
from .contour import ContourError, PlaneMap, Window, apparent_contour
from .geometry import (
    FRAMES,
    CausticFrame,
    CrosscapFamily,
    GeometryError,
    SweepTooCoarse,
    characteristic_curves,
    contact_order,
    crosscap_regime,
    double_point_curve,
    fold_inset,
    genericity_report,
    lagrange_caustic_section,
    perestroika_sweep,
    sign_census,
)
from .parse import GermSyntaxError
from .recognition import MapGerm, classify, criteria_report
from .strata import StratumError, StratumId, StratumTag, UnfoldingId, implicit_residual, locate_and_classify, \
    parametrize_stratum, section_curves
from .strata import locate
from .strata.series import ContinuationError
from .strata.unfoldings import unfolding_map

# environment overrides of the default tolerances: variable -> (module, attribute, type)
ENV_TOLERANCES = {
    "MAPGERMS_FLOAT_ZERO": (recognition, "FLOAT_ZERO", float),
    "MAPGERMS_DOUBLE_POINT_CELLS": (contour, "DOUBLE_POINT_CELLS", float),
    "MAPGERMS_NEWTON_TOL": (locate, "NEWTON_TOL", float),
    "MAPGERMS_RESOLUTION": (contour, "DEFAULT_RESOLUTION", int),
}

EPILOG = """\
environment overrides (read at start-up):
  MAPGERMS_FLOAT_ZERO          relative zero test of the float classifier (default 1e-10)
  MAPGERMS_DOUBLE_POINT_CELLS  source separation of double points, in grid cells (default 10)
  MAPGERMS_NEWTON_TOL          step tolerance of the stratum locator (default 1e-12)
  MAPGERMS_RESOLUTION          default grid resolution of contour windows (default 512)

exit status: 0 ok, 1 validate found failing checks, 2 bad input, 3 numerical failure
"""


class InputError(ValueError):
    pass


def apply_env(environ=os.environ) -> dict:
    applied = {}
    for var, (mod, attr, kind) in ENV_TOLERANCES.items():
        if var in environ:
            try:
                val = kind(environ[var])
            except ValueError:
                raise InputError(f"{var}={environ[var]!r} is not a valid {kind.__name__}") from None
            setattr(mod, attr, val)
            applied[var] = val
    return applied


# -- argument helpers ----------------------------------------------------------------

def _number(text: str):
    """Rational when written as an integer, fraction or decimal; else float."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _numbers(text: str) -> list:
    return [_number(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _window(args) -> Window:
    res = args.resolution or contour.DEFAULT_RESOLUTION
    if args.window is None:
        h = contour.DEFAULT_HALF_WIDTH
        return Window(-h, h, -h, h, res)
    v = [float(u) for u in _numbers(args.window)]
    if len(v) != 4:
        raise InputError("--window takes xmin,xmax,ymin,ymax")
    return Window(*v, res)


def _path(text: str) -> list[tuple[float, float]]:
    pts = []
    for chunk in text.split(";"):
        v = _numbers(chunk)
        if len(v) != 2:
            raise InputError("--path takes points t1,t2;t1,t2;...")
        pts.append((float(v[0]), float(v[1])))
    return pts


def _germ(args) -> MapGerm:
    if args.germ is not None:
        return MapGerm.parse(args.germ)
    if args.input is not None:
        text = Path(args.input).read_text(encoding="utf-8").strip()
        if text.startswith("{"):
            try:
                return MapGerm.from_json(json.loads(text))
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise InputError(f"malformed germ JSON: {exc}") from None
        return MapGerm.parse(text)
    raise InputError("give --germ or --input")


def _sign(text: str) -> int:
    if text in ("+", "1", "+1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("sign must be + or -")


def _emit(obj) -> None:
    sys.stdout.write(export.to_json(obj))


def _out(args) -> Path:
    return Path(args.out)


# -- verbs --------------------------------------------------------------------------

def cmd_classify(args) -> int:
    f = _germ(args)
    cls = classify(f)
    data = {"class": cls.tag.value, "detail": str(cls), "germ": f.to_json()}
    if args.criteria:
        data["criteria"] = criteria_report(f).to_json()
    _emit(data)
    return 0


def cmd_strata(args) -> int:
    u = UnfoldingId(args.unfolding)
    sid = StratumId(StratumTag(args.stratum), args.sign)
    internal = [v for v in (args.y, args.c) if v is not None] if args.internal is None else _numbers(args.internal)
    p = parametrize_stratum(u, sid, tuple(internal), verbatim=args.verbatim)
    data = {"point": p.to_json(), "params": [str(v) for v in p.params], "numeric": list(p.numeric())}
    try:
        r = implicit_residual(sid.tag, p.params)
        data["residual"] = str(r)
    except (StratumError, KeyError):
        data["residual"] = None  # no implicit equation for this stratum
    if args.locate:
        data["locate"] = locate_and_classify(u, seed=p).to_json()
    _emit(data)
    return 0


def cmd_section(args) -> int:
    u = UnfoldingId(args.unfolding)
    rect = tuple(float(v) for v in _numbers(args.window)) if args.window else (-2.0, 2.0, -2.0, 2.0)
    sec = section_curves(u, float(args.c), rect, args.resolution or 256)
    paths = export.export_section(sec, _out(args), args.format)
    points = {t.value: len(sec.points(t)) for t in StratumTag if sec.points(t)}
    _emit({"files": [str(p) for p in paths], "points": points,
           "curves": sorted({str(c.stratum) for c in sec.curves if c.kind == "curve"})})
    return 0


def cmd_contour(args) -> int:
    w = _window(args)
    insets = []
    if args.unfolding:
        u = UnfoldingId(args.unfolding)
        params = tuple(float(v) for v in _numbers(args.params or ""))
        if len(params) != u.dim:
            raise InputError(f"{u.value} takes {u.dim} parameters")
        F = PlaneMap.of(unfolding_map(u, params))
        if u is UnfoldingId.I23 and params[2] != 0 and args.zoom:
            a, b, c = params
            ins = fold_inset(F, (-a / 4, -b / (4 * c)), w)
            insets = [ins] if ins is not None else []
    else:
        F = PlaneMap.of(_germ(args))
    d = apparent_contour(F, w, insets)
    meta = export.metadata(w, insets=[i.to_json() for i in insets])
    paths = export.export_contour(d, _out(args), args.format, meta=meta)
    _emit({"files": [str(p) for p in paths], "counts": list(d.counts), "collision": d.collision})
    return 0


def _family(args) -> CrosscapFamily:
    if args.family == "typical":
        return CrosscapFamily.typical()
    return CrosscapFamily.affine(args.c03, args.c12, args.d4)


def cmd_crosscap(args) -> int:
    cf = _family(args)
    t = args.t
    parab, flec = characteristic_curves(cf, t, method=args.method)
    data = {
        "family": cf.to_json(),
        "t": str(t),
        "regime": str(crosscap_regime(cf, t)),
        "genericity": genericity_report(cf),
        "curves": {},
    }
    for cur in (parab, flec, double_point_curve(cf, t)):
        data["curves"][cur.label] = {
            "poly": str(cur.expr) if cur.expr is not None else cur.poly.to_str(),
            "factors": [[str(f), m] for f, m in cur.factors()],
            "table": cur.to_json(),
        }
    data["contact"] = [o.to_json() | {"text": str(o)} for o in contact_order(parab, flec)]
    if args.census:
        data["census"] = sign_census(parab).to_json()
    if args.format == "json":
        data["files"] = [str(export.write(_out(args), "crosscap.json", export.to_json(data)))]
    elif args.format == "csv":
        rows = ["label,i,j,coeff"]
        for cur in (parab, flec):
            for (i, j), v in sorted(cur.poly.terms().items()):
                rows.append(f"{cur.label},{i},{j},{v}")
        data["files"] = [str(export.write(_out(args), "crosscap.csv", "\n".join(rows) + "\n"))]
    else:
        data["files"] = [str(export.write(_out(args), "crosscap.svg", export.curves_svg(
            [parab, flec], Window(-0.2, 0.2, -0.2, 0.2, args.resolution or 256), export.metadata(t=str(t)))))]
    _emit(data)
    return 0


def _frame(args) -> CausticFrame:
    if args.rho:
        v = _numbers(args.rho)
        if len(v) != 4:
            raise InputError("--rho takes a1,a2,b1,b2")
        return CausticFrame(*v, name="custom")
    return FRAMES[args.frame]


def cmd_caustic(args) -> int:
    frame = _frame(args)
    w = _window(args)
    out = _out(args)
    if args.path:
        sweep = perestroika_sweep(frame, _path(args.path), w, frames=args.frames, keep_diagrams=True,
                                  workers=args.workers)
        paths = export.export_sweep(sweep, out, args.format, export.metadata(w, frame=frame.to_json()))
        _emit({"files": len(paths), "crossings": sweep.crossings, "counts": [list(c) for c in sweep.counts]})
        return 0
    d = lagrange_caustic_section(frame, args.t1, args.t2, w)
    paths = export.export_contour(d, out, args.format, "caustic", export.metadata(w, frame=frame.to_json()))
    _emit({"files": [str(p) for p in paths], "counts": list(d.counts)})
    return 0


def cmd_validate(args) -> int:
    from .validate import run_checks

    only = set(args.only.split(",")) if args.only else None
    checks = run_checks(only, seed=args.seed, workers=args.workers)
    for c in checks:
        print(c.line(), file=sys.stderr)
    report = {"seed": args.seed, "passed": all(c.ok for c in checks), "checks": [c.to_json() for c in checks]}
    text = export.to_json(report)
    if args.out_given:
        export.write(_out(args), "validate.json", text)
    sys.stdout.write(text)
    return 0 if report["passed"] else 1


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: current directory)")
    common.add_argument("--format", choices=("svg", "csv", "json"), default="svg")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for figure batches (default: number of cores)")
    common.add_argument("--window", default=None, help="xmin,xmax,ymin,ymax")
    common.add_argument("--resolution", type=int, default=None, help="grid cells per side")

    p = argparse.ArgumentParser(prog="mapgerms", description="Plane-to-plane map germs: classification, "
                                "bifurcation strata, apparent contours and caustics.",
                                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True)

    def germ_opts(sp):
        sp.add_argument("--germ", help='germ "(f1, f2)" in x, y with rational coefficients')
        sp.add_argument("--input", help="file holding a germ expression or its JSON")

    sp = sub.add_parser("classify", parents=[common], help="classify a map germ")
    germ_opts(sp)
    sp.add_argument("--criteria", action="store_true", help="include the recognition data")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("strata", parents=[common], help="evaluate a stratum parametrization")
    sp.add_argument("--unfolding", choices=[u.value for u in UnfoldingId], default="i23")
    sp.add_argument("--stratum", choices=[t.value for t in StratumTag], required=True)
    sp.add_argument("--sign", type=_sign, default=1)
    sp.add_argument("--y", type=_number)
    sp.add_argument("--c", type=_number)
    sp.add_argument("--internal", help="internal coordinates as a comma list (overrides --y/--c)")
    sp.add_argument("--verbatim", action="store_true", help="use the uncorrected printed form")
    sp.add_argument("--locate", action="store_true", help="also locate and classify the singular points")
    sp.set_defaults(func=cmd_strata)

    sp = sub.add_parser("section", parents=[common], help="plane section of a bifurcation diagram")
    sp.add_argument("--unfolding", choices=[u.value for u in UnfoldingId], default="i23")
    sp.add_argument("--c", type=_number, default=Fraction(1))
    sp.set_defaults(func=cmd_section)

    sp = sub.add_parser("contour", parents=[common], help="apparent contour of a germ or unfolding member")
    germ_opts(sp)
    sp.add_argument("--unfolding", choices=[u.value for u in UnfoldingId])
    sp.add_argument("--params", help="unfolding parameters a,b[,c]")
    sp.add_argument("--no-zoom", dest="zoom", action="store_false",
                    help="do not trace small fold structure in an inset window")
    sp.set_defaults(func=cmd_contour)

    sp = sub.add_parser("crosscap", parents=[common], help="parabolic and flecnodal curves of a crosscap family")
    sp.add_argument("--t", type=_number, default=Fraction(0))
    sp.add_argument("--family", choices=("typical", "affine"), default="typical")
    sp.add_argument("--c03", type=_number, default=Fraction(1))
    sp.add_argument("--c12", type=_number, default=Fraction(0))
    sp.add_argument("--d4", type=_number, default=Fraction(0))
    sp.add_argument("--method", choices=("auto", "closed", "elimination"), default="auto")
    sp.add_argument("--census", action="store_true", help="sign census of the parabolic curve")
    sp.set_defaults(func=cmd_crosscap)

    sp = sub.add_parser("caustic", parents=[common], help="planar caustic sections and sweeps")
    sp.add_argument("--frame", choices=sorted(FRAMES), default="trivial")
    sp.add_argument("--rho", help="custom frame a1,a2,b1,b2")
    sp.add_argument("--t1", type=_number, default=Fraction(0))
    sp.add_argument("--t2", type=_number, default=Fraction(0))
    sp.add_argument("--path", help="sweep path t1,t2;t1,t2;...")
    sp.add_argument("--frames", type=int, default=60)
    sp.set_defaults(func=cmd_caustic)

    sp = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    sp.add_argument("--only", help="comma list of check numbers 1-9")
    sp.set_defaults(func=cmd_validate)
    return p


NUMERICAL = (ContourError, ContinuationError, locate.NewtonDivergence, GeometryError, StratumError,
             np.linalg.LinAlgError, ArithmeticError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad syntax
    args.out_given = args.out is not None
    args.out = args.out or "."
    try:
        apply_env()
        return args.func(args)
    except SweepTooCoarse as exc:
        return _fail(3, "sweep_too_coarse", exc)
    except (GermSyntaxError, InputError, OSError) as exc:
        return _fail(2, "input", exc)
    except NUMERICAL as exc:
        return _fail(3, "numerical", exc)
    except ValueError as exc:
        return _fail(2, "input", exc)


def _fail(code: int, kind: str, exc: BaseException) -> int:
    diag = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    if code == 3:
        diag["where"] = traceback.extract_tb(exc.__traceback__)[-1].name
    sys.stderr.write(json.dumps(diag, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
