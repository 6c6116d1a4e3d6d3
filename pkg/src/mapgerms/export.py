"""SVG, CSV and JSON output for contours, sections and sweeps.

SVG files carry one ``<g>`` per layer (source curve, image curve, cusps,
double points, strata) and a ``<metadata>`` block with the tool version,
tolerances and window.  Coordinates are written in data units, rounded to
1e-6, inside a y-flipping group.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from importlib import metadata as _md
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import contour, recognition
from .contour import ContourDiagram, Window
from .strata import locate
from .strata.sections import Section

SVG_NS = "http://www.w3.org/2000/svg"
PANEL = 400  # pixels per panel side
DIGITS = 6

STRATUM_COLORS = {
    "beaks_lips": "#d62728",
    "goose": "#9467bd",
    "swallowtail": "#1f77b4",
    "butterfly": "#17becf",
    "cusp_fold": "#2ca02c",
    "sharksfin_axis": "#ff7f0e",
    "deltoid_axis": "#8c564b",
    "tacnode": "#e377c2",
    "gulls": "#bcbd22",
    "beaks_lines": "#7f7f7f",
}


def tool_version() -> str:
    try:
        return _md.version("artifact")
    except _md.PackageNotFoundError:
        return "0+unknown"


def tolerances() -> dict:
    """Current values of the tunable tolerances (after any overrides)."""
    return {
        "float_zero": recognition.FLOAT_ZERO,
        "double_point_cells": contour.DOUBLE_POINT_CELLS,
        "newton_tol": locate.NEWTON_TOL,
    }


def metadata(window=None, **extra) -> dict:
    meta = {"tool": "mapgerms", "version": tool_version(), "tolerances": tolerances()}
    if window is not None:
        meta["window"] = window.to_json() if hasattr(window, "to_json") else list(window)
    meta.update(extra)
    return meta


def _r(v: float) -> float:
    v = round(float(v), DIGITS)
    return 0.0 if v == 0 else v


def _fmt(v: float) -> str:
    return f"{_r(v):.{DIGITS}f}".rstrip("0").rstrip(".")


def _points(pl) -> str:
    return " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in pl)


class _Panel:
    """A square panel mapping the data rectangle ``box`` onto ``PANEL`` pixels."""

    def __init__(self, parent: ET.Element, box: tuple[float, float, float, float], x0: float, title: str):
        xmin, xmax, ymin, ymax = box
        self.size = max(xmax - xmin, ymax - ymin)
        self.svg = ET.SubElement(parent, "svg", {
            "x": str(x0), "y": "0", "width": str(PANEL), "height": str(PANEL),
            "viewBox": f"{_fmt(xmin)} {_fmt(-ymax)} {_fmt(xmax - xmin)} {_fmt(ymax - ymin)}",
            "preserveAspectRatio": "xMidYMid meet",
        })
        ET.SubElement(self.svg, "title").text = title
        self.root = ET.SubElement(self.svg, "g", {"transform": "scale(1,-1)"})
        self.layers: dict[str, ET.Element] = {}

    def layer(self, name: str) -> ET.Element:
        if name not in self.layers:
            self.layers[name] = ET.SubElement(self.root, "g", {"id": name})
        return self.layers[name]

    def polyline(self, layer: str, pl, closed: bool = False, color: str = "#000000", cls: str | None = None):
        if len(pl) < 2:
            return
        attrs = {"points": _points(pl), "fill": "none", "stroke": color, "stroke-width": "1.5",
                 "vector-effect": "non-scaling-stroke"}
        if cls:
            attrs["class"] = cls
        ET.SubElement(self.layer(layer), "polygon" if closed else "polyline", attrs)

    def marker(self, layer: str, p, cls: str, color: str):
        ET.SubElement(self.layer(layer), "circle", {
            "class": cls, "cx": _fmt(p[0]), "cy": _fmt(p[1]), "r": _fmt(0.012 * self.size),
            "fill": color,
        })


def _document(panels: int, meta: dict) -> ET.Element:
    root = ET.Element("svg", {"xmlns": SVG_NS, "version": "1.1",
                              "width": str(PANEL * panels), "height": str(PANEL)})
    ET.SubElement(root, "metadata").text = json.dumps(meta, sort_keys=True)
    return root


def _serialize(root: ET.Element) -> str:
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _bbox(polylines: Iterable[np.ndarray], extra: Sequence = ()) -> tuple[float, float, float, float] | None:
    pts = [np.asarray(p, dtype=float).reshape(-1, 2) for p in polylines if len(p)]
    pts += [np.asarray(extra, dtype=float).reshape(-1, 2)] if len(extra) else []
    if not pts:
        return None
    a = np.vstack(pts)
    a = a[np.all(np.isfinite(a), axis=1)]
    if not len(a):
        return None
    xmin, ymin = a.min(axis=0)
    xmax, ymax = a.max(axis=0)
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-9)
    return (xmin - pad, xmax + pad, ymin - pad, ymax + pad)


def contour_svg(d: ContourDiagram, meta: dict | None = None, overlays: dict | None = None) -> str:
    """Two panels: the singular set in the source window and the apparent
    contour in the target.  ``overlays`` maps a stratum label to extra
    target-plane polylines drawn in the strata layer."""
    w = d.window
    meta = meta if meta is not None else metadata(w)
    meta = dict(meta, counts=dict(zip(("components", "cusps", "double_points"), d.counts)))
    root = _document(2, meta)
    src = _Panel(root, (w.xmin, w.xmax, w.ymin, w.ymax), 0, "source")
    src.layer("source-curve")
    for pl, cl in zip(d.singular_polylines, d.closed):
        src.polyline("source-curve", pl, cl, "#1f77b4")
    for s, _ in d.cusps:
        src.marker("source-curve", s, "cusp-preimage", "#d62728")
    extra = [t for _, t in d.cusps] + [dp["image"] for dp in d.double_points]
    box = _bbox(d.contour_polylines, extra) or (w.xmin, w.xmax, w.ymin, w.ymax)
    tgt = _Panel(root, box, PANEL, "target")
    for name in ("image-curve", "cusps", "double-points", "strata"):
        tgt.layer(name)
    for pl, cl in zip(d.contour_polylines, d.closed):
        tgt.polyline("image-curve", pl, cl, "#000000")
    for _, t in d.cusps:
        tgt.marker("cusps", t, "cusp", "#d62728")
    for dp in d.double_points:
        tgt.marker("double-points", dp["image"], "double-point", "#2ca02c")
    for label, pls in sorted((overlays or {}).items()):
        color = STRATUM_COLORS.get(label.rstrip("+-"), "#7f7f7f")
        for pl in pls:
            tgt.polyline("strata", pl, False, color, f"stratum {label}")
    return _serialize(root)


def section_svg(sec: Section, meta: dict | None = None) -> str:
    """Strata of a plane section, colored by stratum; marked points (goose,
    butterfly, axes) are circles whose class is the stratum tag."""
    r = sec.window
    meta = meta if meta is not None else metadata((r.xmin, r.xmax, r.ymin, r.ymax))
    meta = dict(meta, unfolding=sec.unfolding.value, plane=sec.plane, value=sec.value)
    root = _document(1, meta)
    panel = _Panel(root, (r.xmin, r.xmax, r.ymin, r.ymax), 0, f"{sec.unfolding.value} section")
    panel.layer("strata")
    for curve in sec.curves:
        tag = curve.stratum.tag.value
        color = STRATUM_COLORS.get(tag, "#7f7f7f")
        for pl in curve.polylines:
            if curve.kind == "point":
                panel.marker("strata", pl[0, 1:3], tag, color)
            else:
                panel.polyline("strata", pl[:, 1:3], False, color, f"stratum {curve.stratum}")
    return _serialize(root)


CURVE_COLORS = {"parabolic": "#d62728", "flecnodal": "#1f77b4", "double_point": "#2ca02c", "other": "#000000"}


def curves_svg(curves, w: Window, meta: dict | None = None) -> str:
    """Zero sets of plane curve germs on ``w``, one layer per label."""
    meta = meta if meta is not None else metadata(w)
    meta = dict(meta, window=w.to_json())
    root = _document(1, meta)
    panel = _Panel(root, (w.xmin, w.xmax, w.ymin, w.ymax), 0, "source")
    for cur in curves:
        P = cur.poly.to_float()
        Px, Py = P.dx(), P.dy()
        ls = contour.trace_level_set(P.evaluate, lambda x, y: (Px.evaluate(x, y), Py.evaluate(x, y)), w)
        panel.layer(cur.label)
        for pl, cl in zip(ls.polylines, ls.closed):
            panel.polyline(cur.label, pl, cl, CURVE_COLORS.get(cur.label, "#000000"), cur.label)
    return _serialize(root)


def empty_svg(meta: dict | None = None) -> str:
    return contour_svg(ContourDiagram([], [], [], [], [], Window()), meta)


def count_markers(svg: str, cls: str) -> int:
    """Number of elements of class ``cls`` in an SVG string."""
    root = ET.fromstring(svg)
    return sum(1 for e in root.iter() if cls in (e.get("class") or "").split())


def to_json(obj) -> str:
    """Deterministic JSON (sorted keys, fixed float rounding)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n"


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(u) for u in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if not math.isfinite(v) else float(f"{v:.12g}")
    return v


def write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def export_contour(d: ContourDiagram, out: Path, fmt: str, stem: str = "contour", meta: dict | None = None,
                   overlays: dict | None = None) -> list[Path]:
    meta = meta if meta is not None else metadata(d.window)
    if fmt == "svg":
        return [write(out, f"{stem}.svg", contour_svg(d, meta, overlays))]
    if fmt == "csv":
        return [write(out, f"{stem}.csv", d.to_csv())]
    data = dict(json.loads(d.to_json()), metadata=meta)
    return [write(out, f"{stem}.json", to_json(data))]


def export_section(sec: Section, out: Path, fmt: str, stem: str = "section", meta: dict | None = None) -> list[Path]:
    r = sec.window
    meta = meta if meta is not None else metadata((r.xmin, r.xmax, r.ymin, r.ymax))
    if fmt == "svg":
        return [write(out, f"{stem}.svg", section_svg(sec, meta))]
    if fmt == "csv":
        return [write(out, f"{stem}.csv", sec.to_csv())]
    data = dict(json.loads(sec.to_json()), metadata=meta)
    return [write(out, f"{stem}.json", to_json(data))]


def export_sweep(sweep, out: Path, fmt: str, meta: dict | None = None) -> list[Path]:
    """Numbered frame files plus ``crossings.json``."""
    meta = meta if meta is not None else metadata(sweep.window)
    paths = []
    width = max(3, len(str(len(sweep.diagrams))))
    for n, d in enumerate(sweep.diagrams):
        fmeta = dict(meta, frame=n, params=list(sweep.params[n]))
        paths += export_contour(d, out, fmt, f"frame_{n:0{width}d}", fmeta)
    paths.append(write(out, "crossings.json", to_json(dict(sweep.to_json(), metadata=meta))))
    return paths
