"""Plane-to-plane map germs: jet arithmetic, A-classification, bifurcation
strata of the corank-two unfoldings, apparent contours, crosscap curves and
planar caustics."""

from .contour import ContourDiagram, PlaneMap, Window, apparent_contour, contour_features, wall_crossing
from .geometry import (
    FRAMES,
    CausticFrame,
    CrosscapFamily,
    PlaneCurveGerm,
    characteristic_curves,
    contact_order,
    lagrange_caustic_section,
    perestroika_sweep,
    projection_germ,
)
from .jets import Jet
from .recognition import MapGerm, SingularityClass, Tag, classify, classify_corank2_2jet, criteria_report
from .strata import (
    StratumId,
    StratumTag,
    UnfoldingId,
    implicit_residual,
    locate_and_classify,
    parametrize_stratum,
    section_curves,
)

__all__ = [
    "CausticFrame",
    "ContourDiagram",
    "CrosscapFamily",
    "FRAMES",
    "Jet",
    "MapGerm",
    "PlaneCurveGerm",
    "PlaneMap",
    "SingularityClass",
    "StratumId",
    "StratumTag",
    "Tag",
    "UnfoldingId",
    "Window",
    "apparent_contour",
    "characteristic_curves",
    "classify",
    "classify_corank2_2jet",
    "contact_order",
    "contour_features",
    "criteria_report",
    "implicit_residual",
    "lagrange_caustic_section",
    "locate_and_classify",
    "parametrize_stratum",
    "perestroika_sweep",
    "projection_germ",
    "section_curves",
    "wall_crossing",
]
