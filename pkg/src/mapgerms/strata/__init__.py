"""Bifurcation diagrams of the corank-two unfoldings."""

from .formulas import implicit_residual, parametrize_stratum
from .locate import LocateResult, cusp_fold_witness, gulls_exclusion_i23, locate_and_classify, tacnode_witness
from .sections import Rect, Section, SectionCurve, a0_section, a0_walls, distance_to_strata, section_curves
from .series import SeriesFit, series_fit_swallowtail
from .types import (
    DomainError,
    MultiGermWitness,
    StratumError,
    StratumId,
    StratumPoint,
    StratumTag,
    Surd,
    UnfoldingId,
    VALID_STRATA,
)
