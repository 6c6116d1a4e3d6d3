"""Closed-form stratum parametrizations and implicit equations."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .types import (
    DomainError,
    StratumError,
    StratumId,
    StratumPoint,
    StratumTag,
    Surd,
    UnfoldingId,
    VALID_STRATA,
    square,
)

# degree-9 truncation of the sharksfin swallowtail branch a = S(b)
SHARKSFIN_SWALLOWTAIL_SERIES = {4: Fraction(1, 16), 9: Fraction(3, 32)}


def _exact(*vals) -> bool:
    return all(isinstance(v, Rational) for v in vals)


def _frac(v):
    return Fraction(v) if isinstance(v, Rational) else float(v)


def _surd(sign: int, coef, rad, exact: bool):
    """``sign * |coef| * sqrt(rad)`` as a :class:`Surd` or a float.

    The branch sign is the sign of the resulting coordinate.
    """
    coef = sign * abs(coef)
    if exact:
        return Surd(coef, rad)
    return float(coef) * math.sqrt(float(rad))


def check_pair(u: UnfoldingId, s: StratumId) -> None:
    u = UnfoldingId(u)
    if s.tag not in VALID_STRATA[u]:
        raise StratumError(f"stratum {s.tag.value} does not belong to the {u.value} unfolding")


def series_value(t, coeffs=SHARKSFIN_SWALLOWTAIL_SERIES):
    return sum(c * t ** k for k, c in coeffs.items()) if _exact(t) else \
        sum(float(c) * float(t) ** k for k, c in coeffs.items())


def _i23(s: StratumId, internal: tuple, verbatim: bool) -> tuple:
    tag, sg = s.tag, s.sign
    if tag in (StratumTag.GOOSE, StratumTag.BUTTERFLY, StratumTag.SHARKSFIN_AXIS,
               StratumTag.DELTOID_AXIS):
        if len(internal) != 1:
            raise StratumError(f"{tag.value} takes internal coordinate (c,)")
        (c,) = internal
        ex = _exact(c)
        c = _frac(c)
        if tag is StratumTag.SHARKSFIN_AXIS:
            if c <= 0:
                raise DomainError("sharksfin axis needs c > 0")
            return (0, 0, c) if ex else (0.0, 0.0, c)
        if tag is StratumTag.DELTOID_AXIS:
            if c >= 0:
                raise DomainError("deltoid axis needs c < 0")
            return (0, 0, c) if ex else (0.0, 0.0, c)
        if c <= 0:
            raise DomainError(f"{tag.value} needs c > 0")
        if tag is StratumTag.GOOSE:
            # (8 / (9 sqrt 3)) c^(3/2) = (8c/9) sqrt(c/3)
            return (_surd(sg, 8 * c / 9, c / 3, ex), 4 * c * c / 9, c)
        return (_surd(sg, c, c / 5, ex), 2 * c * c / 5, c)

    if len(internal) != 2:
        raise StratumError(f"{tag.value} takes internal coordinates (y, c)")
    y, c = internal
    ex = _exact(y, c)
    y, c = _frac(y), _frac(c)
    if tag is StratumTag.BEAKS_LIPS:
        if c + 3 * y < 0:
            raise DomainError("beaks/lips needs c + 3y >= 0")
        return (_surd(sg, 4 * y, c + 3 * y, ex), -y * (4 * c + 9 * y), c)
    if tag is StratumTag.SWALLOWTAIL:
        if c + 4 * y <= 0:
            raise DomainError("swallowtail needs c + 4y > 0")
        r = c + 4 * y
        return (_surd(sg, y * (4 * c + 15 * y) / r, r, ex), -2 * y * (2 * c + 5 * y), c)
    if tag is StratumTag.CUSP_FOLD:
        if y >= 0:
            raise DomainError("cusp+fold needs y < 0")
        k = 1 if verbatim else Fraction(1, 2) if ex else 0.5
        return (_surd(sg, k * (3 * c + 5 * y), -y, ex), (c * c - 6 * c * y - 15 * y * y) / 4, c)
    raise StratumError(f"no parametrization for {tag.value}")


def _sharksfin(s: StratumId, internal: tuple) -> tuple:
    if len(internal) != 1:
        raise StratumError(f"{s.tag.value} takes one internal coordinate")
    (t,) = internal
    ex = _exact(t)
    t = _frac(t)
    zero = 0 if ex else 0.0
    if s.tag is StratumTag.BEAKS_LINES:
        return (zero, t) if s.sign > 0 else (t, zero)
    v = series_value(t)
    return (v, t) if s.sign > 0 else (t, v)


def _odd_sharksfin(s: StratumId, internal: tuple) -> tuple:
    tag = s.tag
    if tag is StratumTag.BEAKS_LINES:
        if len(internal) != 2:
            raise StratumError("beaks_lines takes internal coordinates (t, c)")
        t, c = internal
        ex = _exact(t, c)
        t, c = _frac(t), _frac(c)
        zero = 0 if ex else 0.0
        return (zero, t, c) if s.sign > 0 else (t, zero, c)
    if tag is StratumTag.TACNODE:
        if len(internal) != 1:
            raise StratumError("tacnode takes internal coordinate (c,)")
        (c,) = internal
        ex = _exact(c)
        c = _frac(c)
        if c >= 0:
            raise DomainError("tacnode needs c < 0")
        return (c * c / 4, 0 if ex else 0.0, c)
    if tag is StratumTag.GULLS:
        if len(internal) != 1:
            raise StratumError("gulls takes internal coordinate (b,)")
        (b,) = internal
        ex = _exact(b)
        b = _frac(b)
        if b == 0:
            raise DomainError("gulls needs b != 0")
        zero = 0 if ex else 0.0
        return (zero, b, zero)
    if tag is StratumTag.SWALLOWTAIL:
        from .series import odd_sharksfin_swallowtail_point

        if len(internal) != 2:
            raise StratumError("swallowtail takes internal coordinates (t, c)")
        t, c = float(internal[0]), float(internal[1])
        return odd_sharksfin_swallowtail_point(s.sign, t, c)
    raise StratumError(f"no parametrization for {tag.value}")


def parametrize_stratum(u: UnfoldingId, s: StratumId, internal, verbatim: bool = False) -> StratumPoint:
    """Evaluate the parametrization of stratum ``s`` of unfolding ``u``.

    Internal coordinates:

    * i23 beaks_lips, swallowtail, cusp_fold: ``(y, c)``
    * i23 goose, butterfly, sharksfin_axis, deltoid_axis: ``(c,)``
    * sharksfin beaks_lines, swallowtail: ``(t,)``; sign ``+`` puts ``t`` on
      ``b`` (the line ``a = 0`` or the branch ``a = S(b)``), sign ``-`` on ``a``
    * odd_sharksfin beaks_lines, swallowtail: ``(t, c)`` with the same sign
      rule; tacnode ``(c,)``; gulls ``(b,)``

    For the i23 strata the sign is the sign of the ``a``-coordinate.
    Rational inputs give exact coordinates (irrational ones as :class:`Surd`).
    ``verbatim`` selects the uncorrected cusp+fold ``a``-component, kept for
    comparison only.
    """
    u = UnfoldingId(u)
    check_pair(u, s)
    internal = tuple(internal)
    if verbatim and s.tag is not StratumTag.CUSP_FOLD:
        raise StratumError("verbatim applies to cusp_fold only")
    if u is UnfoldingId.I23:
        params = _i23(s, internal, verbatim)
    elif u is UnfoldingId.SHARKSFIN:
        params = _sharksfin(s, internal)
    else:
        params = _odd_sharksfin(s, internal)
    return StratumPoint(u, s, tuple(params), internal, verbatim)


# -- implicit equations of the i23 strata ------------------------------------

def _beaks_lips_poly(a2, b, c):
    return 243 * a2 * a2 + (256 * c ** 3 - 864 * b * c) * a2 + 768 * b ** 3 - 256 * b * b * c * c


def _swallowtail_poly(a2, b, c):
    return (80 * a2 * a2 * (8 * b - 3 * c * c)
            - 8 * a2 * (285 * b * b * c - 192 * b * c ** 3 + 32 * c ** 5)
            + b * b * (45 * b - 16 * c * c) ** 2)


def _cusp_fold_poly(a2, b, c):
    return (18225 * a2 ** 4 + 14580 * a2 ** 3 * c ** 3
            - 54 * a2 ** 2 * (1275 * b * b * c * c - 49 * c ** 6)
            + 108 * a2 * (500 * b ** 4 * c - 15 * b * b * c ** 5 - c ** 9)
            - (16 * b * b - c ** 4) * (c ** 4 - 25 * b * b) ** 2)


IMPLICIT = {
    StratumTag.BEAKS_LIPS: _beaks_lips_poly,
    StratumTag.SWALLOWTAIL: _swallowtail_poly,
    StratumTag.CUSP_FOLD: _cusp_fold_poly,
}


def implicit_residual(s, p) -> object:
    """The defining polynomial of an i23 stratum evaluated at ``p = (a, b, c)``.

    All three polynomials are even in ``a``, so a :class:`Surd` value of
    ``a`` is evaluated exactly through ``a**2``.
    """
    tag = s.tag if isinstance(s, StratumId) else StratumTag(s)
    if tag not in IMPLICIT:
        raise StratumError(f"no implicit equation for {tag.value}")
    a, b, c = p
    if isinstance(a, (Rational, Surd)) and _exact(b, c):
        return IMPLICIT[tag](square(a), Fraction(b), Fraction(c))
    a, b, c = float(a), float(b), float(c)
    return IMPLICIT[tag](a * a, b, c)
