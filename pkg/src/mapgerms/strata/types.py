"""Identifiers and value types for the bifurcation strata."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational


class UnfoldingId(str, Enum):
    """The three corank-two unfoldings.

    * ``sharksfin``:     (x^2 + y^3 + a y, y^2 + x^3 + b x)
    * ``odd_sharksfin``: (x^2 + y^5 + c y^3 + a y, y^2 + x^3 + b x)
    * ``i23``:           (x^2 + y^3 + a x + b y + c y^2, x y)
    """

    SHARKSFIN = "sharksfin"
    ODD_SHARKSFIN = "odd_sharksfin"
    I23 = "i23"

    @property
    def dim(self) -> int:
        return 2 if self is UnfoldingId.SHARKSFIN else 3

    @property
    def param_names(self) -> tuple[str, ...]:
        return ("a", "b") if self is UnfoldingId.SHARKSFIN else ("a", "b", "c")


class StratumTag(str, Enum):
    BEAKS_LIPS = "beaks_lips"
    GOOSE = "goose"
    SWALLOWTAIL = "swallowtail"
    BUTTERFLY = "butterfly"
    CUSP_FOLD = "cusp_fold"
    SHARKSFIN_AXIS = "sharksfin_axis"
    DELTOID_AXIS = "deltoid_axis"
    TACNODE = "tacnode"
    GULLS = "gulls"
    BEAKS_LINES = "beaks_lines"


VALID_STRATA: dict[UnfoldingId, frozenset[StratumTag]] = {
    UnfoldingId.I23: frozenset({
        StratumTag.BEAKS_LIPS, StratumTag.GOOSE, StratumTag.SWALLOWTAIL,
        StratumTag.BUTTERFLY, StratumTag.CUSP_FOLD, StratumTag.SHARKSFIN_AXIS,
        StratumTag.DELTOID_AXIS,
    }),
    UnfoldingId.SHARKSFIN: frozenset({StratumTag.BEAKS_LINES, StratumTag.SWALLOWTAIL}),
    UnfoldingId.ODD_SHARKSFIN: frozenset({
        StratumTag.BEAKS_LINES, StratumTag.SWALLOWTAIL, StratumTag.TACNODE,
        StratumTag.GULLS,
    }),
}


@dataclass(frozen=True)
class StratumId:
    """A stratum with its branch sign (``+1`` or ``-1``).

    For strata without a sign choice the sign is ignored.
    """

    tag: StratumTag
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "tag", StratumTag(self.tag))

    @property
    def sign_str(self) -> str:
        return "+" if self.sign > 0 else "-"

    def __str__(self) -> str:
        return f"{self.tag.value}{self.sign_str}"


class StratumError(ValueError):
    """Invalid unfolding/stratum pair or internal coordinates."""


class DomainError(StratumError):
    """Internal coordinates outside the stratum's domain."""


class Surd:
    """The real number ``coef * sqrt(rad)`` with rational ``coef`` and ``rad >= 0``.

    Enough structure for exact checks on the parametrizations: every
    irrational coordinate that occurs is of this shape, and the implicit
    equations only involve its square.
    """

    __slots__ = ("coef", "rad")

    def __init__(self, coef, rad):
        coef, rad = Fraction(coef), Fraction(rad)
        if rad < 0:
            raise ValueError("negative radicand")
        if coef == 0 or rad == 0:
            coef, rad = Fraction(0), Fraction(0)
        self.coef = coef
        self.rad = rad

    def square(self) -> Fraction:
        return self.coef * self.coef * self.rad

    def sign(self) -> int:
        return (self.coef > 0) - (self.coef < 0)

    def __float__(self) -> float:
        return float(self.coef) * math.sqrt(float(self.rad))

    def __neg__(self) -> "Surd":
        return Surd(-self.coef, self.rad)

    def __eq__(self, other) -> bool:
        if isinstance(other, Surd):
            return self.sign() == other.sign() and self.square() == other.square()
        if isinstance(other, Rational):
            o = Fraction(other)
            return self.sign() == (o > 0) - (o < 0) and self.square() == o * o
        return NotImplemented

    def __hash__(self):
        return hash((self.sign(), self.square()))

    def __repr__(self) -> str:
        return f"Surd({self.coef}, {self.rad})"

    def rational(self) -> Fraction | None:
        """The value as a rational, when the radicand is a rational square."""
        n, d = self.rad.numerator, self.rad.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return self.coef * Fraction(rn, rd)
        return None

    def __str__(self) -> str:
        q = self.rational()
        if q is not None:
            return str(q)
        return f"{self.coef}*sqrt({self.rad})"


def is_exact(v) -> bool:
    return isinstance(v, (Rational, Surd))


def to_float(v) -> float:
    return float(v)


def square(v):
    """``v**2``, exact for rationals and surds."""
    if isinstance(v, Surd):
        return v.square()
    return v * v


@dataclass(frozen=True)
class StratumPoint:
    """A parameter-space point on a stratum together with the internal
    coordinates it was produced from."""

    unfolding: UnfoldingId
    stratum: StratumId
    params: tuple
    internal: tuple
    verbatim: bool = False

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.params)

    def numeric(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.params)

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Surd):
                out = {"coef": str(v.coef), "rad": str(v.rad), "value": float(v)}
                if v.rational() is not None:
                    out["exact"] = str(v.rational())
                return out
            if isinstance(v, Fraction) or isinstance(v, int):
                return {"exact": str(v), "value": float(v)}
            return {"value": float(v)}

        return {
            "unfolding": self.unfolding.value,
            "stratum": self.stratum.tag.value,
            "sign": self.stratum.sign_str,
            "internal": [enc(v) for v in self.internal],
            "params": dict(zip(self.unfolding.param_names, (enc(v) for v in self.params))),
            "verbatim": self.verbatim,
        }


@dataclass
class MultiGermWitness:
    """A cusp point ``p`` and a fold point ``q`` with a common image, or for a
    tacnode two fold points.  ``residuals`` holds the defining equations
    evaluated at the refined points."""

    p: tuple[float, float]
    q: tuple[float, float]
    params: tuple
    residuals: dict[str, float] = field(default_factory=dict)
    classes: tuple[str, str] = ("", "")

    @property
    def X(self) -> float:
        return self.q[0]

    @property
    def Y(self) -> float:
        return self.q[1]

    def max_residual(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)

    def to_json(self) -> dict:
        return {
            "p": list(self.p),
            "q": list(self.q),
            "params": [float(v) for v in self.params],
            "residuals": self.residuals,
            "classes": list(self.classes),
        }
