"""Truncated bivariate Taylor polynomials.

A :class:`Jet` of order ``N`` stores the coefficients ``c[i, j]`` of
``x**i * y**j`` for ``i + j <= N`` in a dense ``(N+1, N+1)`` array.  Two
scalar kinds are supported:

* ``"exact"`` -- ``int``/``Fraction`` entries in an object array.  Used for
  identity-level checks (stratum residuals, curve factorizations, the
  Table-style recognition criteria on rational germs).
* ``"float"`` -- ``float64`` entries.  Used for tracing and Newton work.

The kind is fixed at construction and propagates through arithmetic; mixing
kinds raises :class:`KindMismatch`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational, Real
from typing import Iterable, Mapping

import numpy as np

DEFAULT_ORDER = 9

EXACT = "exact"
FLOAT = "float"


class KindMismatch(TypeError):
    """Raised when exact and floating jets are combined."""


def _is_exact_scalar(v) -> bool:
    return isinstance(v, Rational)


def _coerce_exact(v):
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, Rational):
        return Fraction(v.numerator, v.denominator)
    raise KindMismatch(f"cannot store {v!r} in an exact jet")


def _integerize(c: np.ndarray) -> tuple[int, np.ndarray]:
    """Scale an exact coefficient array to integers; returns (denominator, ints)."""
    d = 1
    for v in c.flat:
        if isinstance(v, Fraction) and v.denominator != 1:
            d = d * v.denominator // math.gcd(d, v.denominator)
    if d == 1:
        return 1, c
    out = np.empty_like(c)
    for idx, v in np.ndenumerate(c):
        out[idx] = int(v * d) if v != 0 else 0
    return d, out


def _mask(order: int) -> np.ndarray:
    i, j = np.indices((order + 1, order + 1))
    return (i + j) <= order


class Jet:
    """Truncated power series in ``x`` and ``y``."""

    __slots__ = ("order", "kind", "coeffs")

    def __init__(self, coeffs: np.ndarray, order: int, kind: str):
        self.order = int(order)
        self.kind = kind
        self.coeffs = coeffs

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, order: int = DEFAULT_ORDER, kind: str = EXACT) -> "Jet":
        if order < 0:
            raise ValueError("jet order must be >= 0")
        if kind == EXACT:
            c = np.zeros((order + 1, order + 1), dtype=object)
            c[...] = 0
        elif kind == FLOAT:
            c = np.zeros((order + 1, order + 1), dtype=float)
        else:
            raise ValueError(f"unknown scalar kind {kind!r}")
        return cls(c, order, kind)

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], object],
                   order: int = DEFAULT_ORDER, kind: str | None = None) -> "Jet":
        """Build a jet from ``{(i, j): coefficient}``; terms above ``order`` are dropped.

        When ``kind`` is omitted it is exact iff every coefficient is rational.
        """
        if kind is None:
            kind = EXACT if all(_is_exact_scalar(v) for v in terms.values()) else FLOAT
        out = cls.zero(order, kind)
        for (i, j), v in terms.items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            if i + j > order:
                continue
            out.coeffs[i, j] += _coerce_exact(v) if kind == EXACT else float(v)
        return out

    @classmethod
    def constant(cls, value, order: int = DEFAULT_ORDER, kind: str | None = None) -> "Jet":
        return cls.from_terms({(0, 0): value}, order, kind)

    @classmethod
    def monomial(cls, i: int, j: int, coeff=1, order: int = DEFAULT_ORDER,
                 kind: str | None = None) -> "Jet":
        return cls.from_terms({(i, j): coeff}, order, kind)

    @classmethod
    def variables(cls, order: int = DEFAULT_ORDER, kind: str = EXACT) -> tuple["Jet", "Jet"]:
        """Return the coordinate jets ``(x, y)``."""
        return (cls.monomial(1, 0, 1, order, kind), cls.monomial(0, 1, 1, order, kind))

    # -- basic accessors ----------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        if i < 0 or j < 0 or i + j > self.order:
            return 0 if self.kind == EXACT else 0.0
        return self.coeffs[i, j]

    def terms(self) -> dict[tuple[int, int], object]:
        """Nonzero coefficients keyed by exponent pair, in graded order."""
        out = {}
        for d in range(self.order + 1):
            for i in range(d, -1, -1):
                v = self.coeffs[i, d - i]
                if v != 0:
                    out[(i, d - i)] = v
        return out

    def copy(self) -> "Jet":
        return Jet(self.coeffs.copy(), self.order, self.kind)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.kind == EXACT:
            return all(v == 0 for v in self.coeffs.flat)
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def lowest_degree(self, tol: float = 0.0) -> int | None:
        """Smallest total degree carrying a nonzero coefficient, or None."""
        for d in range(self.order + 1):
            for i in range(d + 1):
                v = self.coeffs[i, d - i]
                if (v != 0 if self.kind == EXACT else abs(v) > tol):
                    return d
        return None

    def homogeneous_part(self, degree: int) -> dict[tuple[int, int], object]:
        if degree > self.order:
            return {}
        return {(i, degree - i): self.coeffs[i, degree - i] for i in range(degree + 1)}

    def degree(self) -> int:
        """Highest total degree with a nonzero coefficient (-1 for zero)."""
        for d in range(self.order, -1, -1):
            if any(self.coeffs[i, d - i] != 0 for i in range(d + 1)):
                return d
        return -1

    def max_abs_coeff(self) -> float:
        if self.kind == EXACT:
            return float(max((abs(v) for v in self.coeffs.flat), default=0))
        return float(np.max(np.abs(self.coeffs)))

    # -- kind / order changes ---------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self.copy()
        c = self.coeffs[: order + 1, : order + 1].copy()
        c[~_mask(order)] = 0
        return Jet(c, order, self.kind)

    def with_order(self, order: int) -> "Jet":
        """Truncate or zero-extend to ``order`` (extension is exact for polynomials)."""
        if order <= self.order:
            return self.truncate(order)
        out = Jet.zero(order, self.kind)
        out.coeffs[: self.order + 1, : self.order + 1] = self.coeffs
        return out

    def to_float(self) -> "Jet":
        if self.kind == FLOAT:
            return self.copy()
        return Jet(self.coeffs.astype(float), self.order, FLOAT)

    def to_exact(self, max_denominator: int | None = None) -> "Jet":
        """Convert to exact kind; floats are converted exactly unless ``max_denominator`` is given."""
        if self.kind == EXACT:
            return self.copy()
        out = Jet.zero(self.order, EXACT)
        for (i, j), v in self.terms().items():
            f = Fraction(float(v))
            if max_denominator is not None:
                f = f.limit_denominator(max_denominator)
            out.coeffs[i, j] = _coerce_exact(f)
        return out

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Jet") -> None:
        if self.kind != other.kind:
            raise KindMismatch(f"cannot combine {self.kind} jet with {other.kind} jet")

    def _scalar(self, v):
        if self.kind == EXACT:
            if not _is_exact_scalar(v):
                raise KindMismatch(f"non-rational scalar {v!r} with an exact jet")
            return _coerce_exact(v)
        return float(v)

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            n = min(self.order, other.order)
            a, b = self.truncate(n), other.truncate(n)
            return Jet(a.coeffs + b.coeffs, n, self.kind)
        if isinstance(other, Real):
            out = self.copy()
            out.coeffs[0, 0] = out.coeffs[0, 0] + self._scalar(other)
            return out
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order, self.kind)

    def __sub__(self, other):
        if isinstance(other, (Jet, Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, lam) -> "Jet":
        lam = self._scalar(lam)
        return Jet(self.coeffs * lam, self.order, self.kind)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return self._mul(other)
        if isinstance(other, Real):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def _mul(self, other: "Jet") -> "Jet":
        self._check(other)
        n = min(self.order, other.order)
        a = self.truncate(n).coeffs
        b = other.truncate(n).coeffs
        exact = self.kind == EXACT
        if exact:
            # integer numerators over a common denominator: object-int products
            # are several times cheaper than Fraction products
            da, a = _integerize(a)
            db, b = _integerize(b)
        out = Jet.zero(n, self.kind)
        c = out.coeffs
        # skip zeros: germs and unfoldings are sparse in practice
        nz = [(i, j) for i in range(n + 1) for j in range(n + 1 - i) if a[i, j] != 0]
        for i, j in nz:
            c[i:, j:] += a[i, j] * b[: n + 1 - i, : n + 1 - j]
        c[~_mask(n)] = 0
        if exact and da * db != 1:
            d = da * db
            for idx in zip(*np.nonzero(c)):
                c[idx] = _coerce_exact(Fraction(c[idx], d))
        return out

    def __pow__(self, k: int) -> "Jet":
        if not isinstance(k, Integral) or k < 0:
            raise ValueError("jets support non-negative integer powers only")
        out = Jet.constant(1, self.order, self.kind)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        if self.order != other.order:
            return False
        return bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash((self.order, tuple(sorted(self.terms().items()))))

    def allclose(self, other: "Jet", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        n = min(self.order, other.order)
        a = self.truncate(n).coeffs.astype(float)
        b = other.truncate(n).coeffs.astype(float)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    # -- calculus ---------------------------------------------------------

    def partial(self, var: str) -> "Jet":
        """Formal partial derivative; the result has order ``order - 1``."""
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        n = self.order - 1
        out = Jet.zero(n, self.kind)
        if var == "x":
            k = np.arange(1, self.order + 1)
            d = self.coeffs[1:, :] * k[:, None]
            out.coeffs[...] = d[: n + 1, : n + 1]
        elif var == "y":
            k = np.arange(1, self.order + 1)
            d = self.coeffs[:, 1:] * k[None, :]
            out.coeffs[...] = d[: n + 1, : n + 1]
        else:
            raise ValueError(f"unknown variable {var!r}")
        out.coeffs[~_mask(n)] = 0
        return out

    def dx(self) -> "Jet":
        return self.partial("x")

    def dy(self) -> "Jet":
        return self.partial("y")

    def gradient_at_origin(self) -> tuple:
        return (self[1, 0], self[0, 1])

    def hessian_at_origin(self) -> tuple[tuple, tuple]:
        return ((2 * self[2, 0], self[1, 1]), (self[1, 1], 2 * self[0, 2]))

    # -- evaluation and substitution ---------------------------------------

    def __call__(self, x, y):
        return self.evaluate(x, y)

    def evaluate(self, x, y):
        """Evaluate the truncated polynomial; works on scalars and numpy arrays."""
        if self.kind == FLOAT or isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            c = self.coeffs.astype(float) if self.kind == EXACT else self.coeffs
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            acc = np.zeros(np.broadcast(x, y).shape)
            # Horner in x of Horner-in-y rows.
            for i in range(self.order, -1, -1):
                row = np.zeros_like(acc)
                for j in range(self.order - i, -1, -1):
                    row = row * y + c[i, j]
                acc = acc * x + row
            return float(acc) if acc.ndim == 0 else acc
        acc = 0
        for i in range(self.order, -1, -1):
            row = 0
            for j in range(self.order - i, -1, -1):
                row = row * y + self.coeffs[i, j]
            acc = acc * x + row
        return acc

    def compose(self, g1: "Jet", g2: "Jet") -> "Jet":
        """Return ``self(g1, g2)`` truncated to ``self.order``.

        Both substituted jets must vanish at the origin.
        """
        if g1[0, 0] != 0 or g2[0, 0] != 0:
            raise ValueError("composition requires origin-preserving substitutions")
        self._check(g1)
        self._check(g2)
        n = self.order
        g1 = g1.with_order(n)
        g2 = g2.with_order(n)
        terms = self.terms()
        if not terms:
            return Jet.zero(n, self.kind)
        imax = max(i for i, _ in terms)
        jmax = max(j for _, j in terms)
        p2 = [Jet.constant(1, n, self.kind)]
        for _ in range(jmax):
            p2.append(p2[-1] * g2)
        # Horner in g1 over rows sum_j c_ij g2^j
        out = Jet.zero(n, self.kind)
        for i in range(imax, -1, -1):
            row = Jet.zero(n, self.kind)
            for (ii, j), v in terms.items():
                if ii == i:
                    row = row + p2[j].scale(v)
            out = out * g1 + row if i < imax else row
        return out

    def translate(self, x0, y0) -> "Jet":
        """Re-expand the polynomial about ``(x0, y0)``: returns ``q(u, v) = p(x0 + u, y0 + v)``.

        Exact for the stored polynomial (the truncation is treated as exact).
        """
        n = self.order
        if self.kind == EXACT:
            x0 = self._scalar(x0)
            y0 = self._scalar(y0)
        else:
            x0, y0 = float(x0), float(y0)
        out = Jet.zero(n, self.kind)
        c = out.coeffs
        for (i, j), v in self.terms().items():
            for k in range(i + 1):
                bx = math.comb(i, k) * x0 ** (i - k)
                if bx == 0:
                    continue
                for l in range(j + 1):
                    by = math.comb(j, l) * y0 ** (j - l)
                    if by == 0:
                        continue
                    c[k, l] += v * bx * by
        if self.kind == EXACT:
            for idx, v in np.ndenumerate(c):
                c[idx] = _coerce_exact(v) if idx[0] + idx[1] <= n else 0
        return out

    def directional(self, vx: "Jet", vy: "Jet") -> "Jet":
        """Apply the vector field ``vx d/dx + vy d/dy``."""
        return vx * self.dx() + vy * self.dy()

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        def enc(v):
            if self.kind == EXACT:
                return str(v)
            return float(v)

        return {
            "order": self.order,
            "kind": self.kind,
            "coeffs": [[i, j, enc(v)] for (i, j), v in self.terms().items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Jet":
        kind = data.get("kind", EXACT)
        order = int(data["order"])
        terms = {}
        for i, j, v in data["coeffs"]:
            terms[(int(i), int(j))] = Fraction(v) if kind == EXACT else float(v)
        return cls.from_terms(terms, order, kind)

    # -- display ----------------------------------------------------------

    def __repr__(self) -> str:
        return f"Jet({self.to_str()}, order={self.order}, kind={self.kind})"

    def to_str(self) -> str:
        parts = []
        for (i, j), v in self.terms().items():
            mono = "*".join(
                p for p in (
                    "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                    "" if j == 0 else ("y" if j == 1 else f"y^{j}"),
                ) if p
            )
            coeff = str(v)
            if mono and coeff in ("1", "1.0"):
                parts.append(mono)
            elif mono and coeff in ("-1", "-1.0"):
                parts.append("-" + mono)
            elif mono:
                parts.append(f"{coeff}*{mono}" if "/" not in coeff else f"({coeff})*{mono}")
            else:
                parts.append(coeff)
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def lift(values: Iterable, order: int = DEFAULT_ORDER, kind: str = FLOAT):
    """Constant jets for each value (convenience for building vector fields)."""
    return [Jet.constant(v, order, kind) for v in values]
