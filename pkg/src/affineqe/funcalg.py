"""Differentiation-closed function algebras for homogeneous affine surfaces.

Three contexts share one term shape

    coeff * exp(e1*x1 + e2*x2) * x1^p * log(x1)^l * x2^d * y1^f1 * y2^f2

TYPE_A:  e1, e2 complex algebraic, p a non-negative integer, l = 0, no fiber.
TYPE_B:  e1 = e2 = 0, p complex algebraic, l >= 0, no fiber; domain x1 > 0.
FOURD:   all fields allowed; used on the cotangent bundle with fiber (y1, y2).

Every context is closed under the partial derivatives of its variables, which
is what makes exact residual computations possible downstream.  All values
are immutable and all operations pure, so they are safe to share across
threads without synchronization.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .scalars import Scalar, ZERO


class FunctionAlgebraError(ValueError):
    pass


class DomainError(ValueError):
    pass


class Context(Enum):
    TYPE_A = "A"
    TYPE_B = "B"
    FOURD = "4d"

    @property
    def dimension(self) -> int:
        return 4 if self is Context.FOURD else 2


@dataclass(frozen=True)
class Point:
    coordinates: tuple

    def __init__(self, coords: Sequence[float]):
        object.__setattr__(self, "coordinates", tuple(float(c) for c in coords))
        if len(self.coordinates) not in (2, 4):
            raise DomainError("points live on a surface (2 coords) or T*M (4 coords)")


@dataclass(frozen=True)
class Term:
    coeff: Scalar
    exp1: Scalar = ZERO
    exp2: Scalar = ZERO
    pow1: Scalar = ZERO
    logdeg: int = 0
    deg2: int = 0
    fiberdeg1: int = 0
    fiberdeg2: int = 0

    def key(self):
        return (self.exp1, self.exp2, self.pow1, self.logdeg, self.deg2,
                self.fiberdeg1, self.fiberdeg2)

    def sort_key(self):
        return (self.exp1.sort_key(), self.exp2.sort_key(), self.pow1.sort_key(),
                self.logdeg, self.deg2, self.fiberdeg1, self.fiberdeg2)

    def with_coeff(self, c: Scalar) -> "Term":
        return Term(c, self.exp1, self.exp2, self.pow1, self.logdeg,
                    self.deg2, self.fiberdeg1, self.fiberdeg2)


def _check_term(t: Term, context: Context) -> None:
    if min(t.logdeg, t.deg2, t.fiberdeg1, t.fiberdeg2) < 0:
        raise FunctionAlgebraError("negative integer degree in term")
    if context is Context.TYPE_A:
        if not t.pow1.is_nonnegative_integer():
            raise FunctionAlgebraError(
                "Type-A terms are exp-polynomial: x1 power must be a "
                f"non-negative integer, got {t.pow1!r}")
        if t.logdeg:
            raise FunctionAlgebraError("Type-A terms carry no logarithms")
        if t.fiberdeg1 or t.fiberdeg2:
            raise FunctionAlgebraError("surface terms carry no fiber degrees")
    elif context is Context.TYPE_B:
        if not (t.exp1.is_zero() and t.exp2.is_zero()):
            raise FunctionAlgebraError("Type-B terms carry no exponential factor")
        if t.fiberdeg1 or t.fiberdeg2:
            raise FunctionAlgebraError("surface terms carry no fiber degrees")


class AnsatzFunction:
    """A finite sum of terms, kept merged and in a canonical order."""

    __slots__ = ("terms", "context")

    def __init__(self, terms: Iterable[Term], context: Context):
        merged: dict = {}
        for t in terms:
            _check_term(t, context)
            k = t.key()
            if k in merged:
                merged[k] = merged[k].with_coeff(merged[k].coeff + t.coeff)
            else:
                merged[k] = t
        kept = [t for t in merged.values() if not t.coeff.is_zero()]
        kept.sort(key=Term.sort_key)
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "context", context)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("AnsatzFunction is immutable")

    # -- algebra -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "AnsatzFunction") -> "AnsatzFunction":
        if self.context is not other.context:
            raise FunctionAlgebraError("mixed contexts")
        return AnsatzFunction(self.terms + other.terms, self.context)

    def __neg__(self):
        return AnsatzFunction(
            [t.with_coeff(-t.coeff) for t in self.terms], self.context)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "AnsatzFunction":
        c = Scalar.of(c)
        return AnsatzFunction(
            [t.with_coeff(t.coeff * c) for t in self.terms], self.context)

    __mul__ = scale
    __rmul__ = scale

    def conjugate(self) -> "AnsatzFunction":
        out = [Term(t.coeff.conjugate(), t.exp1.conjugate(), t.exp2.conjugate(),
                    t.pow1.conjugate(), t.logdeg, t.deg2, t.fiberdeg1, t.fiberdeg2)
               for t in self.terms]
        return AnsatzFunction(out, self.context)

    def is_real(self) -> bool:
        return self == self.conjugate()

    def __eq__(self, other):
        if not isinstance(other, AnsatzFunction):
            return NotImplemented
        return self.context is other.context and self.terms == other.terms

    def __hash__(self):
        return hash((self.context, self.terms))

    # -- calculus ----------------------------------------------------------
    def derive(self, axis: int) -> "AnsatzFunction":
        """Exact partial derivative; axis is 1-based (1..2, or 1..4 on T*M)."""
        if not 1 <= axis <= self.context.dimension:
            raise FunctionAlgebraError(
                f"axis {axis} out of range for context {self.context.value}")
        out: list[Term] = []
        for t in self.terms:
            if axis == 1:
                if not t.exp1.is_zero():
                    out.append(t.with_coeff(t.coeff * t.exp1))
                if not t.pow1.is_zero():
                    out.append(Term(t.coeff * t.pow1, t.exp1, t.exp2,
                                    t.pow1 - 1, t.logdeg, t.deg2,
                                    t.fiberdeg1, t.fiberdeg2))
                if t.logdeg:
                    out.append(Term(t.coeff * t.logdeg, t.exp1, t.exp2,
                                    t.pow1 - 1, t.logdeg - 1, t.deg2,
                                    t.fiberdeg1, t.fiberdeg2))
            elif axis == 2:
                if not t.exp2.is_zero():
                    out.append(t.with_coeff(t.coeff * t.exp2))
                if t.deg2:
                    out.append(Term(t.coeff * t.deg2, t.exp1, t.exp2, t.pow1,
                                    t.logdeg, t.deg2 - 1,
                                    t.fiberdeg1, t.fiberdeg2))
            elif axis == 3:
                if t.fiberdeg1:
                    out.append(Term(t.coeff * t.fiberdeg1, t.exp1, t.exp2,
                                    t.pow1, t.logdeg, t.deg2,
                                    t.fiberdeg1 - 1, t.fiberdeg2))
            else:
                if t.fiberdeg2:
                    out.append(Term(t.coeff * t.fiberdeg2, t.exp1, t.exp2,
                                    t.pow1, t.logdeg, t.deg2,
                                    t.fiberdeg1, t.fiberdeg2 - 1))
        return AnsatzFunction(out, self.context)

    def eval(self, point) -> complex:
        coords = point.coordinates if isinstance(point, Point) else tuple(point)
        if len(coords) < self.context.dimension:
            raise DomainError(
                f"point has {len(coords)} coordinates, context needs "
                f"{self.context.dimension}")
        x1, x2 = float(coords[0]), float(coords[1])
        y1 = float(coords[2]) if len(coords) > 2 else 0.0
        y2 = float(coords[3]) if len(coords) > 3 else 0.0
        total = 0j
        for t in self.terms:
            needs_positive = t.logdeg > 0 or not t.pow1.is_nonnegative_integer()
            if needs_positive and x1 <= 0:
                raise DomainError(
                    "power/log terms need x1 > 0; got x1 = %g" % x1)
            v = complex(t.coeff.to_complex())
            e1, e2 = t.exp1.to_complex(), t.exp2.to_complex()
            if e1 or e2:
                v *= cmath.exp(e1 * x1 + e2 * x2)
            p = t.pow1.to_complex()
            if p != 0:
                if t.pow1.is_nonnegative_integer():
                    v *= x1 ** int(t.pow1.as_fraction())
                else:
                    v *= cmath.exp(p * math.log(x1))
            if t.logdeg:
                v *= math.log(x1) ** t.logdeg
            if t.deg2:
                v *= x2 ** t.deg2
            if t.fiberdeg1:
                v *= y1 ** t.fiberdeg1
            if t.fiberdeg2:
                v *= y2 ** t.fiberdeg2
            total += v
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for t in self.terms:
            factors = []
            c = t.coeff
            if not (t.exp1.is_zero() and t.exp2.is_zero()):
                factors.append(f"exp({t.exp1!r}*x1+{t.exp2!r}*x2)")
            if not t.pow1.is_zero():
                factors.append(f"x1^{t.pow1!r}")
            if t.logdeg:
                factors.append(f"log(x1)^{t.logdeg}")
            if t.deg2:
                factors.append(f"x2^{t.deg2}")
            if t.fiberdeg1:
                factors.append(f"y1^{t.fiberdeg1}")
            if t.fiberdeg2:
                factors.append(f"y2^{t.fiberdeg2}")
            lead = f"{c!r}"
            bits.append("*".join([lead] + factors) if factors else lead)
        return " + ".join(bits)

    # -- serialization -------------------------------------------------------
    def to_json(self) -> list:
        return [_term_to_json(t) for t in self.terms]

    @staticmethod
    def from_json(data: list, context: Context) -> "AnsatzFunction":
        return AnsatzFunction([_term_from_json(d) for d in data], context)


# -- scalar (de)serialization -------------------------------------------------

def _fraction_str(f: Fraction) -> str:
    return str(f)


def scalar_to_json(s: Scalar):
    if s.is_gaussian_rational():
        re = s.real_part().as_fraction()
        im = s.imag_part().as_fraction()
        return [_fraction_str(re), _fraction_str(im)]
    ctx = s.context
    lifted = s._lift(ctx)  # tuple of (re, im) Fractions
    return {
        "c": [[_fraction_str(re), _fraction_str(im)] for re, im in lifted],
        "min": [_fraction_str(c) for c in ctx.minpoly],
        "root": ctx.root_index,
    }


def scalar_from_json(data) -> Scalar:
    if isinstance(data, (int, str)):
        return Scalar(Fraction(data))
    if isinstance(data, list):
        return Scalar(Fraction(data[0]), Fraction(data[1]))
    coeffs = [(Fraction(re), Fraction(im)) for re, im in data["c"]]
    minpoly = [Fraction(c) for c in data["min"]]
    root = int(data["root"])
    if len(minpoly) == 3:
        theta = Scalar.sqrt_rational(-minpoly[0])  # canonical x^2 - m
    else:
        theta = Scalar.algebraic(minpoly, root)
    acc = Scalar(0)
    power = Scalar(1)
    for re, im in coeffs:
        acc = acc + Scalar(re, im) * power
        power = power * theta
    return acc


def _term_to_json(t: Term) -> dict:
    return {
        "coeff": scalar_to_json(t.coeff),
        "exp": [scalar_to_json(t.exp1), scalar_to_json(t.exp2)],
        "pow1": scalar_to_json(t.pow1),
        "log": t.logdeg,
        "x2": t.deg2,
        "y": [t.fiberdeg1, t.fiberdeg2],
    }


def _term_from_json(d: dict) -> Term:
    return Term(
        coeff=scalar_from_json(d["coeff"]),
        exp1=scalar_from_json(d["exp"][0]),
        exp2=scalar_from_json(d["exp"][1]),
        pow1=scalar_from_json(d.get("pow1", "0")),
        logdeg=int(d.get("log", 0)),
        deg2=int(d.get("x2", 0)),
        fiberdeg1=int(d.get("y", [0, 0])[0]),
        fiberdeg2=int(d.get("y", [0, 0])[1]),
    )


# -- operation aliases -----------------------------------------------------------

def derive(f: AnsatzFunction, axis: int) -> AnsatzFunction:
    return f.derive(axis)


def evaluate(f: AnsatzFunction, point) -> complex:
    return f.eval(point)


# -- constructors --------------------------------------------------------------

def constant(value, context: Context) -> AnsatzFunction:
    return AnsatzFunction([Term(Scalar.of(value))], context)


def monomial(context: Context, *, coeff=1, exp=(0, 0), pow1=0, log=0, x2=0,
             fiber=(0, 0)) -> AnsatzFunction:
    t = Term(Scalar.of(coeff), Scalar.of(exp[0]), Scalar.of(exp[1]),
             Scalar.of(pow1), int(log), int(x2), int(fiber[0]), int(fiber[1]))
    return AnsatzFunction([t], context)


def exp_linear(a1, a2, context: Context = Context.TYPE_A) -> AnsatzFunction:
    return monomial(context, exp=(a1, a2))


def x1_power(alpha, context: Context = Context.TYPE_B) -> AnsatzFunction:
    return monomial(context, pow1=alpha)


def product(f: AnsatzFunction, g: AnsatzFunction) -> AnsatzFunction:
    """Term-by-term product.

    Internal support for the cotangent-bundle and warped-product machinery
    (metric entries times functions); not a general simplification product.
    """
    if f.context is not g.context:
        raise FunctionAlgebraError("mixed contexts")
    out = []
    for s in f.terms:
        for t in g.terms:
            out.append(Term(s.coeff * t.coeff, s.exp1 + t.exp1, s.exp2 + t.exp2,
                            s.pow1 + t.pow1, s.logdeg + t.logdeg,
                            s.deg2 + t.deg2, s.fiberdeg1 + t.fiberdeg1,
                            s.fiberdeg2 + t.fiberdeg2))
    return AnsatzFunction(out, f.context)


def shift_pow1(f: AnsatzFunction, delta) -> AnsatzFunction:
    """Multiply by x1^delta (delta exact); used for the 1/x1 Christoffel scale."""
    d = Scalar.of(delta)
    return AnsatzFunction(
        [Term(t.coeff, t.exp1, t.exp2, t.pow1 + d, t.logdeg, t.deg2,
              t.fiberdeg1, t.fiberdeg2) for t in f.terms], f.context)


def to_bundle(f: AnsatzFunction) -> AnsatzFunction:
    """Pull a surface function back to the cotangent bundle (same terms)."""
    if f.context is Context.FOURD:
        return f
    return AnsatzFunction(f.terms, Context.FOURD)


def substitute_linear(f: AnsatzFunction, mat) -> AnsatzFunction:
    """Return g with g(x) = f(S x) for the 2x2 exact matrix S (new = S @ old).

    Exponential factors rotate by S^T; integer powers of either coordinate are
    expanded binomially.  Fractional powers or logarithms of x1 require the
    map to fix x1 (first row (1, 0)), which holds for every Type-B change.
    """
    if f.context is Context.FOURD:
        raise FunctionAlgebraError("substitute_linear acts on surface functions")
    s11, s12 = Scalar.of(mat[0][0]), Scalar.of(mat[0][1])
    s21, s22 = Scalar.of(mat[1][0]), Scalar.of(mat[1][1])
    fixes_x1 = s11 == Scalar(1) and s12.is_zero()
    out: list[Term] = []
    for t in f.terms:
        pieces = [Term(t.coeff, t.exp1 * s11 + t.exp2 * s21,
                       t.exp1 * s12 + t.exp2 * s22,
                       logdeg=t.logdeg)]
        if t.logdeg and not fixes_x1:
            raise FunctionAlgebraError("log terms need a map fixing x1")
        if not t.pow1.is_zero():
            if t.pow1.is_nonnegative_integer():
                p = int(t.pow1.as_fraction())
                pieces = _expand_power(pieces, s11, s12, p, f.context)
            elif fixes_x1:
                pieces = [Term(q.coeff, q.exp1, q.exp2, t.pow1, q.logdeg,
                               q.deg2, 0, 0) for q in pieces]
            else:
                raise FunctionAlgebraError(
                    "fractional x1 powers need a map fixing x1")
        if t.deg2:
            pieces = _expand_power(pieces, s21, s22, t.deg2, f.context)
        out.extend(pieces)
    return AnsatzFunction(out, f.context)


def _expand_power(pieces: list[Term], c1: Scalar, c2: Scalar, p: int,
                  context: Context) -> list[Term]:
    """Multiply every piece by (c1*x1 + c2*x2)^p, binomially."""
    out = []
    for q in pieces:
        for k in range(p + 1):
            coeff = q.coeff * math.comb(p, k) * c1 ** (p - k) * c2 ** k
            out.append(Term(coeff, q.exp1, q.exp2, q.pow1 + (p - k),
                            q.logdeg, q.deg2 + k, q.fiberdeg1, q.fiberdeg2))
    return out


# -- exact linear algebra on spans ---------------------------------------------

def rank_basis(fs: Sequence[AnsatzFunction]) -> tuple[int, list[AnsatzFunction]]:
    """Exact rank of span(fs) and a maximal independent sublist, first come.

    Distinct term keys are linearly independent functions, so the rank is the
    rank of the coefficient matrix over the exact scalar field.
    """
    fs = list(fs)
    if not fs:
        return 0, []
    context = fs[0].context
    for f in fs:
        if f.context is not context:
            raise FunctionAlgebraError("mixed contexts")
    pivots: list[tuple] = []  # (key, normalized row dict)
    basis = []
    for f in fs:
        row = {t.key(): t.coeff for t in f.terms}
        for key, prow in pivots:
            if key in row and not row[key].is_zero():
                factor = row[key]
                for k2, v2 in prow.items():
                    row[k2] = row.get(k2, Scalar(0)) - factor * v2
        row = {k: v for k, v in row.items() if not v.is_zero()}
        if row:
            lead_key = sorted(row.keys(), key=_key_sort)[0]
            inv = row[lead_key].inverse()
            prow = {k: v * inv for k, v in row.items()}
            pivots.append((lead_key, prow))
            basis.append(f)
    return len(basis), basis


def _key_sort(key):
    e1, e2, p, l, d, f1, f2 = key
    return (e1.sort_key(), e2.sort_key(), p.sort_key(), l, d, f1, f2)
