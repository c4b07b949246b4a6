"""Exact scalars: Gaussian rationals optionally extended by one algebraic number.

A Scalar is an element of Q(i)(theta) where theta is either absent, a square
root sqrt(m) of a squarefree integer m > 1, or a root of a monic irreducible
rational cubic.  This is enough to carry every coefficient and exponent the
classification produces (quadratic formulas, and the cubic exponent systems of
the rank-2 critical case) while keeping equality decidable and exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

RationalLike = Union[int, Fraction]

_GQ = tuple  # (Fraction re, Fraction im)

_ZERO_GQ = (Fraction(0), Fraction(0))
_ONE_GQ = (Fraction(1), Fraction(0))


class ScalarError(ArithmeticError):
    pass


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise ScalarError(f"expected an exact rational, got {x!r}")


def _gq(re, im=0) -> _GQ:
    return (_fr(re), _fr(im))


def _gq_add(a: _GQ, b: _GQ) -> _GQ:
    return (a[0] + b[0], a[1] + b[1])


def _gq_sub(a: _GQ, b: _GQ) -> _GQ:
    return (a[0] - b[0], a[1] - b[1])


def _gq_mul(a: _GQ, b: _GQ) -> _GQ:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gq_neg(a: _GQ) -> _GQ:
    return (-a[0], -a[1])


def _gq_inv(a: _GQ) -> _GQ:
    n = a[0] * a[0] + a[1] * a[1]
    if n == 0:
        raise ZeroDivisionError("division by zero scalar")
    return (a[0] / n, -a[1] / n)


def _gq_conj(a: _GQ) -> _GQ:
    return (a[0], -a[1])


def _gq_is_zero(a: _GQ) -> bool:
    return a[0] == 0 and a[1] == 0


def squarefree_split(n: int) -> tuple[int, int]:
    """n = s*s*m with m squarefree, for n > 0.  Returns (s, m)."""
    if n <= 0:
        raise ScalarError("squarefree_split needs a positive integer")
    s, m, d, r = 1, 1, 2, n
    while d * d <= r:
        if r % d == 0:
            e = 0
            while r % d == 0:
                r //= d
                e += 1
            s *= d ** (e // 2)
            if e % 2:
                m *= d
        d += 1
    return s, m * r


def _cubic_discriminant(p: Sequence[Fraction]) -> Fraction:
    # monic x^3 + b x^2 + c x + d, p = (d, c, b, 1)
    d, c, b = p[0], p[1], p[2]
    return (
        18 * b * c * d - 4 * b ** 3 * d + b ** 2 * c ** 2 - 4 * c ** 3 - 27 * d ** 2
    )


def _poly_eval_c(p: Sequence[Fraction], z: complex) -> complex:
    acc = 0j
    for coeff in reversed(p):
        acc = acc * z + complex(coeff)
    return acc


def _poly_roots_numeric(p: Sequence[Fraction]) -> list[complex]:
    """All roots of a monic rational polynomial, degree 2 or 3 (Durand-Kerner)."""
    deg = len(p) - 1
    roots = [complex(0.4, 0.9) ** (k + 1) + 0.5 for k in range(deg)]
    dp = [k * p[k] for k in range(1, len(p))]
    for _ in range(200):
        new = []
        for i, z in enumerate(roots):
            denom = 1.0 + 0j
            for j, w in enumerate(roots):
                if i != j:
                    denom *= z - w
            new.append(z - _poly_eval_c(p, z) / denom)
        shift = max(abs(a - b) for a, b in zip(new, roots))
        roots = new
        if shift < 1e-14:
            break
    # Newton polish
    for i, z in enumerate(roots):
        for _ in range(60):
            f = _poly_eval_c(p, z)
            df = _poly_eval_c(dp, z)  # dp indexed from x^0
            if df == 0:
                break
            step = f / df
            z -= step
            if abs(step) < 1e-16 * max(1.0, abs(z)):
                break
        roots[i] = z
    return roots


_CTX_ROOTS: dict[tuple, list[complex]] = {}
_CTX_REDUCTIONS: dict[tuple, list[tuple[_GQ, ...]]] = {}


@dataclass(frozen=True)
class AlgebraicContext:
    """A single algebraic generator theta: monic rational minpoly + root index."""

    minpoly: tuple  # ascending Fractions, leading coefficient 1, degree 2 or 3
    root_index: int

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    def roots(self) -> list[complex]:
        key = self.minpoly
        got = _CTX_ROOTS.get(key)
        if got is None:
            got = _poly_roots_numeric(self.minpoly)
            # deterministic order: real roots ascending, then complex by (re, im)
            got.sort(key=lambda z: (0 if abs(z.imag) < 1e-9 else 1, z.real, z.imag))
            got = [complex(z.real, 0.0) if abs(z.imag) < 1e-9 else z for z in got]
            _CTX_ROOTS[key] = got
        return got

    def root_value(self) -> complex:
        return self.roots()[self.root_index]

    def root_is_real(self) -> bool:
        if self.degree == 2:
            # only sqrt(m) contexts are constructed, m > 1
            return True
        disc = _cubic_discriminant(self.minpoly)
        n_real = 3 if disc > 0 else 1
        return self.root_index < n_real

    def conjugate_index(self) -> int:
        if self.root_is_real():
            return self.root_index
        target = self.root_value().conjugate()
        roots = self.roots()
        best = min(range(len(roots)), key=lambda k: abs(roots[k] - target))
        return best

    def reductions(self) -> list[tuple[_GQ, ...]]:
        """theta^k for k = degree .. 2*degree-2 as coefficient tuples."""
        key = self.minpoly
        got = _CTX_REDUCTIONS.get(key)
        if got is None:
            d = self.degree
            top = tuple(_gq(-c) for c in self.minpoly[:d])  # theta^d
            rows = [top]
            for _ in range(d - 2):
                prev = rows[-1]
                shifted = [_ZERO_GQ] + list(prev[: d - 1])
                spill = prev[d - 1]
                row = tuple(
                    _gq_add(shifted[j], _gq_mul(spill, top[j])) for j in range(d)
                )
                rows.append(row)
            got = rows
            _CTX_REDUCTIONS[key] = got
        return got


def _sqrt_context(m: int) -> AlgebraicContext:
    return AlgebraicContext((Fraction(-m), Fraction(0), Fraction(1)), 1)  # +sqrt(m)


class Scalar:
    """Immutable exact number c0 + c1*theta + c2*theta^2 with ck in Q(i)."""

    __slots__ = ("_c", "_ctx", "_h")

    def __init__(self, value: RationalLike = 0, imag: RationalLike = 0):
        object.__setattr__(self, "_c", (_gq(value, imag),))
        object.__setattr__(self, "_ctx", None)
        object.__setattr__(self, "_h", None)

    # -- construction ----------------------------------------------------
    @staticmethod
    def _make(coeffs: Sequence[_GQ], ctx: AlgebraicContext | None) -> "Scalar":
        if ctx is not None:
            coeffs = list(coeffs[: ctx.degree])
            while len(coeffs) < ctx.degree:
                coeffs.append(_ZERO_GQ)
            if all(_gq_is_zero(c) for c in coeffs[1:]):
                ctx = None
                coeffs = coeffs[:1]
        s = object.__new__(Scalar)
        object.__setattr__(s, "_c", tuple(coeffs))
        object.__setattr__(s, "_ctx", ctx)
        object.__setattr__(s, "_h", None)
        return s

    @staticmethod
    def of(value) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        return Scalar(_fr(value))

    @staticmethod
    def i(coeff: RationalLike = 1) -> "Scalar":
        return Scalar(0, coeff)

    @staticmethod
    def sqrt_rational(q) -> "Scalar":
        """Principal square root of a rational: exact, lands in Q(i)(sqrt m)."""
        q = _fr(q)
        if q == 0:
            return Scalar(0)
        num, den = abs(q.numerator), q.denominator
        s, m = squarefree_split(num * den)
        rat = Fraction(s, den)
        if q > 0:
            if m == 1:
                return Scalar(rat)
            return Scalar._make((_ZERO_GQ, _gq(rat)), _sqrt_context(m))
        if m == 1:
            return Scalar(0, rat)
        return Scalar._make((_ZERO_GQ, _gq(0, rat)), _sqrt_context(m))

    @staticmethod
    def algebraic(minpoly: Sequence[RationalLike], root_index: int) -> "Scalar":
        """theta itself, for a monic rational cubic with no rational root."""
        poly = tuple(_fr(c) for c in minpoly)
        if len(poly) != 4 or poly[3] != 1:
            raise ScalarError("algebraic() expects a monic cubic (4 ascending coeffs)")
        ctx = AlgebraicContext(poly, root_index)
        return Scalar._make((_ZERO_GQ, _ONE_GQ, _ZERO_GQ), ctx)

    # -- basic queries ----------------------------------------------------
    @property
    def context(self) -> AlgebraicContext | None:
        return self._ctx

    def is_zero(self) -> bool:
        return self._ctx is None and _gq_is_zero(self._c[0])

    def is_rational(self) -> bool:
        return self._ctx is None and self._c[0][1] == 0

    def is_gaussian_rational(self) -> bool:
        return self._ctx is None

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ScalarError(f"{self!r} is not rational")
        return self._c[0][0]

    def is_nonnegative_integer(self) -> bool:
        return (
            self.is_rational()
            and self._c[0][0].denominator == 1
            and self._c[0][0] >= 0
        )

    def is_real(self) -> bool:
        return self == self.conjugate()

    def to_complex(self) -> complex:
        if self._ctx is None:
            re, im = self._c[0]
            return complex(re, im)
        theta = self._ctx.root_value()
        acc = 0j
        for k, (re, im) in enumerate(self._c):
            acc += complex(re, im) * theta ** k
        return acc

    # -- arithmetic --------------------------------------------------------
    def _lift(self, ctx: AlgebraicContext | None) -> tuple:
        if ctx is None or self._ctx is ctx or self._ctx == ctx:
            return self._c
        if self._ctx is None:
            return (self._c[0],) + (_ZERO_GQ,) * (ctx.degree - 1)
        raise ScalarError("incompatible algebraic contexts")

    @staticmethod
    def _join(a: "Scalar", b: "Scalar") -> AlgebraicContext | None:
        if a._ctx is None:
            return b._ctx
        if b._ctx is None or a._ctx == b._ctx:
            return a._ctx
        raise ScalarError(
            "scalars live in different algebraic extensions; cannot combine"
        )

    def __add__(self, other):
        other = Scalar.of(other)
        ctx = Scalar._join(self, other)
        a, b = self._lift(ctx), other._lift(ctx)
        return Scalar._make([_gq_add(x, y) for x, y in zip(a, b)], ctx)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._make([_gq_neg(x) for x in self._c], self._ctx)

    def __sub__(self, other):
        return self + (-Scalar.of(other))

    def __rsub__(self, other):
        return Scalar.of(other) + (-self)

    def __mul__(self, other):
        other = Scalar.of(other)
        ctx = Scalar._join(self, other)
        if ctx is None:
            return Scalar._make((_gq_mul(self._c[0], other._c[0]),), None)
        a, b = self._lift(ctx), other._lift(ctx)
        d = ctx.degree
        conv = [_ZERO_GQ] * (2 * d - 1)
        for i, x in enumerate(a):
            if _gq_is_zero(x):
                continue
            for j, y in enumerate(b):
                if _gq_is_zero(y):
                    continue
                conv[i + j] = _gq_add(conv[i + j], _gq_mul(x, y))
        out = conv[:d]
        reds = ctx.reductions()
        for k in range(d, 2 * d - 1):
            if _gq_is_zero(conv[k]):
                continue
            red = reds[k - d]
            out = [_gq_add(out[j], _gq_mul(conv[k], red[j])) for j in range(d)]
        return Scalar._make(out, ctx)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("division by zero scalar")
        if self._ctx is None:
            return Scalar._make((_gq_inv(self._c[0]),), None)
        d = self._ctx.degree
        # columns: coefficients of theta^j * self, solve for u with u*self = 1
        cols = []
        basis = Scalar._make((_ONE_GQ,) + (_ZERO_GQ,) * (d - 1), self._ctx)
        theta = Scalar._make((_ZERO_GQ, _ONE_GQ) + (_ZERO_GQ,) * (d - 2), self._ctx)
        power = basis
        for _ in range(d):
            prod = power * self
            cols.append(list(prod._lift(self._ctx)))
            power = power * theta
        # solve sum_j u_j * cols[j] = e0 by Gaussian elimination over Q(i)
        n = d
        aug = [[cols[j][i] for j in range(n)] + [_ONE_GQ if i == 0 else _ZERO_GQ]
               for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not _gq_is_zero(aug[r][col])), None)
            if piv is None:
                raise ScalarError("inverse failed; minimal polynomial not irreducible?")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = _gq_inv(aug[col][col])
            aug[col] = [_gq_mul(v, inv) for v in aug[col]]
            for r in range(n):
                if r != col and not _gq_is_zero(aug[r][col]):
                    f = aug[r][col]
                    aug[r] = [_gq_sub(v, _gq_mul(f, w)) for v, w in zip(aug[r], aug[col])]
        u = [aug[i][n] for i in range(n)]
        return Scalar._make(u, self._ctx)

    def __truediv__(self, other):
        return self * Scalar.of(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.of(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise ScalarError("Scalar powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        out = Scalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "Scalar":
        coeffs = [_gq_conj(c) for c in self._c]
        if self._ctx is None:
            return Scalar._make(coeffs, None)
        if self._ctx.root_is_real():
            return Scalar._make(coeffs, self._ctx)
        new_ctx = AlgebraicContext(self._ctx.minpoly, self._ctx.conjugate_index())
        return Scalar._make(coeffs, new_ctx)

    def real_part(self) -> "Scalar":
        if self._ctx is not None and not self._ctx.root_is_real():
            raise ScalarError("real_part undefined inside a complex-root extension")
        return Scalar._make([(c[0], Fraction(0)) for c in self._c], self._ctx)

    def imag_part(self) -> "Scalar":
        if self._ctx is not None and not self._ctx.root_is_real():
            raise ScalarError("imag_part undefined inside a complex-root extension")
        return Scalar._make([(c[1], Fraction(0)) for c in self._c], self._ctx)

    # -- comparison / hashing ----------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self._c == other._c and self._ctx == other._ctx

    def __hash__(self):
        h = self._h
        if h is None:
            h = hash((self._c, self._ctx))
            object.__setattr__(self, "_h", h)
        return h

    def sort_key(self):
        if self._ctx is None:
            ctxkey: tuple = ()
        else:
            ctxkey = (self._ctx.minpoly, self._ctx.root_index)
        flat = tuple(x for c in self._c for x in c)
        return (len(ctxkey), ctxkey, len(flat), flat)

    def __repr__(self):
        if self._ctx is None:
            re, im = self._c[0]
            if im == 0:
                return str(re)
            if re == 0:
                return f"{im}*i"
            return f"({re}{'+' if im > 0 else '-'}{abs(im)}*i)"
        names = {2: "r", 3: "t"}
        sym = names[self._ctx.degree]
        bits = []
        for k, (re, im) in enumerate(self._c):
            if re == 0 and im == 0:
                continue
            part = f"({re}+{im}i)" if im else str(re)
            bits.append(part if k == 0 else f"{part}*{sym}^{k}" if k > 1 else f"{part}*{sym}")
        body = " + ".join(bits) or "0"
        return f"<{body} ; {sym}: {tuple(map(str, self._ctx.minpoly))} root {self._ctx.root_index}>"


ZERO = Scalar(0)
ONE = Scalar(1)


def rational_roots_of_monic(poly: Sequence[Fraction]) -> list[Fraction]:
    """Rational roots (with multiplicity) of a monic rational polynomial."""
    coeffs = [Fraction(c) for c in poly]
    roots: list[Fraction] = []
    while len(coeffs) > 1:
        if coeffs[0] == 0:
            roots.append(Fraction(0))
            coeffs = coeffs[1:]
            continue
        from math import lcm

        scale = lcm(*[c.denominator for c in coeffs]) if len(coeffs) > 1 else 1
        ints = [int(c * scale) for c in coeffs]
        # candidate p/q: p | ints[0], q | ints[-1]
        found = None
        lead, const = ints[-1], ints[0]

        def divisors(n):
            n = abs(n)
            out = []
            d = 1
            while d * d <= n:
                if n % d == 0:
                    out.extend([d, n // d])
                d += 1
            return sorted(set(out))

        for q in divisors(lead):
            for p in divisors(const):
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    acc = Fraction(0)
                    for c in reversed(coeffs):
                        acc = acc * cand + c
                    if acc == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        roots.append(found)
        # synthetic division by (x - found)
        deg = len(coeffs) - 1
        out = [Fraction(0)] * deg
        out[deg - 1] = coeffs[deg]
        for k in range(deg - 2, -1, -1):
            out[k] = coeffs[k + 1] + found * out[k + 1]
        coeffs = out
    return roots


def roots_of_monic(poly: Sequence) -> list[Scalar]:
    """Exact roots of a monic rational polynomial of degree 1..3, as Scalars.

    Rational roots come out rational; a leftover quadratic yields a conjugate
    pair in Q(i)(sqrt m); a rational-root-free cubic yields three Scalars in
    cubic contexts sharing one minimal polynomial.
    """
    coeffs = [_fr(c) for c in poly]
    if coeffs[-1] != 1:
        raise ScalarError("roots_of_monic expects a monic polynomial")
    deg = len(coeffs) - 1
    if deg == 1:
        return [Scalar(-coeffs[0])]
    rational = rational_roots_of_monic(coeffs)
    if deg == 2:
        if rational:
            b = coeffs[1]
            r0 = rational[0]
            return [Scalar(r0), Scalar(-b - r0)]
        b, c = coeffs[1], coeffs[0]
        disc = b * b - 4 * c
        root = Scalar.sqrt_rational(disc)
        half = Fraction(1, 2)
        return [(Scalar(-b) + root) * half, (Scalar(-b) - root) * half]
    if deg == 3:
        if rational:
            r0 = rational[0]
            # deflate
            b = coeffs[2] + r0
            c = coeffs[1] + r0 * b
            return [Scalar(r0)] + roots_of_monic([c, b, Fraction(1)])
        ctx_poly = tuple(coeffs)
        return [Scalar.algebraic(ctx_poly, k) for k in range(3)]
    raise ScalarError("roots_of_monic supports degree <= 3")
