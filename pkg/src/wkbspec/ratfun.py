"""Rational functions of one complex variable and truncated hbar-series.

The series coefficients are rational functions carrying an optional factor
``Q^(-1/2)`` (half_power 1) so that the odd/even terms of the WKB recursion
stay inside this class: odd-index terms are plain rational functions on the
base curve, even-index terms pick up one inverse square root of the
quadratic differential.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByZeroFunction, EvalAtPole, TruncationMismatch
from .scalars import CS_ONE, CS_ZERO, ComplexScalar

__all__ = ["Polynomial", "RationalFunction", "WkbTerm", "HbarSeries"]


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Dense polynomial, coefficients ascending by degree."""

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Sequence):
        cs = [c if isinstance(c, ComplexScalar) else ComplexScalar.of(c) for c in coeffs]
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        if not cs:
            cs = [CS_ZERO]
        self.coeffs = tuple(cs)
        self.exact = all(c.exact for c in cs)

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial([CS_ZERO])

    @staticmethod
    def one() -> "Polynomial":
        return Polynomial([CS_ONE])

    @staticmethod
    def x() -> "Polynomial":
        return Polynomial([CS_ZERO, CS_ONE])

    @staticmethod
    def from_roots(roots: Iterable) -> "Polynomial":
        p = Polynomial.one()
        for r in roots:
            r = ComplexScalar.of(r)
            p = p * Polynomial([-r, CS_ONE])
        return p

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0].is_zero()

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = []
        for i in range(n):
            x = a[i] if i < len(a) else CS_ZERO
            y = b[i] if i < len(b) else CS_ZERO
            out.append(x + y)
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ComplexScalar):
            return Polynomial([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return Polynomial.zero()
        a, b = self.coeffs, other.coeffs
        out = [CS_ZERO] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai.is_zero():
                continue
            for j, bj in enumerate(b):
                out[i + j] = out[i + j] + ai * bj
        return Polynomial(out)

    def scale(self, s) -> "Polynomial":
        s = ComplexScalar.of(s)
        return Polynomial([c * s for c in self.coeffs])

    def divmod(self, other: "Polynomial"):
        if other.is_zero():
            raise DivisionByZeroFunction("polynomial division by zero")
        q = [CS_ZERO] * max(1, self.degree - other.degree + 1)
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        while len(rem) - 1 >= d and not all(c.is_zero() for c in rem):
            k = len(rem) - 1 - d
            c = rem[-1] / lead
            q[k] = c
            for i in range(d + 1):
                rem[k + i] = rem[k + i] - c * other.coeffs[i]
            rem.pop()
            while len(rem) > 1 and rem[-1].is_zero():
                rem.pop()
            if len(rem) - 1 < d:
                break
        return Polynomial(q), Polynomial(rem)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        lead = self.coeffs[-1]
        return Polynomial([c / lead for c in self.coeffs])

    def derivative(self) -> "Polynomial":
        if self.degree <= 0:
            return Polynomial.zero()
        return Polynomial([self.coeffs[i] * ComplexScalar(i) for i in range(1, len(self.coeffs))])

    def eval(self, z: ComplexScalar) -> ComplexScalar:
        acc = CS_ZERO
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def eval_complex(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c.to_complex()
        return acc

    def numpy_coeffs(self) -> np.ndarray:
        # descending order, as np.polyval expects
        return np.array([c.to_complex() for c in reversed(self.coeffs)], dtype=complex)

    def __repr__(self):
        return "Poly[" + ", ".join(repr(c) for c in self.coeffs) + "]"


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over the Gaussian rationals (Euclidean remainders).

    Coefficients live in the field Q(i), so the plain remainder sequence is
    exact; Fractions keep intermediate growth in check for the degrees used
    here.  Only meaningful in exact mode.
    """
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    return a.monic() if not a.is_zero() else a


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """Quotient of two polynomials.

    Exact mode (all coefficients Gaussian rational): reduced to lowest terms
    with a monic denominator.  Floating mode: numerator and denominator kept
    exactly as constructed (no floating gcd).
    """

    __slots__ = ("num", "den", "exact")

    def __init__(self, num, den=None, reduce: bool = True):
        if not isinstance(num, Polynomial):
            num = Polynomial([num]) if not isinstance(num, (list, tuple)) else Polynomial(num)
        if den is None:
            den = Polynomial.one()
        elif not isinstance(den, Polynomial):
            den = Polynomial([den]) if not isinstance(den, (list, tuple)) else Polynomial(den)
        if den.is_zero():
            raise DivisionByZeroFunction("denominator is identically zero")
        self.exact = num.exact and den.exact
        if self.exact and reduce:
            if num.is_zero():
                den = Polynomial.one()
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num, _ = num.divmod(g)
                    den, _ = den.divmod(g)
                lead = den.coeffs[-1]
                num = Polynomial([c / lead for c in num.coeffs])
                den = Polynomial([c / lead for c in den.coeffs])
        self.num = num
        self.den = den

    # ---- constructors ----

    @staticmethod
    def zero() -> "RationalFunction":
        return RationalFunction(Polynomial.zero())

    @staticmethod
    def one() -> "RationalFunction":
        return RationalFunction(Polynomial.one())

    @staticmethod
    def x() -> "RationalFunction":
        return RationalFunction(Polynomial.x())

    @staticmethod
    def constant(c) -> "RationalFunction":
        return RationalFunction(Polynomial([ComplexScalar.of(c)]))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    # ---- arithmetic ----

    def __add__(self, other):
        o = other if isinstance(other, RationalFunction) else RationalFunction.constant(other)
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        o = other if isinstance(other, RationalFunction) else RationalFunction.constant(other)
        return self + (-o)

    def __rsub__(self, other):
        return RationalFunction.constant(other) - self

    def __mul__(self, other):
        if isinstance(other, ComplexScalar):
            return RationalFunction(self.num * other, self.den)
        o = other if isinstance(other, RationalFunction) else RationalFunction.constant(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = other if isinstance(other, RationalFunction) else RationalFunction.constant(other)
        if o.is_zero():
            raise DivisionByZeroFunction("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RationalFunction.constant(other) / self

    def derivative(self) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        return hash((self.num, self.den))

    # ---- evaluation ----

    def eval(self, z, pole_tol: float = 1e-12) -> ComplexScalar:
        z = ComplexScalar.of(z)
        dv = self.den.eval(z)
        if dv.is_zero():
            raise EvalAtPole(f"evaluation at a pole: z={z!r}")
        if not (z.exact and self.exact):
            scale = max(abs(c) for c in self.den.coeffs) * max(1.0, abs(z)) ** max(0, self.den.degree)
            if abs(dv) < pole_tol * max(scale, 1e-300):
                raise EvalAtPole(f"evaluation too close to a pole: z={z!r}")
        return self.num.eval(z) / dv

    def eval_complex(self, z: complex) -> complex:
        dv = self.den.eval_complex(z)
        if dv == 0:
            raise EvalAtPole(f"evaluation at a pole: z={z!r}")
        return self.num.eval_complex(z) / dv

    def compiled(self) -> "CompiledRational":
        return CompiledRational(self)

    def to_floating(self) -> "RationalFunction":
        num = Polynomial([c.to_floating() for c in self.num.coeffs])
        den = Polynomial([c.to_floating() for c in self.den.coeffs])
        return RationalFunction(num, den, reduce=False)

    def __repr__(self):
        return f"({self.num!r})/({self.den!r})"


class CompiledRational:
    """Numpy-backed evaluator for a rational function (vectorized)."""

    __slots__ = ("nc", "dc")

    def __init__(self, rf: RationalFunction):
        self.nc = rf.num.numpy_coeffs()
        self.dc = rf.den.numpy_coeffs()

    def __call__(self, z):
        return np.polyval(self.nc, z) / np.polyval(self.dc, z)


def rf_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Dispatch-style arithmetic entry point: op in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def rf_derivative(a: RationalFunction) -> RationalFunction:
    return a.derivative()


def rf_eval(a: RationalFunction, z) -> ComplexScalar:
    return a.eval(z)


# ---------------------------------------------------------------------------
# hbar series with Q^(-1/2) bookkeeping


class WkbTerm:
    """One series coefficient: rat * Q^(-half_power/2), half_power in {0, 1}.

    Index parity fixes the half power: odd-index terms (symmetric under the
    cover involution) are plain rational functions, even-index terms carry
    one factor Q^(-1/2).
    """

    __slots__ = ("rat", "half_power")

    def __init__(self, rat: RationalFunction, half_power: int):
        if half_power not in (0, 1):
            raise ValueError("half_power must be 0 or 1")
        self.rat = rat
        self.half_power = half_power

    @staticmethod
    def for_index(k: int, rat: RationalFunction) -> "WkbTerm":
        return WkbTerm(rat, 0 if k % 2 else 1)

    def is_zero(self) -> bool:
        return self.rat.is_zero()

    def __eq__(self, other):
        return (
            isinstance(other, WkbTerm)
            and self.half_power == other.half_power
            and self.rat == other.rat
        )

    def __repr__(self):
        suffix = "" if self.half_power == 0 else " * Q^(-1/2)"
        return f"WkbTerm({self.rat!r}{suffix})"

    def mul(self, other: "WkbTerm", q_scalar: RationalFunction) -> "WkbTerm":
        """Product; Q^(-1/2) * Q^(-1/2) folds into the rational part as 1/Q."""
        hp = self.half_power + other.half_power
        rat = self.rat * other.rat
        if hp == 2:
            return WkbTerm(rat / q_scalar, 0)
        return WkbTerm(rat, hp)

    def add(self, other: "WkbTerm") -> "WkbTerm":
        if self.half_power != other.half_power:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise ValueError("cannot add terms with different half powers")
        return WkbTerm(self.rat + other.rat, self.half_power)

    def scale(self, s) -> "WkbTerm":
        return WkbTerm(self.rat * ComplexScalar.of(s), self.half_power)


class HbarSeries:
    """Truncated series sum_{k=min_order}^{K} hbar^k * term_k."""

    __slots__ = ("q_scalar", "min_order", "terms", "truncation")

    def __init__(self, q_scalar: RationalFunction, min_order: int, terms: Sequence[WkbTerm], truncation: int):
        if min_order < -1:
            raise ValueError("min_order must be >= -1")
        if len(terms) != truncation - min_order + 1:
            raise ValueError("term count must equal truncation - min_order + 1")
        self.q_scalar = q_scalar
        self.min_order = min_order
        self.terms = list(terms)
        self.truncation = truncation

    @staticmethod
    def zero_term(k: int) -> WkbTerm:
        return WkbTerm.for_index(k, RationalFunction.zero())

    @staticmethod
    def unit(q_scalar: RationalFunction, truncation: int) -> "HbarSeries":
        """Multiplicative unit: constant 1 at order 0, no Q factor."""
        terms = [WkbTerm.for_index(k, RationalFunction.zero()) for k in range(0, truncation + 1)]
        terms[0] = WkbTerm(RationalFunction.one(), 0)
        return HbarSeries(q_scalar, 0, terms, truncation)

    def term(self, k: int) -> WkbTerm:
        if k < self.min_order or k > self.truncation:
            raise IndexError(f"order {k} outside [{self.min_order}, {self.truncation}]")
        return self.terms[k - self.min_order]

    def orders(self):
        return range(self.min_order, self.truncation + 1)

    def mul(self, other: "HbarSeries") -> "HbarSeries":
        """Cauchy product truncated at min of the two truncation orders."""
        if self.q_scalar != other.q_scalar:
            raise TruncationMismatch("series defined over different quadratic differentials")
        K = min(self.truncation, other.truncation)
        mo = self.min_order + other.min_order
        out: list[WkbTerm | None] = [None] * (K - mo + 1)
        for j in self.orders():
            tj = self.term(j)
            if tj.is_zero():
                continue
            for l in other.orders():
                k = j + l
                if k > K:
                    break
                tl = other.term(l)
                if tl.is_zero():
                    continue
                prod = tj.mul(tl, self.q_scalar)
                cur = out[k - mo]
                out[k - mo] = prod if cur is None else cur.add(prod)
        terms = []
        for i, t in enumerate(out):
            k = mo + i
            if t is None:
                t = WkbTerm(RationalFunction.zero(), 0 if k % 2 else 1)
            terms.append(t)
        return HbarSeries(self.q_scalar, mo, terms, K)

    def add(self, other: "HbarSeries") -> "HbarSeries":
        if self.q_scalar != other.q_scalar:
            raise TruncationMismatch("series defined over different quadratic differentials")
        K = min(self.truncation, other.truncation)
        mo = min(self.min_order, other.min_order)
        terms = []
        for k in range(mo, K + 1):
            have = []
            if self.min_order <= k <= self.truncation:
                have.append(self.term(k))
            if other.min_order <= k <= other.truncation:
                have.append(other.term(k))
            if not have:
                terms.append(WkbTerm(RationalFunction.zero(), 0 if k % 2 else 1))
            elif len(have) == 1:
                terms.append(have[0])
            else:
                terms.append(have[0].add(have[1]))
        return HbarSeries(self.q_scalar, mo, terms, K)

    def scale(self, s) -> "HbarSeries":
        return HbarSeries(self.q_scalar, self.min_order, [t.scale(s) for t in self.terms], self.truncation)


def series_mul(a: HbarSeries, b: HbarSeries) -> HbarSeries:
    return a.mul(b)
