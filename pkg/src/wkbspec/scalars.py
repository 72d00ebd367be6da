"""Complex scalars with sticky exactness.

A scalar is either exact (a pair of ``Fraction`` real/imaginary parts, i.e. a
Gaussian rational) or floating (backed by a Python ``complex``).  Any
operation touching a floating operand yields a floating result; exact
operands stay exact through +, -, *, /.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["ComplexScalar", "CS_ZERO", "CS_ONE"]

_EXACT_TYPES = (int, Fraction)


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class ComplexScalar:
    """Immutable complex number, exact when possible."""

    __slots__ = ("re", "im", "exact")

    def __init__(self, re, im=0, exact=None):
        if exact is None:
            exact = isinstance(re, (Rational, int)) and isinstance(im, (Rational, int))
        if exact:
            object.__setattr__(self, "re", _as_fraction(re))
            object.__setattr__(self, "im", _as_fraction(im))
        else:
            object.__setattr__(self, "re", float(re))
            object.__setattr__(self, "im", float(im))
        object.__setattr__(self, "exact", bool(exact))

    def __setattr__(self, *a):
        raise AttributeError("ComplexScalar is immutable")

    # ---- constructors ----

    @staticmethod
    def of(value) -> "ComplexScalar":
        """Promote ints, Fractions, floats, complex, 2-seqs or 'p/q' strings."""
        if isinstance(value, ComplexScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return ComplexScalar(value, 0)
        if isinstance(value, float):
            return ComplexScalar(value, 0.0, exact=False)
        if isinstance(value, complex):
            return ComplexScalar(value.real, value.imag, exact=False)
        if isinstance(value, str):
            return ComplexScalar(Fraction(value), 0)
        if isinstance(value, (tuple, list)) and len(value) == 2:
            re = ComplexScalar.of(value[0])
            im = ComplexScalar.of(value[1])
            if re.exact and im.exact:
                return ComplexScalar(re.re, im.re)
            return ComplexScalar(float(re.re), float(im.re), exact=False)
        raise TypeError(f"cannot promote {value!r} to ComplexScalar")

    # ---- predicates ----

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    # ---- conversions ----

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def to_float(self) -> float:
        if self.im != 0:
            raise ValueError("nonzero imaginary part")
        return float(self.re)

    def to_floating(self) -> "ComplexScalar":
        return self if not self.exact else ComplexScalar(float(self.re), float(self.im), exact=False)

    # ---- arithmetic ----

    def __add__(self, other):
        o = other if isinstance(other, ComplexScalar) else ComplexScalar.of(other)
        if self.exact and o.exact:
            return ComplexScalar(self.re + o.re, self.im + o.im)
        return ComplexScalar(float(self.re) + float(o.re), float(self.im) + float(o.im), exact=False)

    __radd__ = __add__

    def __neg__(self):
        return ComplexScalar(-self.re, -self.im, exact=self.exact)

    def __sub__(self, other):
        o = other if isinstance(other, ComplexScalar) else ComplexScalar.of(other)
        return self + (-o)

    def __rsub__(self, other):
        return ComplexScalar.of(other) - self

    def __mul__(self, other):
        o = other if isinstance(other, ComplexScalar) else ComplexScalar.of(other)
        a, b, c, d = self.re, self.im, o.re, o.im
        if self.exact and o.exact:
            return ComplexScalar(a * c - b * d, a * d + b * c)
        return ComplexScalar(
            float(a) * float(c) - float(b) * float(d),
            float(a) * float(d) + float(b) * float(c),
            exact=False,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = other if isinstance(other, ComplexScalar) else ComplexScalar.of(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero ComplexScalar")
        a, b, c, d = self.re, self.im, o.re, o.im
        if self.exact and o.exact:
            n = c * c + d * d
            return ComplexScalar((a * c + b * d) / n, (b * c - a * d) / n)
        z = self.to_complex() / o.to_complex()
        return ComplexScalar(z.real, z.imag, exact=False)

    def __rtruediv__(self, other):
        return ComplexScalar.of(other) / self

    def conj(self) -> "ComplexScalar":
        return ComplexScalar(self.re, -self.im, exact=self.exact)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return abs(self.to_complex())

    # ---- comparison / hashing ----

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexScalar):
            try:
                other = ComplexScalar.of(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        tag = "" if self.exact else "~"
        return f"{tag}({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}j)"

    # ---- serialization (CLI convention: [re, im], rationals as 'p/q') ----

    def to_json(self):
        def part(x):
            if isinstance(x, Fraction):
                return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
            return x

        return [part(self.re), part(self.im)]


CS_ZERO = ComplexScalar(0, 0)
CS_ONE = ComplexScalar(1, 0)
