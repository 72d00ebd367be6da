"""Projective 2x2 matrices over ComplexScalar.

Equality is projective: M and lambda*M represent the same element.  The
normal form divides by a square root of the determinant and fixes the sign
of the first nonzero entry (real part, ties broken by imaginary part), which
gives a deterministic representative for hashing and comparison.
"""

from __future__ import annotations

import cmath

from .scalars import ComplexScalar

__all__ = ["Psl2Matrix"]


class Psl2Matrix:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a = ComplexScalar.of(a)
        self.b = ComplexScalar.of(b)
        self.c = ComplexScalar.of(c)
        self.d = ComplexScalar.of(d)

    @staticmethod
    def identity() -> "Psl2Matrix":
        return Psl2Matrix(1, 0, 0, 1)

    @staticmethod
    def from_complex(m) -> "Psl2Matrix":
        return Psl2Matrix(m[0][0], m[0][1], m[1][0], m[1][1])

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_complex(self):
        return [[self.a.to_complex(), self.b.to_complex()], [self.c.to_complex(), self.d.to_complex()]]

    def det(self) -> ComplexScalar:
        return self.a * self.d - self.b * self.c

    def trace(self) -> ComplexScalar:
        return self.a + self.d

    def __mul__(self, o: "Psl2Matrix") -> "Psl2Matrix":
        return Psl2Matrix(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __neg__(self) -> "Psl2Matrix":
        return Psl2Matrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "Psl2Matrix":
        det = self.det()
        return Psl2Matrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def scaled(self, s) -> "Psl2Matrix":
        s = ComplexScalar.of(s)
        return Psl2Matrix(self.a * s, self.b * s, self.c * s, self.d * s)

    # ---- projective normal form ----

    def normalized(self) -> "Psl2Matrix":
        """Determinant-one representative with a fixed overall sign."""
        det = self.det()
        if det.is_zero():
            raise ValueError("singular matrix has no PSL(2) normal form")
        if det.exact and det.im == 0 and det.re > 0:
            from fractions import Fraction
            import math

            num, den = det.re.numerator, det.re.denominator
            rn, rd = math.isqrt(num), math.isqrt(den)
            if rn * rn == num and rd * rd == den:
                root = ComplexScalar(Fraction(rn, rd))
            else:
                root = ComplexScalar.of(cmath.sqrt(det.to_complex()))
        else:
            root = ComplexScalar.of(cmath.sqrt(det.to_complex()))
        m = Psl2Matrix(self.a / root, self.b / root, self.c / root, self.d / root)
        norm = max(abs(e) for e in m.entries())
        exact = all(e.exact for e in m.entries())
        cutoff = 0.0 if exact else 1e-12 * norm
        for e in m.entries():
            if abs(e) > cutoff:
                re, im = float(e.re), float(e.im)
                if re < 0 or (re == 0 and im < 0):
                    m = -m
                break
        return m

    def proj_eq(self, other: "Psl2Matrix", tol: float = 0.0) -> bool:
        """Projective equality, exact by default or within `tol` if given."""
        m, o = self.normalized(), other.normalized()
        def close(x, y):
            if tol == 0.0:
                return (x - y).is_zero()
            return abs((x - y).to_complex()) <= tol
        direct = all(close(x, y) for x, y in zip(m.entries(), o.entries()))
        flipped = all(close(x, -y) for x, y in zip(m.entries(), o.entries()))
        return direct or flipped

    def is_proj_identity(self, tol: float = 0.0) -> bool:
        return self.proj_eq(Psl2Matrix.identity(), tol)

    def __eq__(self, other):
        if not isinstance(other, Psl2Matrix):
            return NotImplemented
        return self.proj_eq(other)

    def __hash__(self):
        m = self.normalized()
        return hash(tuple((e.re, e.im) for e in m.entries()))

    def __repr__(self):
        return f"Psl2[[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]]"
