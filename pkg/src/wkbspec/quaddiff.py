"""Genus-0 meromorphic quadratic differentials with double poles.

Q(z) = P(z) / prod_j (z - z_j)^2 * (dz)^2 with deg P = 2n-4 exactly, so that
infinity is a regular non-critical point.  The biresidue at z_j is r_j^2 with
Re r_j < 0; the residue of v = sqrt(Q) on the first sheet of the canonical
cover is r_j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BadResidueSign,
    BiresidueOnNegativeAxis,
    ConfigError,
    DegeneratePoles,
    NonSimpleZeros,
    RootFindingFailure,
)
from .ratfun import Polynomial, RationalFunction, WkbTerm
from .scalars import CS_ONE, CS_ZERO, ComplexScalar

__all__ = ["QuadDiff", "ModuliPoint", "build_quad_diff", "find_zeros", "schwarzian_v", "potential_u", "wkb_v1"]


@dataclass(frozen=True)
class ModuliPoint:
    """Leaf coordinates: free pole positions z_4..z_n and numerator parameters.

    The first three poles are Moebius-fixed; the biresidues are Casimirs of
    the leaf and stay pinned.  2(n-3) complex parameters total.
    """

    fixed_poles: tuple
    free_poles: tuple
    residues: tuple
    free_params: tuple

    @property
    def poles(self):
        return tuple(self.fixed_poles) + tuple(self.free_poles)

    def shifted(self, dpoles: Sequence[complex], dparams: Sequence[complex]) -> "ModuliPoint":
        fp = tuple(
            ComplexScalar.of(p.to_complex() + complex(d))
            for p, d in zip(self.free_poles, dpoles)
        )
        cp = tuple(
            ComplexScalar.of(c.to_complex() + complex(d))
            for c, d in zip(self.free_params, dparams)
        )
        return ModuliPoint(self.fixed_poles, fp, self.residues, cp)

    def build(self) -> "QuadDiff":
        return build_quad_diff(self.poles, self.residues, self.free_params)


class QuadDiff:
    """Validated quadratic differential plus cached derived data."""

    def __init__(self, poles, residues, numerator: Polynomial, free_params=()):
        self.pole_positions = tuple(poles)
        self.residues = tuple(residues)
        self.numerator = numerator
        self.free_params = tuple(free_params)
        self.n = len(poles)
        d1 = Polynomial.from_roots(self.pole_positions)
        self._den1 = d1
        self.q_scalar = RationalFunction(numerator, d1 * d1)
        self.exact = self.q_scalar.exact and all(
            p.exact and r.exact for p, r in zip(self.pole_positions, self.residues)
        )
        self._zeros = None
        self._schwarzian = None
        self._np_num = numerator.numpy_coeffs()
        self._np_den = (d1 * d1).numpy_coeffs()
        self._riccati_cache = {}

    # ---- basic data ----

    @property
    def zeros(self):
        if self._zeros is None:
            self._zeros = find_zeros(self)
        return self._zeros

    def pole_complex(self):
        return [p.to_complex() for p in self.pole_positions]

    def residue_complex(self):
        return [r.to_complex() for r in self.residues]

    def singular_points(self):
        return [z for z in self.zeros] + self.pole_complex()

    def moduli_point(self) -> ModuliPoint:
        return ModuliPoint(
            tuple(self.pole_positions[:3]),
            tuple(self.pole_positions[3:]),
            tuple(self.residues),
            tuple(self.free_params),
        )

    # ---- numeric evaluation ----

    def q_at(self, z: complex) -> complex:
        return np.polyval(self._np_num, z) / np.polyval(self._np_den, z)

    def sqrt_q_near(self, z: complex, ref: complex) -> complex:
        """Square root of the scalar part, branch chosen by continuity to ref."""
        w = np.sqrt(self.q_at(z))
        return w if abs(w - ref) <= abs(w + ref) else -w

    def scalar_evaluators(self):
        """Fast scalar closures (q, q') using plain-Python Horner loops."""
        pc = [c.to_complex() for c in reversed(self.numerator.coeffs)]
        ppc = [c.to_complex() for c in reversed(self.numerator.derivative().coeffs)]
        dc = [c.to_complex() for c in reversed(self._den1.coeffs)]
        dpc = [c.to_complex() for c in reversed(self._den1.derivative().coeffs)]

        def horner(cs, z):
            acc = 0j
            for c in cs:
                acc = acc * z + c
            return acc

        def q(z):
            d = horner(dc, z)
            return horner(pc, z) / (d * d)

        def qprime(z):
            d = horner(dc, z)
            return (horner(ppc, z) * d - 2.0 * horner(pc, z) * horner(dpc, z)) / (d * d * d)

        return q, qprime

    # ---- derived analytic objects ----

    def schwarzian(self) -> RationalFunction:
        if self._schwarzian is None:
            self._schwarzian = schwarzian_v(self)
        return self._schwarzian

    def potential(self) -> RationalFunction:
        return potential_u(self)

    def v1_term(self) -> WkbTerm:
        return wkb_v1(self)


def _interpolant(poles, values) -> Polynomial:
    """Lagrange interpolant of degree <= n-1 through (z_j, values_j), exact."""
    total = Polynomial.zero()
    n = len(poles)
    for j in range(n):
        basis = Polynomial.one()
        denom = CS_ONE
        for k in range(n):
            if k == j:
                continue
            basis = basis * Polynomial([-poles[k], CS_ONE])
            denom = denom * (poles[j] - poles[k])
        total = total + basis.scale(values[j] / denom)
    return total


def build_quad_diff(poles, residues, free_params=()) -> QuadDiff:
    """Construct and validate a QuadDiff from pole data and free parameters.

    The numerator is P = A + M*C where A interpolates the biresidue
    constraints P(z_j) = r_j^2 prod_{k!=j}(z_j - z_k)^2, M = prod(z - z_j)
    and C is the free polynomial of degree n-4 (empty for n = 3).
    """
    poles = [ComplexScalar.of(p) for p in poles]
    residues = [ComplexScalar.of(r) for r in residues]
    n = len(poles)
    if n < 3:
        raise ConfigError(f"need at least 3 double poles, got {n}")
    if len(residues) != n:
        raise ConfigError("one residue per pole required")
    free_params = [ComplexScalar.of(c) for c in free_params]
    if len(free_params) != max(0, n - 3):
        raise ConfigError(f"expected {max(0, n-3)} free numerator parameters, got {len(free_params)}")

    # distinct finite poles
    for i in range(n):
        for j in range(i + 1, n):
            d = poles[i] - poles[j]
            if d.is_zero() or abs(d) < 1e-12:
                raise DegeneratePoles(f"poles {i} and {j} coincide")

    for j, r in enumerate(residues):
        if not (float(r.re) < 0):
            raise BadResidueSign(f"residue r_{j} must satisfy Re r < 0, got {r!r}")
        r2 = r * r
        if float(r2.im) == 0.0 and float(r2.re) <= 0.0:
            raise BiresidueOnNegativeAxis(f"biresidue r_{j}^2 lies on the closed negative real axis")

    values = []
    for j in range(n):
        prod = CS_ONE
        for k in range(n):
            if k != j:
                d = poles[j] - poles[k]
                prod = prod * d * d
        values.append(residues[j] * residues[j] * prod)
    A = _interpolant(poles, values)
    M = Polynomial.from_roots(poles)
    if n == 3:
        P = A
    else:
        C = Polynomial(free_params)
        P = A + M * C

    if P.degree != 2 * n - 4:
        raise ConfigError(
            f"numerator degree {P.degree} != {2*n-4}; infinity would not be a regular point "
            "(check the leading free parameter)"
        )

    qd = QuadDiff(poles, residues, P, free_params)

    # biresidue round trip
    for j in range(n):
        lhs = P.eval(poles[j])
        if qd.exact:
            if not (lhs - values[j]).is_zero():
                raise ConfigError("biresidue constraint violated in exact arithmetic")
        else:
            scale = max(abs(values[j]), 1.0)
            if abs((lhs - values[j]).to_complex()) > 1e-12 * scale:
                raise ConfigError("biresidue constraint violated beyond 1e-12")

    zeros = qd.zeros  # validates simplicity, raises NonSimpleZeros
    pole_pts = qd.pole_complex()
    scale = max(abs(a - b) for a in pole_pts for b in pole_pts if a != b)
    for x in zeros:
        if min(abs(x - p) for p in pole_pts) < 1e-8 * scale:
            raise NonSimpleZeros(f"zero {x} collides with a pole")
    return qd


def find_zeros(qd: QuadDiff):
    """Roots of the numerator: companion-matrix eigenvalues plus Newton polish."""
    coeffs = qd.numerator.numpy_coeffs()
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    roots = np.roots(coeffs)
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        vals = np.polyval(coeffs, roots)
        dvals = np.polyval(dcoeffs, roots)
        step = np.where(np.abs(dvals) > 0, vals / np.where(dvals == 0, 1, dvals), 0)
        roots = roots - step
    scale = float(np.max(np.abs(coeffs)))
    resid = np.abs(np.polyval(coeffs, roots))
    sep_scale = max(1.0, float(np.max(np.abs(roots))))
    if np.any(resid > 1e-10 * scale * max(1.0, sep_scale) ** deg):
        raise RootFindingFailure("root residual too large")
    for i in range(deg):
        for j in range(i + 1, deg):
            if abs(roots[i] - roots[j]) < 1e-8 * sep_scale:
                raise NonSimpleZeros(f"zeros {roots[i]} and {roots[j]} are not simple")
    out = sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))
    return out


def schwarzian_v(qd_or_rf) -> RationalFunction:
    """Schwarzian of the flat coordinate z(x) = int sqrt(Q): Q''/2Q - 5/8 (Q'/Q)^2."""
    q = qd_or_rf.q_scalar if isinstance(qd_or_rf, QuadDiff) else qd_or_rf
    qp = q.derivative()
    qpp = qp.derivative()
    ratio = qp / q
    return qpp / (q * ComplexScalar(2)) - ratio * ratio * ComplexScalar.of("5/8")


def potential_u(qd: QuadDiff) -> RationalFunction:
    """Potential of the first-order system: u = S_v/(2Q) + 1 on the sphere.

    The Bergman projective connection vanishes identically in the standard
    chart at genus 0, so only the Schwarzian term survives.
    """
    sv = qd.schwarzian()
    return sv / (qd.q_scalar * ComplexScalar(2)) + RationalFunction.one()


def wkb_potential_q(qd) -> RationalFunction:
    """The scalar q in the flat-coordinate equation: q = -S_v/(2Q) at genus 0.

    Accepts a QuadDiff or a bare RationalFunction scalar part (handy for the
    Airy model and other formal inputs).
    """
    if isinstance(qd, QuadDiff):
        sv, q = qd.schwarzian(), qd.q_scalar
    else:
        q = qd.q_scalar if hasattr(qd, "q_scalar") else qd
        sv = schwarzian_v(q)
    return -sv / (q * ComplexScalar(2))


def wkb_v1(qd) -> WkbTerm:
    """First odd WKB coefficient s_1 = -q/2 (a plain rational function)."""
    q = wkb_potential_q(qd)
    return WkbTerm(q * ComplexScalar.of("-1/2"), 0)
