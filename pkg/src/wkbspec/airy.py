"""The Airy turning-point model.

Covers the local ingredients used around every simple zero: the integer
sequence d_k driving the WKB coefficients, the Stokes matrices L, U, J with
LUJU = 1, the matrix A = -LJ with A^3 = 1 in PSL(2), and the three
equivalent graph presentations of the local Riemann-Hilbert problem
(classical four-ray, symmetric six-ray, critical three-ray).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidStage
from .psl2 import Psl2Matrix

__all__ = [
    "airy_numbers",
    "airy_numbers_convolution",
    "airy_wkb_coefficients",
    "stokes_matrices",
    "RhpGraph",
    "airy_rhp_graph",
    "rhp_transform",
    "airy_scalar_series",
    "airy_riccati_residual_orders",
]


def airy_numbers(n: int) -> list[int]:
    """d_0..d_n via d_{k+1} = (6k+4) d_k + sum_j d_j d_{k-j}, exact integers."""
    if n < 0:
        raise ValueError("n must be >= 0")
    d = [1]
    for k in range(n):
        d.append((6 * k + 4) * d[k] + sum(d[j] * d[k - j] for j in range(k + 1)))
    return d


def airy_numbers_convolution(n: int) -> list[int]:
    """Independent route to d_k: run the scalar WKB recursion symbolically.

    The Airy series sigma_k = c_k x^(-(3k+2)/2) satisfies
    sigma_{k+1} = -(sigma_k' + sum_{j+l=k, j,l>=0} sigma_j sigma_l)/(2 sqrt x)
    so the rational prefactors c_k obey a pure convolution recurrence;
    d_k is recovered as -c_k * 2^(3k+2).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    # exponent of sigma_k is e_k = -(3k+2)/2; derivative multiplies by e_k
    c = [Fraction(-1, 4)]  # c_0, exponent -1
    out = [1]
    for k in range(n):
        ek = Fraction(-(3 * k + 2), 2)
        conv = sum(c[j] * c[k - j] for j in range(k + 1))
        ck1 = -(c[k] * ek + conv) / 2
        c.append(ck1)
        dk1 = -ck1 * 2 ** (3 * (k + 1) + 2)
        if dk1.denominator != 1:
            raise AssertionError("convolution route produced a non-integer")
        out.append(int(dk1))
    return out


def airy_wkb_coefficients(n: int) -> list[tuple[Fraction, Fraction]]:
    """Exponent/coefficient pairs of s_k relative to sqrt(x) dx.

    The WKB integrand is s(x) sqrt(x) dx with s = sum hbar^k s_k and

        s_-1 = 1,  s_0 = -x^(-3/2)/4,  s_k = -d_k 2^(-3k-2) x^(-3(k+1)/2).

    Entry i of the returned list corresponds to k = i - 1.
    """
    d = airy_numbers(max(n, 0))
    out = [(Fraction(0), Fraction(1))]
    if n >= 0:
        out.append((Fraction(-3, 2), Fraction(-1, 4)))
    for k in range(1, n + 1):
        out.append((Fraction(-3 * (k + 1), 2), Fraction(-d[k], 2 ** (3 * k + 2))))
    return out


def stokes_matrices():
    """The Stokes matrices L, U, J and A = -LJ of the Airy model."""
    L = Psl2Matrix(1, 0, -1, 1)
    U = Psl2Matrix(1, 1, 0, 1)
    J = Psl2Matrix(0, -1, 1, 0)
    A = (-(L * J))
    return L, U, J, A


# ---------------------------------------------------------------------------
# graph presentations of the local Riemann-Hilbert problem


@dataclass(frozen=True)
class RhpRay:
    angle_deg: int
    jump: Psl2Matrix
    kind: str  # 'stokes' for solid rays, 'cut' for branch cuts


@dataclass(frozen=True)
class RhpGraph:
    """Rays around the turning point with attached jump matrices.

    Rays are ordered counterclockwise; the boundary word is the product of
    jumps taken counterclockwise starting just above angle 0.
    """

    stage: str
    rays: tuple[RhpRay, ...] = field(default_factory=tuple)

    def boundary_product(self) -> Psl2Matrix:
        m = Psl2Matrix.identity()
        for ray in sorted(self.rays, key=lambda r: r.angle_deg):
            m = ray.jump * m
        return m


def airy_rhp_graph() -> RhpGraph:
    """Stage 'four_ray': the classical contour configuration."""
    L, U, J, _ = stokes_matrices()
    rays = (
        RhpRay(0, L, "stokes"),
        RhpRay(120, U, "stokes"),
        RhpRay(180, J, "cut"),
        RhpRay(240, U, "stokes"),
    )
    return RhpGraph("four_ray", rays)


def rhp_transform(graph: RhpGraph, stage: str) -> RhpGraph:
    """Move to the next presentation by multiplying sectors by +-J.

    four_ray -> six_ray: add cuts at +-60 degrees; the sector between them
    (through 180) is multiplied by J, conjugating the U jumps into L.
    six_ray -> critical: rotate all three cuts onto the critical rays, which
    merges each (L, cut) pair into a single jump projectively equal to A.
    """
    L, U, J, A = stokes_matrices()
    if stage == "six_ray":
        if graph.stage != "four_ray":
            raise InvalidStage("six_ray must be built from four_ray")
        rays = (
            RhpRay(0, L, "stokes"),
            RhpRay(60, J, "cut"),
            RhpRay(120, L, "stokes"),
            RhpRay(180, J, "cut"),
            RhpRay(240, L, "stokes"),
            RhpRay(300, -J, "cut"),
        )
        return RhpGraph("six_ray", rays)
    if stage == "critical":
        if graph.stage != "six_ray":
            raise InvalidStage("critical must be built from six_ray")
        rays = (
            RhpRay(0, A, "stokes"),
            RhpRay(120, -A, "stokes"),
            RhpRay(240, -A, "stokes"),
        )
        return RhpGraph("critical", rays)
    raise InvalidStage(f"unknown stage {stage!r}")


# ---------------------------------------------------------------------------
# symbolic residual of the scalar Airy Riccati equation


def airy_scalar_series(truncation: int) -> dict[int, dict[Fraction, Fraction]]:
    """sigma_k as {exponent: coefficient} maps, sigma = s * sqrt(x).

    These solve sigma' + sigma^2 = x / hbar^2 order by order.
    """
    sig: dict[int, dict[Fraction, Fraction]] = {-1: {Fraction(1, 2): Fraction(1)}}
    sig[0] = {Fraction(-1): Fraction(-1, 4)}
    for m in range(0, truncation):
        acc: dict[Fraction, Fraction] = {}
        for e, c in sig[m].items():
            if c:
                acc[e - 1] = acc.get(e - 1, Fraction(0)) + c * e
        for j in range(0, m + 1):
            l = m - j
            for e1, c1 in sig[j].items():
                for e2, c2 in sig[l].items():
                    acc[e1 + e2] = acc.get(e1 + e2, Fraction(0)) + c1 * c2
        nxt: dict[Fraction, Fraction] = {}
        for e, c in acc.items():
            if c:
                nxt[e - Fraction(1, 2)] = -c / 2
        sig[m + 1] = nxt
    return sig


def airy_riccati_residual_orders(truncation: int) -> list[int]:
    """Orders with nonvanishing residual after substituting the truncated series.

    Returns the list of hbar-orders m in [-2, truncation - 1] at which
    sigma' + sigma^2 - x/hbar^2 fails to cancel symbolically (it must be
    empty: every fully determined order cancels exactly, monomial by
    monomial in half-integer powers of x).
    """
    sig = airy_scalar_series(truncation)
    bad = []
    for m in range(-2, truncation):
        acc: dict[Fraction, Fraction] = {}
        if m in sig:
            for e, c in sig[m].items():
                if c:
                    acc[e - 1] = acc.get(e - 1, Fraction(0)) + c * e
        for j in range(-1, m + 2):
            l = m - j
            if j in sig and l in sig:
                for e1, c1 in sig[j].items():
                    for e2, c2 in sig[l].items():
                        acc[e1 + e2] = acc.get(e1 + e2, Fraction(0)) + c1 * c2
        if m == -2:
            acc[Fraction(1)] = acc.get(Fraction(1), Fraction(0)) - 1
        if any(c != 0 for c in acc.values()):
            bad.append(m)
    return bad
