"""The anti-invariant homology lattice of the double cover.

Generated by one cycle per edge of the triangulation (the loop around the
dual branch cut), with the skew intersection pairing read off the faces:
inside each face the cyclic successor pairs to -1 and the predecessor to +1.
Face cycles around each pole are half-integer combinations spanning the
kernel; a symplectic (a, b) family with a o b = 1/2 comes from exact greedy
reduction.  All arithmetic is over Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateFormUnexpectedRank

__all__ = [
    "Cycle",
    "intersection_matrix",
    "face_cycles",
    "SymplecticBasis",
    "symplectic_basis",
    "goldman_structures",
    "cycle_pairing",
]


class Cycle:
    """Half-integer combination of edge cycles, stored sparsely."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        cs = {}
        for k, v in (coeffs or {}).items():
            v = Fraction(v)
            if v != 0:
                cs[int(k)] = v
        self.coeffs = cs

    @staticmethod
    def edge(e: int) -> "Cycle":
        return Cycle({e: 1})

    def __add__(self, other: "Cycle") -> "Cycle":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Cycle(out)

    def __sub__(self, other: "Cycle") -> "Cycle":
        return self + other.scale(-1)

    def scale(self, s) -> "Cycle":
        s = Fraction(s)
        return Cycle({k: v * s for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, Cycle) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def vector(self, n_edges: int):
        return [self.coeffs.get(e, Fraction(0)) for e in range(n_edges)]

    def half_integer(self) -> bool:
        return all((2 * v).denominator == 1 for v in self.coeffs.values())

    def __repr__(self):
        inner = " + ".join(f"{v}*l{k}" for k, v in sorted(self.coeffs.items()))
        return f"Cycle({inner or '0'})"


def intersection_matrix(sc):
    """Skew pairing of the edge cycles as an exact Fraction matrix.

    Within each face with ccw edges (e0, e1, e2) the cyclic successor pairs
    to -1: so an edge pairs with the four edges of its two adjacent faces,
    and shared-face contributions cancel when two edges bound both faces.
    """
    E = len(sc.edges)
    F = [[Fraction(0)] * E for _ in range(E)]
    for tri in sc.triangles:
        e0, e1, e2 = tri.edges_ccw
        for a, b in ((e0, e1), (e1, e2), (e2, e0)):
            F[a][b] -= 1
            F[b][a] += 1
    return F


def face_cycles(sc):
    """t_k = (1/2) sum of edge cycles over the edges meeting pole k."""
    out = []
    for j in range(len(sc.poles)):
        c = Cycle()
        for eid in sc.pole_edge_ccw[j]:
            c = c + Cycle.edge(eid)
        out.append(c.scale(Fraction(1, 2)))
    return out


def cycle_pairing(F, a: Cycle, b: Cycle) -> Fraction:
    s = Fraction(0)
    for i, vi in a.coeffs.items():
        row = F[i]
        for j, vj in b.coeffs.items():
            s += vi * row[j] * vj
    return s


@dataclass
class SymplecticBasis:
    a: list
    b: list
    t: list

    @property
    def g_minus(self):
        return len(self.a)


def symplectic_basis(F, t_list) -> SymplecticBasis:
    """Exact symplectic reduction of the edge-cycle lattice.

    Greedy: scan pairs in edge-id order for a +-1 pairing, split it off,
    clear its row and column from the rest, recurse.  The kernel that
    remains must be spanned by the given face cycles; b-cycles are halved
    at the end so that a_i o b_j = delta_ij / 2.
    """
    E = len(F)
    active = [Cycle.edge(e) for e in range(E)]
    a_out, b_out = [], []
    while True:
        pair = None
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                w = cycle_pairing(F, active[i], active[j])
                if w != 0 and abs(w) == 1:
                    pair = (i, j, w)
                    break
            if pair:
                break
        if pair is None:
            # allow a non-unit pivot if that is all that remains
            for i in range(len(active)):
                for j in range(i + 1, len(active)):
                    w = cycle_pairing(F, active[i], active[j])
                    if w != 0:
                        pair = (i, j, w)
                        break
                if pair:
                    break
        if pair is None:
            break
        i, j, w = pair
        a = active[i]
        b = active[j].scale(Fraction(1, w))
        rest = [active[k] for k in range(len(active)) if k not in (i, j)]
        cleaned = []
        for c in rest:
            c2 = c - a.scale(cycle_pairing(F, c, b)) + b.scale(cycle_pairing(F, c, a))
            cleaned.append(c2)
        a_out.append(a)
        b_out.append(b)
        active = cleaned

    # remaining vectors pair to zero with everything: the Casimir directions
    for c in active:
        for d in a_out + b_out + active:
            if cycle_pairing(F, c, d) != 0:
                raise DegenerateFormUnexpectedRank("kernel residue fails to be isotropic")
    n = len(t_list)
    expected_rank = E - n
    if 2 * len(a_out) != expected_rank:
        raise DegenerateFormUnexpectedRank(
            f"rank {2*len(a_out)} != expected {expected_rank}"
        )
    for t in t_list:
        for d in a_out + b_out:
            if cycle_pairing(F, t, d) != 0:
                raise DegenerateFormUnexpectedRank("face cycle is not a Casimir")
    b_out = [b.scale(Fraction(1, 2)) for b in b_out]
    return SymplecticBasis(a=a_out, b=b_out, t=list(t_list))


def matrix_rank(F) -> int:
    """Exact rank over the rationals (fraction Gaussian elimination)."""
    m = [row[:] for row in F]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    rank = 0
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        rank += 1
    return rank


def goldman_structures(sc):
    """(Omega_G, P_G) in edge coordinates, exact.

    Omega_G sums d zeta_{e'} ^ d zeta_e over ciliation-ordered pairs at each
    pole; P_G is the face-sum tensor, which works out to a quarter of the
    edge-cycle intersection matrix.
    """
    E = len(sc.edges)
    omega = [[Fraction(0)] * E for _ in range(E)]
    for j in range(len(sc.poles)):
        order = sc.edges_at_pole(j)
        for k in range(len(order)):
            for l in range(k + 1, len(order)):
                ep, e = order[k], order[l]
                omega[ep][e] += 1
                omega[e][ep] -= 1
    P = [[Fraction(0)] * E for _ in range(E)]
    for tri in sc.triangles:
        e0, e1, e2 = tri.edges_ccw
        for a, b in ((e0, e1), (e1, e2), (e2, e0)):
            P[a][b] -= Fraction(1, 4)
            P[b][a] += Fraction(1, 4)
    return omega, P
