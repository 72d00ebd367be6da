"""Contour integration of v and the odd WKB differentials on the cover.

A cover path is a closed base polyline with a starting branch of sqrt(Q);
the branch is propagated by continuity, so the integral only depends on the
homotopy class of the loop and the starting sheet.  Edge cycles are realized
as clockwise sausage loops around the branch cuts, pole cycles as small
counterclockwise circles on the first sheet.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PathClearanceFailure, QuadratureFailure, TruncationTooLow
from .homology import Cycle
from .network import StokesComplex, _propagate_branch
from .riccati import riccati_series

__all__ = [
    "CoverPath",
    "realize_edge_cycle",
    "realize_pole_cycle",
    "realize_cycle",
    "integrate_v",
    "integrate_odd_term",
    "VorosTable",
    "voros_symbols",
    "homological_coordinates",
]

_GL_CACHE: dict = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


@dataclass
class CoverPath:
    """Closed base polyline plus the initial branch at its first vertex."""

    points: list
    w_start: complex
    sheet: int = 1

    def reversed(self) -> "CoverPath":
        pts = [self.points[0]] + self.points[1:][::-1]
        return CoverPath(pts, self.w_start, self.sheet)

    def mu_reflected(self) -> "CoverPath":
        return CoverPath(list(self.points), -self.w_start, 3 - self.sheet)


# ---------------------------------------------------------------------------
# realizations


def realize_edge_cycle(sc: StokesComplex, edge_id: int, margin_factor: float = 0.35) -> CoverPath:
    """Clockwise sausage loop around the branch cut of one edge, sheet 1.

    The loop encircles the two zeros at the ends of the cut and nothing
    else; clearance from all other singularities is validated.
    """
    e = sc.edges[edge_id]
    cut = e.cut
    xa, xb = sc.zeros[e.zeros[0]], sc.zeros[e.zeros[1]]
    sing = sc.singular_points()
    others = [s for s in sing if s != xa and s != xb]

    def local(z):
        return min(abs(z - s) for s in sing if abs(z - s) > 1e-14)

    eta = margin_factor * min(local(xa), local(xb))
    for p in cut[1:-1]:
        d = min((abs(p - s) for s in others), default=math.inf)
        eta = min(eta, 0.45 * d) if d < math.inf else eta
    if eta <= 0:
        raise PathClearanceFailure(f"no room for a loop around cut {edge_id}")

    pts = _resample(cut, max(24, min(60, len(cut))))
    left, right = [], []
    for k in range(len(pts)):
        if k == 0:
            tangent = pts[1] - pts[0]
        elif k == len(pts) - 1:
            tangent = pts[-1] - pts[-2]
        else:
            tangent = pts[k + 1] - pts[k - 1]
        tangent /= abs(tangent)
        nvec = 1j * tangent
        left.append(pts[k] + eta * nvec)
        right.append(pts[k] - eta * nvec)
    t0 = (pts[1] - pts[0]) / abs(pts[1] - pts[0])
    t1 = (pts[-1] - pts[-2]) / abs(pts[-1] - pts[-2])
    cap_b = [xb + eta * 1j * t1 * cmath.exp(-1j * math.pi * k / 6) for k in range(1, 6)]
    cap_a = [xa - eta * 1j * t0 * cmath.exp(-1j * math.pi * k / 6) for k in range(1, 6)]
    loop = left + cap_b + right[::-1] + cap_a
    # orient clockwise in the plane
    if _winding(loop, 0.5 * (xa + xb) if _inside(loop, 0.5 * (xa + xb)) else pts[len(pts) // 2]) > 0:
        loop = loop[::-1]
    # validations
    for s in others:
        if _dist_to_loop(loop, s) < 0.2 * local(s):
            raise PathClearanceFailure(f"loop around cut {edge_id} too close to another singularity")
    wa, wb = _winding(loop, xa), _winding(loop, xb)
    if not (wa == wb and abs(wa) == 1):
        raise PathClearanceFailure(f"loop around cut {edge_id} fails to encircle its zeros once")
    if any(_winding(loop, s) != 0 for s in others):
        raise PathClearanceFailure(f"loop around cut {edge_id} encircles a foreign singularity")
    if wa == +1:
        loop = loop[::-1]
    # basepoint on a side chain: inside one of the edge's two pole faces the
    # first-sheet branch is anchored by that pole's residue; cap vertices sit
    # in foreign faces and would flip the lift.
    mid = pts[len(pts) // 2]
    tmid = pts[len(pts) // 2 + 1] - pts[len(pts) // 2 - 1]
    tmid /= abs(tmid)
    loop = _rotate_to_chain_base(sc, loop, [mid + eta * 1j * tmid, mid - eta * 1j * tmid], e.poles)
    return CoverPath(loop, sc.sheet1_at(loop[0]), 1)


def realize_pole_cycle(sc: StokesComplex, j: int, radius_factor: float = 0.55) -> CoverPath:
    """Counterclockwise circle around pole j on the first sheet (the cycle t_j).

    The circle starts on the ray through the sheet anchor so the branch can
    be carried over radially.
    """
    r = radius_factor * sc.capture_radii[j]
    c = sc.poles[j]
    alpha = cmath.phase(sc.anchors[j] - c)
    loop = [c + r * cmath.exp(1j * (alpha + 2 * math.pi * k / 32)) for k in range(32)]
    q, _ = sc.qd.scalar_evaluators()
    w0 = _propagate_branch(q, sc.anchors[j], loop[0], sc.anchor_ws[j], sc.singular_points())
    return CoverPath(loop, w0, 1)


def realize_cycle(cycle: Cycle, sc: StokesComplex, cache=None):
    """List of (coefficient, CoverPath) realizing a combination of edge cycles."""
    out = []
    for e, coeff in sorted(cycle.coeffs.items()):
        if cache is not None and e in cache:
            path = cache[e]
        else:
            path = realize_edge_cycle(sc, e)
            if cache is not None:
                cache[e] = path
        out.append((coeff, path))
    return out


def _rotate_to_chain_base(sc: StokesComplex, loop, chain_points, pole_pair):
    """Rotate the loop to start at a side-chain vertex visible from one of
    the two pole anchors of the edge (so the first-sheet branch there is
    well defined by that pole's residue)."""
    from .geometry import polyline_crossings, polyline_clearance

    sing = sc.singular_points()
    order = sorted(
        range(len(loop)),
        key=lambda k: min(abs(loop[k] - cp) for cp in chain_points),
    )
    for shift in order[: max(8, len(loop) // 3)]:
        z = loop[shift]
        for j in pole_pair:
            seg = [sc.anchors[j], z]
            if any(polyline_crossings(seg, cut) for cut in sc.cuts()):
                continue
            if polyline_clearance(seg, sing) < 1e-9:
                continue
            return loop[shift:] + loop[:shift]
    raise PathClearanceFailure("no side-chain vertex of the loop is anchor-visible")


def _resample(path, k):
    seglen = [abs(path[i + 1] - path[i]) for i in range(len(path) - 1)]
    total = sum(seglen)
    acc = [0.0]
    for L in seglen:
        acc.append(acc[-1] + L)
    out = []
    j = 0
    for i in range(k + 1):
        target = total * i / k
        while j < len(seglen) - 1 and acc[j + 1] < target:
            j += 1
        t = (target - acc[j]) / seglen[j] if seglen[j] > 0 else 0.0
        out.append(path[j] + t * (path[j + 1] - path[j]))
    return out


def _winding(loop, z):
    total = 0.0
    n = len(loop)
    for i in range(n):
        a = loop[i] - z
        b = loop[(i + 1) % n] - z
        total += cmath.phase(b / a)
    return int(round(total / (2 * math.pi)))


def _inside(loop, z):
    return _winding(loop, z) != 0


def _dist_to_loop(loop, z):
    from .geometry import point_polyline_distance

    return point_polyline_distance(z, list(loop) + [loop[0]])


# ---------------------------------------------------------------------------
# quadrature


def _integrate_segment(q, z0, z1, w0, fvals, order):
    nodes, weights = _gl(order)
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    zs = mid + half * nodes
    qs = q(zs)
    roots = np.sqrt(qs)
    ws = np.empty_like(roots)
    prev = w0
    for i in range(len(zs)):
        w = roots[i]
        if abs(w - prev) > abs(w + prev):
            w = -w
        ws[i] = w
        prev = w
    vals = np.atleast_2d(fvals(zs, ws))
    ints = half * (vals @ weights)
    mass = abs(half) * (np.abs(vals) @ weights)
    # endpoint branch for chaining
    w_end = q(np.array([z1]))
    we = complex(np.sqrt(w_end[0]))
    if abs(we - prev) > abs(we + prev):
        we = -we
    return ints, mass, we


def integrate_path(sc_or_qd, path: CoverPath, fvals, tol=1e-11, closed=True):
    """Adaptive Gauss-Legendre along the polyline with branch tracking.

    fvals(z_array, w_array) -> integrand rows (m, n) or a single row (n,).
    Panels disagreeing between orders 15 and 31 are bisected.  Returns
    (values, error_estimates) as 1-d arrays of length m.
    """
    qd = sc_or_qd.qd if isinstance(sc_or_qd, StokesComplex) else sc_or_qd
    nc = qd.numerator.numpy_coeffs()
    dc = (qd._den1 * qd._den1).numpy_coeffs()

    def qfun(z):
        return np.polyval(nc, z) / np.polyval(dc, z)

    pts = list(path.points) + ([path.points[0]] if closed else [])
    w = path.w_start
    total = None
    err = None
    for i in range(len(pts) - 1):
        val, er, w = _adaptive_panel(qfun, pts[i], pts[i + 1], w, fvals, tol, 0)
        total = val if total is None else total + val
        err = er if err is None else err + er
    return total, err


def _adaptive_panel(q, z0, z1, w0, fvals, tol, depth):
    i15, _, _ = _integrate_segment(q, z0, z1, w0, fvals, 15)
    i31, mass, w_end = _integrate_segment(q, z0, z1, w0, fvals, 31)
    d = np.abs(i15 - i31)
    floor = 5e-14 * mass + 1e-300
    bound = np.maximum(tol * np.maximum(1.0, np.abs(i31)), floor)
    if np.all(d < bound) or depth >= 12:
        if depth >= 12 and np.any(d > np.maximum(1e3 * tol * np.maximum(1.0, np.abs(i31)), 100 * floor)):
            raise QuadratureFailure(f"panel failed to converge (residual {float(np.max(d)):.2e})")
        return i31, d, w_end
    mid = 0.5 * (z0 + z1)
    v1, e1, wm = _adaptive_panel(q, z0, mid, w0, fvals, tol, depth + 1)
    v2, e2, we = _adaptive_panel(q, mid, z1, wm, fvals, tol, depth + 1)
    return v1 + v2, e1 + e2, we


def integrate_v(sc, path: CoverPath, tol=1e-11):
    """Integral of v = sqrt(Q) dz along the cover path."""

    def fvals(z, w):
        return w

    val, err = integrate_path(sc, path, fvals, tol)
    return complex(val[0]), float(err[0])


def integrate_odd_terms(sc, path: CoverPath, orders, tol=1e-11):
    """Integrals of s_k sqrt(Q) dz for all requested odd orders at once."""
    from .jets import OddTermEvaluator

    qd = sc.qd if isinstance(sc, StokesComplex) else sc
    ev = OddTermEvaluator(qd, orders)
    vals, errs = integrate_path(sc, path, ev, tol)
    return {k: complex(v) for k, v in zip(orders, vals)}, {k: float(e) for k, e in zip(orders, errs)}


# ---------------------------------------------------------------------------
# Voros table


@dataclass
class VorosTable:
    truncation: int
    cycles: dict            # name -> Cycle or ('pole', j)
    values: dict = field(default_factory=dict)   # (name, k) -> complex
    errors: dict = field(default_factory=dict)

    def value(self, name, k):
        return self.values[(name, k)]

    def column(self, k):
        return {name: self.values[(name, k)] for name in self.cycles}

    def to_json(self):
        return {
            "truncation": self.truncation,
            "entries": [
                {"cycle": name, "order": k, "value": [v.real, v.imag],
                 "error": self.errors[(name, k)]}
                for (name, k), v in sorted(self.values.items())
            ],
        }


def voros_symbols(sc: StokesComplex, named_cycles: dict, truncation: int, tol=1e-11) -> VorosTable:
    """Periods of v_{2k+1} = s_{2k+1} v over the named cycles, 2k+1 <= truncation.

    Cycle values may be homology Cycle objects (combinations of edge cycles)
    or ("pole", j) for the anti-invariant circle around pole j.
    """
    if truncation < 1:
        raise TruncationTooLow("need at least the order-1 terms")
    orders = list(range(-1, truncation + 1, 2))
    table = VorosTable(truncation, dict(named_cycles))
    cache: dict = {}
    realized = {}
    for name, spec in named_cycles.items():
        if isinstance(spec, tuple) and spec and spec[0] == "pole":
            realized[name] = [(1, realize_pole_cycle(sc, spec[1]))]
        else:
            realized[name] = realize_cycle(spec, sc, cache)
    for name, parts in realized.items():
        totals = {k: 0j for k in orders}
        errs = {k: 0.0 for k in orders}
        for coeff, path in parts:
            vals, ers = integrate_odd_terms(sc, path, orders, tol)
            for k in orders:
                totals[k] += complex(coeff) * vals[k]
                errs[k] += abs(complex(coeff)) * ers[k]
        for k in orders:
            table.values[(name, k)] = totals[k]
            table.errors[(name, k)] = errs[k]
    return table


def homological_coordinates(sc: StokesComplex, basis, tol=1e-11):
    """(A_i, B_i, two-pi-i r_k) from integrating v over the basis cycles."""
    cache: dict = {}
    A, B = [], []
    for a in basis.a:
        val = 0j
        for coeff, path in realize_cycle(a, sc, cache):
            v, _ = integrate_v(sc, path, tol)
            val += complex(coeff) * v
        A.append(val)
    for b in basis.b:
        val = 0j
        for coeff, path in realize_cycle(b, sc, cache):
            v, _ = integrate_v(sc, path, tol)
            val += complex(coeff) * v
        B.append(val)
    R = []
    for j in range(len(sc.poles)):
        path = realize_pole_cycle(sc, j)
        v, _ = integrate_v(sc, path, tol)
        R.append(v)
    return A, B, R
