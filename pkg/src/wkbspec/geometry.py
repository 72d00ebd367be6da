"""Planar geometry helpers: crossings, clearances, offset loops, windings.

All paths are polylines given as lists of complex points.  Crossing counts
are transversal segment intersections; loops are closed polylines (first
point not repeated).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

__all__ = [
    "seg_cross",
    "polyline_crossings",
    "point_polyline_distance",
    "polyline_clearance",
    "winding_number",
    "stadium_loop",
    "circle_loop",
    "polyline_length",
]


def _orient(a: complex, b: complex, c: complex) -> float:
    return (b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real)


def seg_cross(a1: complex, a2: complex, b1: complex, b2: complex) -> bool:
    """Proper (transversal, interior) crossing of two segments.

    Touching configurations (an endpoint exactly on the other segment) do
    not count; parity bookkeeping relies on this.
    """
    d1 = _orient(b1, b2, a1)
    d2 = _orient(b1, b2, a2)
    d3 = _orient(a1, a2, b1)
    d4 = _orient(a1, a2, b2)
    return d1 * d2 < 0 and d3 * d4 < 0


def polyline_crossings(path: list[complex], other: list[complex], closed: bool = False) -> int:
    """Number of transversal crossings between two polylines."""
    pts = list(path) + ([path[0]] if closed else [])
    if (len(pts) - 1) * (len(other) - 1) > 4000:
        return _polyline_crossings_np(pts, other)
    count = 0
    for i in range(len(pts) - 1):
        for j in range(len(other) - 1):
            if seg_cross(pts[i], pts[i + 1], other[j], other[j + 1]):
                count += 1
    return count


def _polyline_crossings_np(pts, other) -> int:
    a = np.asarray(pts, dtype=complex)
    b = np.asarray(other, dtype=complex)
    b1, b2 = b[:-1], b[1:]
    bx, by = b1.real, b1.imag
    dxb, dyb = (b2 - b1).real, (b2 - b1).imag
    count = 0
    for i in range(len(a) - 1):
        a1, a2 = a[i], a[i + 1]
        # orientation of a1, a2 relative to each b-segment
        d1 = dxb * (a1.imag - by) - dyb * (a1.real - bx)
        d2 = dxb * (a2.imag - by) - dyb * (a2.real - bx)
        dxa, dya = a2.real - a1.real, a2.imag - a1.imag
        d3 = dxa * (by - a1.imag) - dya * (bx - a1.real)
        d4 = dxa * (b2.imag - a1.imag) - dya * (b2.real - a1.real)
        mask = (d1 * d2 < 0) & (d3 * d4 < 0)
        count += int(np.count_nonzero(mask))
    return count


def point_segment_distance(p: complex, a: complex, b: complex) -> float:
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return abs(p - a)
    t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom
    t = max(0.0, min(1.0, t))
    return abs(p - (a + t * ab))


def point_polyline_distance(p: complex, path: list[complex], closed: bool = False) -> float:
    pts = list(path) + ([path[0]] if closed else [])
    return min(point_segment_distance(p, pts[i], pts[i + 1]) for i in range(len(pts) - 1))


def polyline_clearance(path: list[complex], points: list[complex], closed: bool = False) -> float:
    """Minimum distance from any of `points` to the polyline."""
    if not points:
        return math.inf
    return min(point_polyline_distance(q, path, closed=closed) for q in points)


def polyline_length(path: list[complex], closed: bool = False) -> float:
    pts = list(path) + ([path[0]] if closed else [])
    return sum(abs(pts[i + 1] - pts[i]) for i in range(len(pts) - 1))


def winding_number(loop: list[complex], z: complex) -> int:
    """Winding number of a closed polyline around z."""
    total = 0.0
    n = len(loop)
    for i in range(n):
        a = loop[i] - z
        b = loop[(i + 1) % n] - z
        total += cmath.phase(b / a)
    return int(round(total / (2 * math.pi)))


def stadium_loop(
    a: complex,
    b: complex,
    margin: float,
    clockwise: bool = True,
    cap_points: int = 9,
    margin_b: float | None = None,
) -> list[complex]:
    """Closed rounded-rectangle polyline around the segment [a, b].

    `clockwise` refers to the plane orientation of the traversal; the cap
    radius at `b` may differ from the one at `a`.
    """
    d = b - a
    L = abs(d)
    mb = margin if margin_b is None else margin_b
    if L == 0:
        return circle_loop(a, margin, clockwise=clockwise)
    u = d / L
    nvec = u * 1j
    pts: list[complex] = [a + margin * nvec, b + mb * nvec]
    for k in range(1, cap_points):
        t = math.pi * k / cap_points
        pts.append(b + mb * (nvec * math.cos(t) + u * math.sin(t)))
    pts.extend([b - mb * nvec, a - margin * nvec])
    for k in range(1, cap_points):
        t = math.pi * k / cap_points
        pts.append(a + margin * (-nvec * math.cos(t) - u * math.sin(t)))
    mid = (a + b) / 2
    w = winding_number(pts, mid)
    if (w > 0) == clockwise:
        pts = pts[::-1]
    return pts


def circle_loop(center: complex, radius: float, n: int = 24, clockwise: bool = False, start_angle: float = 0.0) -> list[complex]:
    sign = -1.0 if clockwise else 1.0
    return [center + radius * cmath.exp(1j * (start_angle + sign * 2 * math.pi * k / n)) for k in range(n)]
