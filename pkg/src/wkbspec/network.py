"""Spectral network tracing and the combinatorial Stokes complex.

Horizontal trajectories solve dz/dt = 1/w with w^2 = Q(z) carried along as
part of the state, so Re int v grows linearly in t and Im int v stays
constant along an exact trajectory.  Three critical trajectories leave every
simple zero; for a GMN differential each one falls into a double pole.  The
trajectories assemble into the critical graph, whose strip-shaped complement
faces give the triangulation (faces <-> zeros, vertices <-> poles), the dual
trivalent graph whose edges are the branch cuts, and the per-pole ciliation
orders.

Geometry inside a strip is done in the flat coordinate of the strip: the
branch cut dual to an edge is the straight flat segment joining the two
zeros (a strip is flat-convex, so the segment stays inside), and the edge
itself is realized as the horizontal trajectory through the cut midpoint,
which spirals into the two pole corners.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import (
    InconsistentSheets,
    PathClearanceFailure,
    SaddleConnection,
    TraceBudgetExceeded,
    UnflippableEdge,
    WkbSpecError,
)
from .geometry import (
    point_polyline_distance,
    polyline_clearance,
    polyline_crossings,
    winding_number,
)
from .quaddiff import QuadDiff

__all__ = ["TraceOptions", "TrajectoryPath", "StokesComplex", "trace_network", "whitehead_flip"]


@dataclass(frozen=True)
class TraceOptions:
    rtol: float = 1e-10
    launch_delta_factor: float = 1e-3
    capture_factor: float = 0.05
    budget_factor: float = 120.0
    max_steps: int = 200000


@dataclass
class TrajectoryPath:
    source_zero: int
    direction: int
    points: list
    ws: list
    terminus: object  # pole index, 'SADDLE' or 'UNRESOLVED'
    capture_angle: float | None = None

    def im_v_drift(self, qd: QuadDiff) -> tuple[float, float]:
        """(max |Im int v| along the path, flat arclength)."""
        acc = 0j
        worst = 0.0
        for i in range(len(self.points) - 1):
            dz = self.points[i + 1] - self.points[i]
            acc += 0.5 * (self.ws[i] + self.ws[i + 1]) * dz
            worst = max(worst, abs(acc.imag))
        return worst, abs(acc.real)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) flow in the flat metric

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


class _FlowHit(Exception):
    def __init__(self, kind, **data):
        self.kind = kind
        self.data = data


def _flow(qd, z0, w0, phase, t_max, singular, opts, capture=None, forbid=None,
          far_lines=None, bail_radius=None):
    """Integrate dz/dt = phase / w with w^2 = Q tracked by renormalization.

    capture: list of (point, radius, tag) that terminate the flow.
    forbid:  list of (point, radius, tag) that raise a _FlowHit('forbid').
    far_lines: list of polylines; crossing one terminates with a 'hit'.
    bail_radius: |z - centroid| beyond this returns a 'runaway' outcome.
    Returns (points, ws, t, outcome) where outcome is a dict.
    """
    q, qp = qd.scalar_evaluators()

    def f(z, w):
        return phase / w, phase * qp(z) / (2.0 * w * w)

    pts = [z0]
    ws = [w0]
    z, w = z0, w0
    t = 0.0
    h = min(1e-3, 0.1 * t_max)
    left = {tag: False for _, _, tag in (forbid or [])}
    centroid = sum(singular) / len(singular)
    steps = 0
    while t < t_max - 1e-14 and steps < opts.max_steps:
        steps += 1
        dmin = min(abs(z - s) for s in singular)
        hmax = max(0.35 * dmin * abs(w), 1e-12)
        h = min(h, hmax, t_max - t)
        kz = [0j] * 7
        kw = [0j] * 7
        try:
            kz[0], kw[0] = f(z, w)
            for i in range(1, 7):
                zi = z + h * sum(_DP_A[i][j] * kz[j] for j in range(i))
                wi = w + h * sum(_DP_A[i][j] * kw[j] for j in range(i))
                kz[i], kw[i] = f(zi, wi)
        except ZeroDivisionError:
            h *= 0.5
            continue
        z5 = z + h * sum(b * k for b, k in zip(_DP_B5, kz))
        w5 = w + h * sum(b * k for b, k in zip(_DP_B5, kw))
        z4 = z + h * sum(b * k for b, k in zip(_DP_B4, kz))
        err = abs(z5 - z4) / max(abs(z5 - z), 1e-14) + 1e-16
        if err > opts.rtol:
            h *= max(0.2, 0.9 * (opts.rtol / err) ** 0.2)
            continue
        zprev = z
        t += h
        z = z5
        wex = cmath.sqrt(q(z))
        w = wex if abs(wex - w5) <= abs(wex + w5) else -wex
        pts.append(z)
        ws.append(w)
        h *= min(4.0, max(0.3, 0.9 * (opts.rtol / err) ** 0.2))
        if capture:
            for point, radius, tag in capture:
                if abs(z - point) < radius:
                    zr, wr = _refine_to_circle(f, q, pts[-2], ws[-2], point, radius)
                    pts[-1] = zr
                    ws[-1] = wr
                    return pts, ws, t, {"kind": "capture", "tag": tag, "point": zr}
        if forbid:
            for point, radius, tag in forbid:
                if not left[tag] and abs(z - point) > 2.0 * radius:
                    left[tag] = True
                if left[tag] and abs(z - point) < radius:
                    raise _FlowHit("forbid", tag=tag)
        if far_lines:
            for li, line in enumerate(far_lines):
                j = _seg_hits_polyline(zprev, z, line)
                if j is not None:
                    return pts, ws, t, {"kind": "hit", "line": li, "segment": j, "point": z}
        if bail_radius is not None and abs(z - centroid) > bail_radius:
            return pts, ws, t, {"kind": "runaway"}
    if t >= t_max - 1e-14:
        return pts, ws, t, {"kind": "flat"}
    return pts, ws, t, {"kind": "budget"}


def _seg_hits_polyline(a, b, line):
    from .geometry import seg_cross

    for j in range(len(line) - 1):
        if seg_cross(a, b, line[j], line[j + 1]):
            return j
    return None


def _refine_to_circle(f, q, z, w, pole, radius):
    for _ in range(400):
        d = abs(z - pole)
        if d <= radius * 1.0000001:
            return z, w
        h = max(0.2 * (d - radius * 0.98) * abs(w), 1e-12)
        dz, dw = f(z, w)
        zm, wm = z + 0.5 * h * dz, w + 0.5 * h * dw
        dz2, dw2 = f(zm, wm)
        z, w = z + h * dz2, w + h * dw2
        wex = cmath.sqrt(q(z))
        w = wex if abs(wex - w) <= abs(wex + w) else -wex
    return z, w


# ---------------------------------------------------------------------------
# records


@dataclass
class EdgeRecord:
    id: int
    poles: tuple          # (pa, pb) pole indices
    zeros: tuple          # (xa, xb) zero indices
    zero_slots: dict      # zero index -> sector slot at that zero
    polyline: list        # realization pa -> ... -> pb through the strip
    cut: list             # branch cut polyline xa -> xb (flat-straight)
    face_walk: tuple = ()


@dataclass
class TriangleRecord:
    zero: int
    poles_ccw: tuple
    edges_ccw: tuple


class StokesComplex:
    """Critical graph, triangulation, dual graph, cuts and sheet data."""

    def __init__(self, qd: QuadDiff, trajectories, triangles, edges, pole_edge_ccw,
                 cilium_index, anchors, anchor_ws, capture_radii, geometric=True):
        self.qd = qd
        self.zeros = qd.zeros
        self.poles = qd.pole_complex()
        self.trajectories = trajectories
        self.triangles = triangles
        self.edges = edges
        self.pole_edge_ccw = pole_edge_ccw
        self.cilium_index = cilium_index
        self.anchors = anchors
        self.anchor_ws = anchor_ws
        self.capture_radii = capture_radii
        self.geometric = geometric

    # ---- counts ----

    @property
    def n_poles(self):
        return len(self.poles)

    def euler_counts(self):
        return (len(self.poles), len(self.edges), len(self.triangles))

    def edges_at_pole(self, j):
        """Edge ids incident to pole j, ccw starting from the cilium."""
        order = self.pole_edge_ccw[j]
        k = self.cilium_index[j]
        return order[k:] + order[:k]

    def cuts(self):
        return [e.cut for e in self.edges]

    def singular_points(self):
        return list(self.zeros) + list(self.poles)

    def config_scale(self):
        s = self.singular_points()
        return max(abs(a - b) for a in s for b in s if a != b)

    # ---- sheet bookkeeping ----

    def r_index(self, loop) -> int:
        """Parity of crossings of a closed polyline with all branch cuts."""
        c = 0
        for cut in self.cuts():
            c += polyline_crossings(loop, cut, closed=True)
        return c % 2

    def branch_flip(self, loop) -> int:
        """Sign change of sqrt(Q) after continuity around a closed polyline."""
        q, _ = self.qd.scalar_evaluators()
        z0 = loop[0]
        w = cmath.sqrt(q(z0))
        w0 = w
        sing = self.singular_points()
        pts = list(loop) + [loop[0]]
        for i in range(len(pts) - 1):
            w = _propagate_branch(q, pts[i], pts[i + 1], w, sing)
        return +1 if abs(w - w0) <= abs(w + w0) else -1

    def sheet1_at(self, z: complex) -> complex:
        """Value of sqrt(Q) on the first sheet at z (z not on a cut).

        Propagates by continuity from the nearest pole anchor reachable by a
        segment crossing no cuts.
        """
        q, _ = self.qd.scalar_evaluators()
        sing = self.singular_points()
        order = sorted(range(len(self.anchors)), key=lambda j: abs(z - self.anchors[j]))
        for j in order:
            seg = [self.anchors[j], z]
            if any(polyline_crossings(seg, cut) for cut in self.cuts()):
                continue
            if polyline_clearance(seg, sing) < 1e-9:
                continue
            return _propagate_branch(q, self.anchors[j], z, self.anchor_ws[j], sing)
        raise PathClearanceFailure(f"no cut-free anchor segment reaches {z}")

    def audit_sheets(self, n_loops: int = 30, rng=None) -> None:
        """Branch-flip parity must equal cut-crossing parity on random loops."""
        import random

        rng = rng or random.Random(7)
        sing = self.singular_points()
        scale = self.config_scale()
        center = sum(sing) / len(sing)
        done = 0
        while done < n_loops:
            c = center + complex(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)) * scale
            r = rng.uniform(0.1, 1.4) * scale
            loop = [c + r * cmath.exp(2j * math.pi * (k + rng.uniform(-0.25, 0.25)) / 20) for k in range(20)]
            if polyline_clearance(loop, sing, closed=True) < 0.02 * scale:
                continue
            done += 1
            if self.branch_flip(loop) != (1 if self.r_index(loop) == 0 else -1):
                raise InconsistentSheets("branch continuity disagrees with cut-crossing parity")

    # ---- serialization ----

    def adjacency(self):
        return {
            "poles": [[p.real, p.imag] for p in self.poles],
            "zeros": [[x.real, x.imag] for x in self.zeros],
            "triangles": [
                {"zero": t.zero, "poles_ccw": list(t.poles_ccw), "edges_ccw": list(t.edges_ccw)}
                for t in self.triangles
            ],
            "edges": [
                {"id": e.id, "poles": list(e.poles), "zeros": list(e.zeros)} for e in self.edges
            ],
            "ciliation": [list(self.edges_at_pole(j)) for j in range(len(self.poles))],
        }


def _propagate_branch(q, z0, z1, w0, singular, depth=0):
    """Continuity continuation of sqrt(Q) along the segment z0 -> z1."""
    if depth > 48:
        raise PathClearanceFailure("branch propagation too close to a zero")
    mid = 0.5 * (z0 + z1)
    dmin = min(abs(mid - s) for s in singular)
    if abs(z1 - z0) > 0.5 * max(dmin, 1e-300):
        wm = _propagate_branch(q, z0, mid, w0, singular, depth + 1)
        return _propagate_branch(q, mid, z1, wm, singular, depth + 1)
    w = cmath.sqrt(q(z1))
    return w if abs(w - w0) <= abs(w + w0) else -w


# ---------------------------------------------------------------------------
# tracing


def trace_network(qd: QuadDiff, opts: TraceOptions | None = None) -> StokesComplex:
    opts = opts or TraceOptions()
    zeros = qd.zeros
    poles = qd.pole_complex()
    sing = list(zeros) + list(poles)
    scale = max(abs(a - b) for a in sing for b in sing if a != b)
    q, qp = qd.scalar_evaluators()

    def nearest_other(p):
        return min(abs(p - s) for s in sing if abs(p - s) > 1e-14)

    capture_radii = [opts.capture_factor * nearest_other(p) for p in poles]
    zero_radii = [opts.capture_factor * nearest_other(x) for x in zeros]
    wtyp = max(abs(cmath.sqrt(q(x + 0.11 * nearest_other(x)))) for x in zeros)
    t_budget = opts.budget_factor * scale * max(1.0, wtyp)

    capture = [(p, capture_radii[j], j) for j, p in enumerate(poles)]
    trajectories = []
    for i, x in enumerate(zeros):
        c = qp(x)
        delta = opts.launch_delta_factor * nearest_other(x)
        base = -cmath.phase(c) / 3.0
        angles = sorted(((base + 4.0 * math.pi * m / 3.0 + math.pi) % (2 * math.pi) - math.pi) for m in range(3))
        forbid = [(zz, zero_radii[k], k) for k, zz in enumerate(zeros) if k != i]
        forbid.append((x, zero_radii[i], i))
        for d, theta in enumerate(angles):
            z0 = x + delta * cmath.exp(1j * theta)
            w0 = cmath.sqrt(q(z0))
            if (w0 * cmath.exp(1j * theta)).real < 0:
                w0 = -w0
            try:
                pts, ws, t, outcome = _flow(
                    qd, z0, w0, 1.0, t_budget, sing, opts, capture=capture, forbid=forbid
                )
            except _FlowHit as hit:
                raise SaddleConnection(
                    f"trajectory from zero {i} reached zero {hit.data['tag']}: not a GMN differential"
                ) from None
            if outcome["kind"] != "capture":
                raise TraceBudgetExceeded(f"trajectory from zero {i} did not resolve within budget")
            j = outcome["tag"]
            traj = TrajectoryPath(i, d, pts, ws, j, cmath.phase(pts[-1] - poles[j]))
            trajectories.append(traj)

    return _assemble(qd, trajectories, capture_radii, zero_radii, t_budget, opts)


# ---------------------------------------------------------------------------
# assembly


def _assemble(qd, trajectories, capture_radii, zero_radii, t_budget, opts):
    zeros = qd.zeros
    poles = qd.pole_complex()
    sing = list(zeros) + list(poles)
    n = len(poles)
    q, qp = qd.scalar_evaluators()

    zero_out = [[] for _ in zeros]
    pole_out = [[] for _ in poles]
    for t, traj in enumerate(trajectories):
        zero_out[traj.source_zero].append(t)
    for i in range(len(zeros)):
        zero_out[i].sort(key=lambda t: trajectories[t].direction)
        if len(zero_out[i]) != 3:
            raise WkbSpecError(f"zero {i} has {len(zero_out[i])} trajectories")
    for j in range(n):
        incid = [t for t, tr in enumerate(trajectories) if tr.terminus == j]
        if len(incid) < 2:
            raise WkbSpecError(f"pole {j} has fewer than 2 incident trajectories")
        incid.sort(key=lambda t: trajectories[t].capture_angle)
        pole_out[j] = incid

    def ccw_next(h):
        t, side = divmod(h, 2)
        if side == 0:
            lst = zero_out[trajectories[t].source_zero]
            return 2 * lst[(lst.index(t) + 1) % len(lst)]
        lst = pole_out[trajectories[t].terminus]
        return 2 * lst[(lst.index(t) + 1) % len(lst)] + 1

    def face_next(h):
        return ccw_next(h ^ 1)

    visited = set()
    faces = []
    for h0 in range(2 * len(trajectories)):
        if h0 in visited:
            continue
        walk = []
        h = h0
        while h not in visited:
            visited.add(h)
            walk.append(h)
            h = face_next(h)
        faces.append(tuple(walk))

    V, E, F = len(zeros) + n, len(trajectories), len(faces)
    if V - E + F != 2:
        raise WkbSpecError(f"critical graph fails the Euler check: V={V} E={E} F={F}")

    strips = []
    for walk in faces:
        if len(walk) != 4:
            raise WkbSpecError(
                f"critical-graph face is not a quadrilateral strip (walk length {len(walk)}); "
                "self-folded or degenerate configurations are not supported"
            )
        zs, ps = [], []
        for h in walk:
            t, side = divmod(h, 2)
            if side == 0:
                lst = zero_out[trajectories[t].source_zero]
                zs.append((trajectories[t].source_zero, (lst.index(t) - 1) % 3))
            else:
                lst = pole_out[trajectories[t].terminus]
                ps.append((trajectories[t].terminus, (lst.index(t) - 1) % len(lst)))
        if len(zs) != 2 or len(ps) != 2:
            raise WkbSpecError("strip boundary does not alternate zero/pole corners")
        if zs[0][0] == zs[1][0]:
            raise WkbSpecError("self-folded configuration: strip touches one zero twice")
        if ps[0][0] == ps[1][0]:
            raise WkbSpecError("degenerate configuration: strip touches one pole twice")
        strips.append({"walk": walk, "zeros": zs, "poles": ps})
    strips.sort(key=lambda s: tuple(sorted(s["zeros"])))
    if len(strips) != 3 * n - 6:
        raise WkbSpecError(f"expected {3*n-6} strips, found {len(strips)}")

    def launch_angle(t):
        traj = trajectories[t]
        return cmath.phase(traj.points[0] - zeros[traj.source_zero])

    def zero_sector(i, slot):
        ts = zero_out[i]
        return launch_angle(ts[slot]), launch_angle(ts[(slot + 1) % 3])

    def sector_mid(i, slot):
        th0, th1 = zero_sector(i, slot)
        return th0 + 0.5 * ((th1 - th0) % (2 * math.pi))

    def nearest_other(p):
        return min(abs(p - s) for s in sing if abs(p - s) > 1e-14)

    traj_lines = [tr.points for tr in trajectories]

    # ---- cuts: straight flat segments from zero to zero through each strip,
    # with Euclidean fallbacks (bisector polylines, outer arcs) validated by
    # sector membership and crossing-freeness against the critical graph.
    def in_sector(theta, sector):
        th0, th1 = sector
        span = (th1 - th0) % (2 * math.pi)
        return (theta - th0) % (2 * math.pi) <= span

    center = sum(sing) / len(sing)
    r_max = max(abs(s - center) for s in sing)
    r_out = 1.7 * r_max

    def cut_ok(path, xa, xb, slot_a, slot_b):
        if polyline_clearance(path, poles) < 1e-9:
            return False
        for line in traj_lines:
            if polyline_crossings(path, line):
                return False
        if not in_sector(cmath.phase(path[1] - path[0]), zero_sector(xa, slot_a)):
            return False
        if not in_sector(cmath.phase(path[-2] - path[-1]), zero_sector(xb, slot_b)):
            return False
        return True

    edges = []
    for eid, s in enumerate(strips):
        (xa, slot_a), (xb, slot_b) = s["zeros"]
        pa, pb = s["poles"][0][0], s["poles"][1][0]
        ts_b = zero_out[xb]
        far = [trajectories[ts_b[slot_b]], trajectories[ts_b[(slot_b + 1) % 3]]]
        cut = None
        try:
            cut, _ = _flat_cut(
                qd, zeros[xa], zeros[xb], sector_mid(xa, slot_a), far,
                zero_radii[xb], sing, t_budget, opts,
            )
            if not cut_ok(cut, xa, xb, slot_a, slot_b):
                cut = None
        except PathClearanceFailure:
            cut = None
        if cut is None:
            ra = 0.25 * nearest_other(zeros[xa])
            rb = 0.25 * nearest_other(zeros[xb])
            ua = zeros[xa] + ra * cmath.exp(1j * sector_mid(xa, slot_a))
            ub = zeros[xb] + rb * cmath.exp(1j * sector_mid(xb, slot_b))
            cands = [
                [zeros[xa], zeros[xb]],
                [zeros[xa], ua, ub, zeros[xb]],
                [zeros[xa], ua, zeros[xb]],
            ]
            psi_a = cmath.phase(ua - center)
            psi_b = cmath.phase(ub - center)
            r_arc = (1.55 + 0.05 * (eid % 5)) * r_max
            for sense in (+1, -1):
                span = (sense * (psi_b - psi_a)) % (2 * math.pi)
                arc = [
                    center + r_arc * cmath.exp(1j * (psi_a + sense * span * k / 24))
                    for k in range(25)
                ]
                cands.append([zeros[xa], ua] + arc + [ub, zeros[xb]])
            cut = None
            for cand in cands:
                if cut_ok(cand, xa, xb, slot_a, slot_b):
                    cut = cand
                    break
            if cut is None:
                raise PathClearanceFailure(f"no valid cut geometry for strip {eid}")
        edges.append(
            EdgeRecord(
                id=eid,
                poles=(pa, pb),
                zeros=(xa, xb),
                zero_slots={xa: slot_a, xb: slot_b},
                polyline=[],
                cut=cut,
                face_walk=tuple(s["walk"]),
            )
        )

    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if polyline_crossings(edges[i].cut, edges[j].cut):
                raise PathClearanceFailure(f"cuts {i} and {j} cross")

    # ---- edge realizations: horizontal trajectory through the cut midpoint,
    # with Euclidean fallbacks validated against the strip sectors at poles.
    def pole_sector(j, slot):
        lst = pole_out[j]
        return (
            trajectories[lst[slot]].capture_angle,
            trajectories[lst[(slot + 1) % len(lst)]].capture_angle,
        )

    capture = [(p, capture_radii[j], j) for j, p in enumerate(poles)]
    for e, s in zip(edges, strips):
        pa, pb = e.poles
        poly = None
        zmid, wmid = _flat_midpoint(qd, e.cut, sing)
        runs = []
        for sign in (+1.0, -1.0):
            pts, ws, t, outcome = _flow(
                qd, zmid, sign * wmid, 1.0, t_budget, sing, opts, capture=capture,
                bail_radius=6.0 * r_out,
            )
            if outcome["kind"] != "capture":
                runs = None
                break
            runs.append((outcome["tag"], pts))
        if runs is not None:
            (ja, pts_a), (jb, pts_b) = runs
            if {ja, jb} != set(e.poles):
                raise WkbSpecError(
                    f"edge {e.id} realization landed on poles {ja},{jb}, expected {e.poles}"
                )
            poly = [poles[jb]] + _thin(pts_b[::-1], 260) + _thin(pts_a, 260) + [poles[ja]]
            if ja != e.poles[1]:
                poly = poly[::-1]
            if polyline_crossings(_strip_interior(poly, capture_radii, poles), e.cut) != 1:
                poly = None

        if poly is None:
            pole_slots = dict(_strip_pole_slots(e, trajectories, pole_out))

            def sector_mid_pole(j):
                th0, th1 = pole_sector(j, pole_slots[j])
                return th0 + 0.5 * ((th1 - th0) % (2 * math.pi))

            def edge_ok(path):
                trimmed = _trim_ends(path, 1.2 * max(capture_radii[pa], capture_radii[pb]))
                for line in traj_lines:
                    if polyline_crossings(trimmed, line):
                        return False
                if polyline_crossings(trimmed, e.cut) != 1:
                    return False
                for o in edges:
                    if o.id != e.id and polyline_crossings(trimmed, o.cut):
                        return False
                if not in_sector(cmath.phase(path[1] - path[0]), pole_sector(pa, pole_slots[pa])):
                    return False
                if not in_sector(cmath.phase(path[-2] - path[-1]), pole_sector(pb, pole_slots[pb])):
                    return False
                return True

            xa, xb = e.zeros
            cands = []
            for x in (min(xa, xb), max(xa, xb)):
                slot = e.zero_slots[x]
                for rho_f in (0.3, 0.18, 0.45):
                    m = zeros[x] + rho_f * nearest_other(zeros[x]) * cmath.exp(1j * sector_mid(x, slot))
                    cands.append([poles[pa], m, poles[pb]])
            ea = poles[pa] + 2.2 * capture_radii[pa] * cmath.exp(1j * sector_mid_pole(pa))
            eb = poles[pb] + 2.2 * capture_radii[pb] * cmath.exp(1j * sector_mid_pole(pb))
            psi_a, psi_b = cmath.phase(ea - center), cmath.phase(eb - center)
            r_arc = (1.95 + 0.05 * (e.id % 5)) * r_max
            for sense in (+1, -1):
                span = (sense * (psi_b - psi_a)) % (2 * math.pi)
                arc = [
                    center + r_arc * cmath.exp(1j * (psi_a + sense * span * k / 24))
                    for k in range(25)
                ]
                cands.append([poles[pa], ea] + arc + [eb, poles[pb]])
            for cand in cands:
                if edge_ok(cand):
                    poly = cand
                    break
            if poly is None:
                raise PathClearanceFailure(f"no valid realization for edge {e.id}")
        e.polyline = poly

    # ---- per-pole ccw edge order and ciliation
    pole_edge_ccw = []
    cilium_index = []
    for j in range(n):
        sectors = []
        for e in edges:
            for pj, slot in _strip_pole_slots(e, trajectories, pole_out):
                if pj == j:
                    sectors.append((slot, e.id))
        sectors.sort()
        order = [eid for _, eid in sectors]

        def out_angle(eid):
            e = edges[eid]
            pl = e.polyline if e.poles[0] == j else e.polyline[::-1]
            k = 1
            while k < len(pl) - 1 and abs(pl[k] - pl[0]) < 1e-12:
                k += 1
            return cmath.phase(pl[k] - pl[0])

        pole_edge_ccw.append(order)
        cilium_index.append(min(range(len(order)), key=lambda k: out_angle(order[k])))

    # ---- triangles
    strip_by_corner = {}
    for e in edges:
        for x in e.zeros:
            strip_by_corner[(x, e.zero_slots[x])] = e.id
    triangles = []
    for i in range(len(zeros)):
        ts = zero_out[i]
        pole_ccw = tuple(trajectories[t].terminus for t in ts)
        edge_ccw = tuple(strip_by_corner[(i, slot)] for slot in range(3))
        for slot in range(3):
            e = edges[edge_ccw[slot]]
            if set(e.poles) != {pole_ccw[slot], pole_ccw[(slot + 1) % 3]}:
                raise WkbSpecError("triangle edge does not match its sector poles")
        triangles.append(TriangleRecord(zero=i, poles_ccw=pole_ccw, edges_ccw=edge_ccw))

    # ---- sheet anchors
    anchors = []
    anchor_ws = []
    residues = qd.residue_complex()
    for j in range(n):
        r_anchor = 0.5 * capture_radii[j]
        best, best_d = None, -1.0
        for k in range(16):
            cand = poles[j] + r_anchor * cmath.exp(2j * math.pi * k / 16)
            d = min(point_polyline_distance(cand, e.cut) for e in edges)
            if d > best_d:
                best, best_d = cand, d
        want = residues[j] / (best - poles[j])
        w = cmath.sqrt(q(best))
        if abs(w - want) > abs(w + want):
            w = -w
        anchors.append(best)
        anchor_ws.append(w)

    sc = StokesComplex(
        qd, trajectories, triangles, edges, pole_edge_ccw, cilium_index,
        anchors, anchor_ws, capture_radii,
    )
    _audit_branch_points(sc)
    return sc


def _flat_cut(qd, za, zb, theta_mid, far, zb_radius, sing, t_budget, opts):
    """Straight flat segment from zero za to zero zb through one strip.

    A vertical probe from za finds the strip height and the flat offset of
    zb along the far boundary; the cut is then re-traced along the straight
    flat direction and snapped to zb.  Returns (polyline, flat_vector).
    """
    q, _ = qd.scalar_evaluators()
    scale = max(abs(a - b) for a in sing for b in sing if a != b)
    centroid = sum(sing) / len(sing)
    bail = 8.0 * max(abs(s - centroid) for s in sing)
    delta = 1e-3 * min(abs(za - s) for s in sing if abs(za - s) > 1e-14)
    z0 = za + delta * cmath.exp(1j * theta_mid)
    w0 = cmath.sqrt(q(z0))
    if (w0 * cmath.exp(1j * theta_mid)).imag < 0:
        w0 = -w0

    # thinned far boundaries for crossing detection
    far_idx = [_thin_indices(len(traj.points), 160) for traj in far]
    far_pts = [[traj.points[k] for k in idx] for traj, idx in zip(far, far_idx)]

    # vertical probe (phase i): d(int v)/dt = i
    pts, ws, t, outcome = _flow(
        qd, z0, w0, 1j, t_budget, sing, opts,
        capture=[(zb, 0.5 * zb_radius, "zb")], far_lines=far_pts, bail_radius=bail,
    )
    if outcome["kind"] == "capture":
        # probe ran essentially into the opposite zero
        omega = 1j * t + _flat_segment_integral(q, pts[-1], zb, ws[-1])
    elif outcome["kind"] == "hit":
        li = outcome["line"]
        traj = far[li]
        # precise crossing of the last probe step with the full far polyline
        lo = far_idx[li][max(outcome["segment"] - 1, 0)]
        hi = far_idx[li][min(outcome["segment"] + 1, len(far_idx[li]) - 1)]
        window = traj.points[lo : hi + 2]
        jloc = _seg_hits_polyline(pts[-2], pts[-1], window)
        if jloc is None:
            jfull, zx = lo, pts[-1]
        else:
            jfull = lo + jloc
            zx = _seg_intersection(pts[-2], pts[-1], traj.points[jfull], traj.points[jfull + 1])
        # probe flat position at the crossing (first-order step correction)
        wlast = ws[-1]
        omega_x = 1j * t - wlast * (pts[-1] - zx)
        # flat offset from the crossing back to zb along the full far boundary
        sgn = 1.0 if abs(traj.ws[jfull] - wlast) <= abs(traj.ws[jfull] + wlast) else -1.0
        acc = traj.ws[jfull] * (traj.points[jfull] - zx)
        for idx in range(jfull, 0, -1):
            acc += 0.5 * (traj.ws[idx] + traj.ws[idx - 1]) * (traj.points[idx - 1] - traj.points[idx])
        acc += traj.ws[0] * (zb - traj.points[0])
        omega = omega_x + sgn * acc
    else:
        raise PathClearanceFailure("vertical probe did not resolve the strip height")

    # shooting: retrace along the straight flat direction, correct the aim by
    # the measured flat offset of the endpoint from the target zero
    th0 = theta_mid - math.pi / 3  # sector start ray corresponds to flat angle 0
    best = None
    for _ in range(5):
        beta = cmath.phase(omega)
        z0 = za + delta * cmath.exp(1j * (th0 + (2.0 / 3.0) * beta))
        w0 = cmath.sqrt(q(z0))
        if (w0 * cmath.exp(1j * (th0 + (2.0 / 3.0) * beta)) / cmath.exp(1j * beta)).real < 0:
            w0 = -w0
        pts, ws, t, outcome = _flow(
            qd, z0, w0, omega / abs(omega), abs(omega), sing, opts,
            capture=[(zb, 0.35 * zb_radius, "zb")], bail_radius=bail,
        )
        if outcome["kind"] not in ("flat", "capture"):
            raise PathClearanceFailure("flat cut retrace escaped")
        zend, wend = pts[-1], ws[-1]
        gap = abs(zend - zb)
        if best is None or gap < best[0]:
            best = (gap, pts)
        if gap < 0.02 * zb_radius or outcome["kind"] == "capture":
            best = (gap, pts)
            break
        # flat correction: int v from zend to zb along the straight segment
        corr = _flat_segment_integral(q, zend, zb, wend)
        omega = omega / abs(omega) * t + corr
    gap, pts = best
    if gap > 2.0 * zb_radius:
        raise PathClearanceFailure(f"flat cut retrace missed its zero by {gap:.3g}")
    cut = [za] + _thin(pts, 240) + [zb]
    return cut, omega


def _seg_intersection(a1, a2, b1, b2):
    """Intersection point of two segments assumed to cross."""
    d1 = a2 - a1
    d2 = b2 - b1
    denom = (d1.real * d2.imag - d1.imag * d2.real)
    if denom == 0:
        return 0.5 * (a1 + a2)
    s = ((b1.real - a1.real) * d2.imag - (b1.imag - a1.imag) * d2.real) / denom
    return a1 + s * d1


def _flat_segment_integral(q, z0, z1, w0):
    """int sqrt(Q) dz along the straight segment [z0, z1], branch from w0.

    Integrable square-root endpoint behavior is handled well enough by
    composite Gauss nodes because the segment is short (near a zero).
    """
    import numpy as np

    nodes, weights = np.polynomial.legendre.leggauss(12)
    acc = 0j
    w = w0
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    for x, wt in zip(nodes, weights):
        z = mid + half * x
        val = cmath.sqrt(q(z))
        if abs(val - w) > abs(val + w):
            val = -val
        w = val
        acc += wt * val
    return acc * half


def _thin_indices(n, maxn):
    if n <= maxn:
        return list(range(n))
    step = (n - 1) / (maxn - 1)
    return [int(round(i * step)) for i in range(maxn)]


def _trim_ends(path, margin):
    """Pull the endpoints inward along the end segments (for crossing tests)."""
    out = list(path)
    a, m = out[0], out[1]
    d = abs(m - a)
    if d > 0:
        out[0] = a + (m - a) * min(0.45, margin / d)
    b, m2 = out[-1], out[-2]
    d = abs(m2 - b)
    if d > 0:
        out[-1] = b + (m2 - b) * min(0.45, margin / d)
    return out


def _flat_midpoint(qd, cut, sing):
    """Point halfway along the cut in the flat metric, with its tracked root."""
    q, _ = qd.scalar_evaluators()
    w = None
    # integrate flat length, then walk to half
    lens = []
    total = 0.0
    ws = []
    for i in range(len(cut) - 1):
        zm = 0.5 * (cut[i] + cut[i + 1])
        wv = cmath.sqrt(q(zm))
        if w is not None and abs(wv - w) > abs(wv + w):
            wv = -wv
        w = wv
        ws.append(wv)
        L = abs(wv * (cut[i + 1] - cut[i]))
        lens.append(L)
        total += L
    acc = 0.0
    for i, L in enumerate(lens):
        if acc + L >= 0.5 * total:
            frac = (0.5 * total - acc) / L if L > 0 else 0.5
            zmid = cut[i] + frac * (cut[i + 1] - cut[i])
            wmid = cmath.sqrt(q(zmid))
            if abs(wmid - ws[i]) > abs(wmid + ws[i]):
                wmid = -wmid
            return zmid, wmid
        acc += L
    return cut[len(cut) // 2], ws[len(ws) // 2]


def _thin(pts, maxn):
    if len(pts) <= maxn:
        return list(pts)
    step = (len(pts) - 1) / (maxn - 1)
    return [pts[int(round(i * step))] for i in range(maxn)]


def _strip_interior(poly, capture_radii, poles):
    """Trim the spiral ends inside the capture disks (for crossing tests)."""

    def outside(p):
        return all(abs(p - poles[j]) > 0.999 * capture_radii[j] for j in range(len(poles)))

    lo = 0
    while lo < len(poly) and not outside(poly[lo]):
        lo += 1
    hi = len(poly) - 1
    while hi > lo and not outside(poly[hi]):
        hi -= 1
    out = poly[lo : hi + 1]
    return out if len(out) >= 2 else poly


def _strip_pole_slots(edge: EdgeRecord, trajectories, pole_out):
    out = []
    for h in edge.face_walk:
        t, side = divmod(h, 2)
        if side == 1:
            j = trajectories[t].terminus
            out.append((j, (pole_out[j].index(t) - 1) % len(pole_out[j])))
    return out


def _audit_branch_points(sc: StokesComplex) -> None:
    """Zeros must flip the tracked root; poles must not."""
    sing = sc.singular_points()
    for i, x in enumerate(sc.zeros):
        d = 0.3 * min(abs(x - s) for s in sing if abs(x - s) > 1e-14)
        loop = [x + d * cmath.exp(2j * math.pi * k / 16) for k in range(16)]
        if sc.branch_flip(loop) != -1:
            raise InconsistentSheets(f"zero {i} is not a branch point of the tracked root")
    for j, p in enumerate(sc.poles):
        d = 0.3 * min(abs(p - s) for s in sing if abs(p - s) > 1e-14)
        loop = [p + d * cmath.exp(2j * math.pi * k / 16) for k in range(16)]
        if sc.branch_flip(loop) != +1:
            raise InconsistentSheets(f"pole {j} acts as a branch point of the tracked root")


# ---------------------------------------------------------------------------
# Whitehead flips (combinatorial; the cut arc is reused, any arc joining the
# two marked zeros inside the quadrilateral is isotopic to the slid cut)


def whitehead_flip(sc: StokesComplex, edge_id: int) -> StokesComplex:
    """Flip the diagonal of the quadrilateral formed by the two faces at edge_id."""
    e = sc.edges[edge_id]
    t1 = next(t for t in sc.triangles if t.zero == e.zeros[0])
    t2 = next(t for t in sc.triangles if t.zero == e.zeros[1])
    if edge_id not in t1.edges_ccw or edge_id not in t2.edges_ccw:
        raise WkbSpecError("edge record inconsistent with triangle records")
    if t1 is t2:
        raise UnflippableEdge("edge has only one adjacent face")

    def rotate(tri):
        k = tri.edges_ccw.index(edge_id)
        return (tri.edges_ccw[k:] + tri.edges_ccw[:k], tri.poles_ccw[k:] + tri.poles_ccw[:k])

    ec1, pc1 = rotate(t1)   # (e, f, g), (A, B, C): e runs A -> B in t1
    ec2, pc2 = rotate(t2)   # (e, h, i), (B, A, D): e runs B -> A in t2
    A, B, C = pc1
    B2, A2, D = pc2
    if (A2, B2) != (A, B):
        raise WkbSpecError("edge endpoints disagree between its two faces")
    if C == D:
        raise UnflippableEdge("flip would create a loop edge (both faces share the apex pole)")
    f, g = ec1[1], ec1[2]
    h, i = ec2[1], ec2[2]

    edges = [
        EdgeRecord(o.id, o.poles, o.zeros, dict(o.zero_slots), list(o.polyline), list(o.cut), o.face_walk)
        for o in sc.edges
    ]
    ne = edges[edge_id]
    ne.poles = (C, D)
    ne.polyline = []

    x1, x2 = e.zeros
    triangles = []
    for t in sc.triangles:
        if t.zero == x1:
            triangles.append(TriangleRecord(zero=x1, poles_ccw=(C, A, D), edges_ccw=(g, h, edge_id)))
        elif t.zero == x2:
            triangles.append(TriangleRecord(zero=x2, poles_ccw=(D, B, C), edges_ccw=(i, f, edge_id)))
        else:
            triangles.append(t)

    pole_edge_ccw = [list(o) for o in sc.pole_edge_ccw]
    cilium_index = list(sc.cilium_index)
    for j in (A, B):
        cil = pole_edge_ccw[j][cilium_index[j]]
        order = [eid for eid in pole_edge_ccw[j] if eid != edge_id]
        pole_edge_ccw[j] = order
        cilium_index[j] = order.index(cil) if cil in order else 0
    for j, before in ((C, g), (D, h)):
        cil = pole_edge_ccw[j][cilium_index[j]]
        order = list(pole_edge_ccw[j])
        k = order.index(before) if before in order else len(order) - 1
        order.insert(k + 1, edge_id)
        pole_edge_ccw[j] = order
        cilium_index[j] = order.index(cil)

    return StokesComplex(
        sc.qd, sc.trajectories, triangles, edges, pole_edge_ccw, cilium_index,
        list(sc.anchors), list(sc.anchor_ws), list(sc.capture_radii), geometric=False,
    )
