"""Geometry of the slice-parameter strip (0, 1) x R.

Admissible lines, polyline paths, rectangular regions with excluded disks
around singular pairs, numeric singular-pair detection by gap scanning, and
construction of generator loops with verified winding numbers.
"""
from __future__ import annotations

import csv
import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bifiltration import ParamPoint, SimplicialBifiltration
from .persistence import DIAGONAL, diagram_at
from .diagram_metric import point_distance


@dataclass(frozen=True)
class AdmissibleLine:
    """The positive-slope value-plane line named by a parameter pair.

    Parameterized as (u, v) = t * (a, 1-a) + (b, -b); the normalized
    coordinate of a point on the line is min(a, 1-a) * t.
    """

    param: ParamPoint

    @property
    def direction(self) -> tuple[float, float]:
        return (self.param.a, 1.0 - self.param.a)

    @property
    def basepoint(self) -> tuple[float, float]:
        return (self.param.b, -self.param.b)

    def point_at(self, t: float) -> tuple[float, float]:
        return self.param.line_point(t)

    def t_of_x(self, x: float) -> float:
        """Line parameter of the point with first coordinate ``x``."""
        return (x - self.param.b) / self.param.a

    def w_of_x(self, x: float) -> float:
        """Normalized coordinate of the line point with first coordinate x.

        This is the value a diagram coordinate takes when the underlying
        event happens at that point of the value plane.
        """
        return min(self.param.a, 1.0 - self.param.a) * self.t_of_x(x)

    def side_of(self, x: float, y: float) -> float:
        """Signed offset of (x, y) from the line (positive above)."""
        a = self.param.a
        return (y + self.param.b) * a - (x - self.param.b) * (1.0 - a)


@dataclass(frozen=True)
class ParamPath:
    """Polyline in the parameter strip, parameterized by arc fraction."""

    waypoints: tuple[ParamPoint, ...]

    def __post_init__(self):
        pts = tuple(self.waypoints)
        if len(pts) < 1:
            raise ValueError("a path needs at least one waypoint")
        object.__setattr__(self, "waypoints", pts)

    @property
    def start(self) -> ParamPoint:
        return self.waypoints[0]

    @property
    def end(self) -> ParamPoint:
        return self.waypoints[-1]

    @property
    def is_loop(self) -> bool:
        return (self.start.a == self.end.a) and (self.start.b == self.end.b)

    def length(self) -> float:
        return sum(math.hypot(q.a - p.a, q.b - p.b)
                   for p, q in zip(self.waypoints, self.waypoints[1:]))

    def point_at(self, s: float) -> ParamPoint:
        """Point at arc fraction ``s`` in [0, 1]."""
        if not 0.0 <= s <= 1.0:
            raise ValueError("arc fraction must lie in [0, 1]")
        # endpoints are exact so chained paths meet without float drift
        if s == 0.0:
            return self.start
        if s == 1.0:
            return self.end
        total = self.length()
        if total == 0.0:
            return self.start
        target = s * total
        run = 0.0
        for p, q in zip(self.waypoints, self.waypoints[1:]):
            seg = math.hypot(q.a - p.a, q.b - p.b)
            if run + seg >= target or seg == 0.0:
                f = 0.0 if seg == 0.0 else (target - run) / seg
                return ParamPoint(p.a + f * (q.a - p.a), p.b + f * (q.b - p.b))
            run += seg
        return self.end

    def reverse(self) -> "ParamPath":
        return ParamPath(tuple(reversed(self.waypoints)))

    def then(self, other: "ParamPath") -> "ParamPath":
        """Concatenation; the junction waypoints must coincide."""
        if (self.end.a, self.end.b) != (other.start.a, other.start.b):
            raise ValueError("paths do not join")
        return ParamPath(self.waypoints + other.waypoints[1:])


def segment_path(p: ParamPoint, q: ParamPoint) -> ParamPath:
    return ParamPath((p, q))


def winding_number(path: ParamPath, center: ParamPoint) -> int:
    """Winding number of a closed polyline around a point."""
    if not path.is_loop:
        raise ValueError("winding number needs a closed path")
    total = 0.0
    for p, q in zip(path.waypoints, path.waypoints[1:]):
        a0 = math.atan2(p.b - center.b, p.a - center.a)
        a1 = math.atan2(q.b - center.b, q.a - center.a)
        da = a1 - a0
        while da > math.pi:
            da -= 2.0 * math.pi
        while da < -math.pi:
            da += 2.0 * math.pi
        total += da
    return int(round(total / (2.0 * math.pi)))


@dataclass(frozen=True)
class ParameterRegion:
    """Axis-aligned rectangle minus closed disks, with separation constant.

    The rectangle lives inside the open strip; the excluded disks must be
    pairwise disjoint and stay clear of the rectangle boundary, so each
    generator loop can enclose exactly one of them.
    """

    a_range: tuple[float, float]
    b_range: tuple[float, float]
    excluded: tuple[tuple[ParamPoint, float], ...] = ()
    separation: float = 0.0

    def __post_init__(self):
        a0, a1 = self.a_range
        b0, b1 = self.b_range
        if not (0.0 < a0 <= a1 < 1.0):
            raise ValueError("a-range must lie inside (0, 1)")
        if not (b0 <= b1 and math.isfinite(b0) and math.isfinite(b1)):
            raise ValueError("b-range must be a finite interval")
        if self.separation < 0.0:
            raise ValueError("separation must be nonnegative")
        excl = tuple((c, float(r)) for c, r in self.excluded)
        object.__setattr__(self, "excluded", excl)
        for c, r in excl:
            if r <= 0.0:
                raise ValueError("disk radius must be positive")
            if (c.a - r <= a0 or c.a + r >= a1
                    or c.b - r <= b0 or c.b + r >= b1):
                raise ValueError(
                    f"disk at ({c.a}, {c.b}) r={r} touches the rectangle "
                    "boundary")
        for i, (ci, ri) in enumerate(excl):
            for cj, rj in excl[i + 1:]:
                if math.hypot(ci.a - cj.a, ci.b - cj.b) <= ri + rj:
                    raise ValueError("excluded disks overlap")

    def contains(self, p: ParamPoint) -> bool:
        a0, a1 = self.a_range
        b0, b1 = self.b_range
        if not (a0 <= p.a <= a1 and b0 <= p.b <= b1):
            return False
        return all(math.hypot(p.a - c.a, p.b - c.b) > r
                   for c, r in self.excluded)

    def contains_path(self, path: ParamPath, samples_per_segment: int = 32
                      ) -> bool:
        for p, q in zip(path.waypoints, path.waypoints[1:]):
            for k in range(samples_per_segment + 1):
                f = k / samples_per_segment
                if not self.contains(ParamPoint(p.a + f * (q.a - p.a),
                                                p.b + f * (q.b - p.b))):
                    return False
        return len(path.waypoints) != 1 or self.contains(path.start)


def contains(region: ParameterRegion, p: ParamPoint) -> bool:
    """True iff ``p`` is in the rectangle and outside every excluded disk."""
    return region.contains(p)


@dataclass(frozen=True)
class SingularPairReport:
    """A refined location where the diagram gap collapses."""

    location: ParamPoint
    degree: int
    min_gap_at_location: float
    refinement_radius: float


def min_diagram_gap(bif: SimplicialBifiltration, p: ParamPoint,
                    degree: int) -> float:
    """Smallest extended distance among distinct diagram points at ``p``,
    including each point's distance to the diagonal; infinity when the
    diagram has at most one point and nothing near the diagonal."""
    diagram = diagram_at(bif, p, degree)
    pts = diagram.points
    best = math.inf
    for i, x in enumerate(pts):
        dd = point_distance(x, DIAGONAL)
        if dd < best:
            best = dd
        for y in pts[i + 1:]:
            d = point_distance(x, y)
            if d < best:
                best = d
    return best


def _gap_grid(bif, degree, a_vals, b_vals):
    gaps = np.empty((len(a_vals), len(b_vals)))
    for i, a in enumerate(a_vals):
        for j, b in enumerate(b_vals):
            gaps[i, j] = min_diagram_gap(bif, ParamPoint(float(a), float(b)),
                                         degree)
    return gaps


def _closest_pair(diagram):
    """The two distinct diagram points at smallest extended distance."""
    best = math.inf
    pair = None
    pts = diagram.points
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            d = point_distance(x, y)
            if d < best:
                best = d
                pair = (x, y)
    return best, pair


def _collision_residual(bif, degree, p, ref_x, ref_y):
    """Coordinate differences of the two diagram points at ``p`` that
    continue the reference pair; None when the pair cannot be followed."""
    pts = diagram_at(bif, p, degree).points
    best = None
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            if i == j:
                continue
            c = max(point_distance(x, ref_x), point_distance(y, ref_y))
            if best is None or c < best[0]:
                best = (c, x, y)
    if best is None or not math.isfinite(best[0]):
        return None
    _, x, y = best
    s1 = x.u - y.u
    if x.is_proper and y.is_proper:
        s2 = x.v - y.v
    elif not x.is_proper and not y.is_proper:
        s2 = 0.0
    else:
        return None
    return np.array([s1, s2])


def _refine_collision(bif, degree, seed: ParamPoint, ref_pair, bounds,
                      spacing: float, refine_tol: float):
    """Newton iteration driving the tracked pair's coordinate differences
    to zero; returns (location, radius)."""
    lo_a, hi_a, lo_b, hi_b = bounds
    p = np.array([seed.a, seed.b])
    ref_x, ref_y = ref_pair

    def residual(q):
        return _collision_residual(
            bif, degree, ParamPoint(float(q[0]), float(q[1])), ref_x, ref_y)

    h = max(0.35 * spacing, 2.0 * refine_tol)
    step_norm = spacing
    jac = None
    for it in range(30):
        s = residual(p)
        if s is None:
            return ParamPoint(float(p[0]), float(p[1])), step_norm
        if jac is None or it % 4 == 0:
            jac = np.empty((2, 2))
            for k in range(2):
                dq = np.zeros(2)
                dq[k] = h
                sp = residual(p + dq)
                sm = residual(p - dq)
                if sp is None or sm is None:
                    return ParamPoint(float(p[0]), float(p[1])), step_norm
                jac[:, k] = (sp - sm) / (2.0 * h)
        delta = -np.linalg.lstsq(jac, s, rcond=None)[0]
        norm = float(np.hypot(delta[0], delta[1]))
        if norm > spacing:
            delta *= spacing / norm
            norm = spacing
        p = p + delta
        p[0] = min(max(p[0], lo_a), hi_a)
        p[1] = min(max(p[1], lo_b), hi_b)
        step_norm = norm
        if norm < refine_tol:
            break
        if norm < 2.0 * h:
            h = max(0.5 * h, 0.5 * refine_tol)
    return ParamPoint(float(p[0]), float(p[1])), max(step_norm, 0.0)


def detect_singular_pairs(bif: SimplicialBifiltration, degree: int,
                          scan_rect: tuple[float, float, float, float],
                          grid_n: int = 24, refine_tol: float = 5e-3,
                          threshold_fraction: float = 0.1
                          ) -> list[SingularPairReport]:
    """Numerically locate candidate singular pairs inside ``scan_rect``.

    Scans the min diagram gap on a grid, flags connected clusters of cells
    whose gap falls below ``threshold_fraction`` of the median, and refines
    each cluster seed with nested 5x5 grids until the search radius drops
    below ``refine_tol``.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    a0, a1, b0, b1 = scan_rect
    a_vals = np.linspace(a0, a1, grid_n)
    b_vals = np.linspace(b0, b1, grid_n)
    gaps = _gap_grid(bif, degree, a_vals, b_vals)
    finite = gaps[np.isfinite(gaps)]
    if finite.size == 0:
        return []
    threshold = threshold_fraction * float(np.median(finite))
    flagged = gaps < threshold
    if not flagged.any():
        return []

    # cluster flagged cells (8-connectivity) and seed one refine per cluster
    seeds = []
    seen = np.zeros_like(flagged)
    for i in range(grid_n):
        for j in range(grid_n):
            if flagged[i, j] and not seen[i, j]:
                stack = [(i, j)]
                seen[i, j] = True
                cells = []
                while stack:
                    ci, cj = stack.pop()
                    cells.append((ci, cj))
                    for di in (-1, 0, 1):
                        for dj in (-1, 0, 1):
                            ni, nj = ci + di, cj + dj
                            if (0 <= ni < grid_n and 0 <= nj < grid_n
                                    and flagged[ni, nj] and not seen[ni, nj]):
                                seen[ni, nj] = True
                                stack.append((ni, nj))
                best = min(cells, key=lambda c: gaps[c])
                seeds.append(best)

    spacing_a = (a1 - a0) / (grid_n - 1) if grid_n > 1 else (a1 - a0)
    spacing_b = (b1 - b0) / (grid_n - 1) if grid_n > 1 else (b1 - b0)
    spacing = max(spacing_a, spacing_b)
    lo_a = max(1e-6, a0 - spacing_a)
    hi_a = min(1.0 - 1e-6, a1 + spacing_a)
    bounds = (lo_a, hi_a, b0 - spacing_b, b1 + spacing_b)
    reports = []
    for si, sj in seeds:
        seed = ParamPoint(float(a_vals[si]), float(b_vals[sj]))
        pair_dist, pair = _closest_pair(diagram_at(bif, seed, degree))
        # only a pair of diagram points collapsing onto each other marks a
        # singular pair; a lone point approaching the diagonal does not
        if pair is None or not pair_dist < threshold:
            continue
        loc, radius = _refine_collision(bif, degree, seed, pair, bounds,
                                        spacing, refine_tol)
        final_dist, _ = _closest_pair(diagram_at(bif, loc, degree))
        if not final_dist < threshold:
            continue
        reports.append(SingularPairReport(
            loc, degree, min_diagram_gap(bif, loc, degree), radius))
    # merge refined centers that collapsed onto the same location
    merged: list[SingularPairReport] = []
    for rep in sorted(reports, key=lambda r: r.min_gap_at_location):
        if all(math.hypot(rep.location.a - m.location.a,
                          rep.location.b - m.location.b)
               > max(4.0 * refine_tol, 0.5 * spacing) for m in merged):
            merged.append(rep)
    return merged


def suggest_separation(bif: SimplicialBifiltration, region: ParameterRegion,
                       degree: int, grid_n: int = 9) -> float:
    """Quarter of the smallest diagram gap sampled over the region.

    The strict separation needed for unique transport asks every gap to
    exceed twice the constant; a quarter leaves a factor-two margin.  Falls
    back to a quarter of the diagram value spread when every sampled gap is
    infinite.
    """
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    best = math.inf
    spread = 1.0
    for a in np.linspace(a0, a1, grid_n):
        for b in np.linspace(b0, b1, grid_n):
            p = ParamPoint(float(a), float(b))
            if not region.contains(p):
                continue
            best = min(best, min_diagram_gap(bif, p, degree))
            diagram = diagram_at(bif, p, degree)
            if diagram.points:
                us = [pt.u for pt in diagram.points]
                spread = max(spread, max(us) - min(us))
    if not math.isfinite(best):
        return spread / 4.0
    return best / 4.0


# ---------------------------------------------------------------------------
# Generator loops
# ---------------------------------------------------------------------------

def _segment_clear(p: tuple[float, float], q: tuple[float, float],
                   disks, margin: float) -> bool:
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    denom = dx * dx + dy * dy
    for c, r in disks:
        if denom == 0.0:
            dist = math.hypot(px - c.a, py - c.b)
        else:
            t = ((c.a - px) * dx + (c.b - py) * dy) / denom
            t = min(1.0, max(0.0, t))
            dist = math.hypot(px + t * dx - c.a, py + t * dy - c.b)
        if dist <= r + margin:
            return False
    return True


def path_avoiding_disks(start: ParamPoint, end: ParamPoint,
                        disks: Sequence[tuple[ParamPoint, float]],
                        margin: float) -> ParamPath:
    """Shortest polyline from start to end keeping ``margin`` clear of the
    disks, via a small visibility graph around the obstacles."""
    nodes = [(start.a, start.b), (end.a, end.b)]
    ring = 1.45 * margin  # node radius: clear of disk+margin but nearby
    for c, r in disks:
        # enough nodes that chords between neighbors stay clear of the disk
        ratio = (r + margin) / (r + ring)
        count = max(12, math.ceil(math.pi / math.acos(ratio)) + 1)
        for k in range(count):
            ang = 2.0 * math.pi * k / count
            nodes.append((c.a + (r + ring) * math.cos(ang),
                          c.b + (r + ring) * math.sin(ang)))
    n = len(nodes)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if _segment_clear(nodes[i], nodes[j], disks, margin):
                w = math.hypot(nodes[i][0] - nodes[j][0],
                               nodes[i][1] - nodes[j][1])
                adj[i].append((j, w))
                adj[j].append((i, w))
    dist = [math.inf] * n
    prev = [-1] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, i = heapq.heappop(heap)
        if d > dist[i]:
            continue
        if i == 1:
            break
        for j, w in adj[i]:
            nd = d + w
            if nd < dist[j]:
                dist[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))
    if not math.isfinite(dist[1]):
        raise ValueError("no disk-avoiding path exists at this margin")
    chain = []
    i = 1
    while i != -1:
        chain.append(nodes[i])
        i = prev[i]
    chain.reverse()
    return ParamPath(tuple(ParamPoint(x, y) for x, y in chain))


def generator_loops(region: ParameterRegion,
                    basepoint: ParamPoint) -> list[ParamPath]:
    """One loop per excluded disk: out from the basepoint, once (counter-
    clockwise) around a rectangle enclosing exactly that disk, and back the
    same way.  Winding numbers are 1 around the enclosed disk and 0 around
    every other."""
    if not region.contains(basepoint):
        raise ValueError("basepoint must lie inside the region")
    loops = []
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    for idx, (c, r) in enumerate(region.excluded):
        others = [d for k, d in enumerate(region.excluded) if k != idx]
        clearance = min(
            [c.a - r - a0, a1 - c.a - r, c.b - r - b0, b1 - c.b - r]
            + [math.hypot(c.a - o.a, c.b - o.b) - r - orr
               for o, orr in others])
        if clearance <= 0.0:
            raise ValueError("disks too crowded for generator loops")
        pad = min(0.45 * clearance, r)
        box = [ParamPoint(c.a - r - pad, c.b - r - pad),
               ParamPoint(c.a + r + pad, c.b - r - pad),
               ParamPoint(c.a + r + pad, c.b + r + pad),
               ParamPoint(c.a - r - pad, c.b + r + pad)]
        margin = min(0.4 * pad,
                     *(0.4 * (math.hypot(o.a - basepoint.a,
                                         o.b - basepoint.b) - orr)
                       for o, orr in region.excluded)) if region.excluded \
            else 0.4 * pad
        if margin <= 0.0:
            raise ValueError("basepoint too close to an excluded disk")
        approach = path_avoiding_disks(basepoint, box[0],
                                       region.excluded, margin)
        circuit = ParamPath((box[0], box[1], box[2], box[3], box[0]))
        loop = approach.then(circuit).then(approach.reverse())
        if not region.contains_path(loop):
            raise ValueError("generator loop left the region; "
                             "disks too crowded")
        assert winding_number(loop, c) == 1
        for o, _ in others:
            assert winding_number(loop, o) == 0
        loops.append(loop)
    return loops


# ---------------------------------------------------------------------------
# Region / report interchange
# ---------------------------------------------------------------------------

def region_to_dict(region: ParameterRegion) -> dict:
    return {"rect": [region.a_range[0], region.a_range[1],
                     region.b_range[0], region.b_range[1]],
            "disks": [[c.a, c.b, r] for c, r in region.excluded],
            "c": region.separation}


def save_region(region: ParameterRegion, path) -> None:
    with open(path, "w") as fh:
        json.dump(region_to_dict(region), fh, sort_keys=True)
        fh.write("\n")


def region_from_dict(data: dict) -> ParameterRegion:
    a0, a1, b0, b1 = data["rect"]
    disks = tuple((ParamPoint(a, b), float(r))
                  for a, b, r in data.get("disks", []))
    return ParameterRegion((float(a0), float(a1)), (float(b0), float(b1)),
                           disks, float(data.get("c", 0.0)))


def load_region(path) -> ParameterRegion:
    with open(path) as fh:
        return region_from_dict(json.load(fh))


def save_reports(reports: Sequence[SingularPairReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "degree", "gap"])
        for rep in reports:
            writer.writerow([repr(rep.location.a), repr(rep.location.b),
                             rep.degree, repr(rep.min_gap_at_location)])
