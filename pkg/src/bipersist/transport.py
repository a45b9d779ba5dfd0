"""Transport of diagram points and matchings along parameter paths.

A path of regular parameter pairs induces a unique continuous motion of
each diagram point.  The sweep below follows all points of a diagram at
once with adaptive steps: a trial step is accepted only when the diagrams
before and after are close (bottleneck gate), every tracked point has an
unambiguous nearest continuation (two-sided test), and no two tracked
points collide on the same target.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .bifiltration import ParamPoint, SimplicialBifiltration
from .diagram_metric import (Matching, bottleneck_distance, compose_matchings,
                             identity_matching, point_distance)
from .parameter_space import ParamPath
from .persistence import DIAGONAL, DiagramPoint, diagram_at

START_MATCH_TOLERANCE = 1e-9


class SingularityEncountered(RuntimeError):
    """Continuation became ambiguous even at the minimum step size."""


class RegionViolation(RuntimeError):
    """A tracked point moved too close to the diagonal for the separation
    constant, so the region does not keep the required margins."""


class TransportConsistencyError(RuntimeError):
    """Transporting a whole diagram failed to produce a bijection."""


@dataclass(frozen=True)
class TransportConfig:
    """Step-control knobs for the transport sweep."""

    separation: float
    initial_step: float = 1.0
    min_step: float = 1e-6
    safety_factor: float = 0.45

    def __post_init__(self):
        if not (math.isfinite(self.separation) and self.separation > 0.0):
            raise ValueError("separation must be a positive real")
        if not 0.0 < self.min_step < self.initial_step <= 1.0:
            raise ValueError("need 0 < min_step < initial_step <= 1")
        if not 0.0 < self.safety_factor < 1.0:
            raise ValueError("safety_factor must lie in (0, 1)")


@dataclass(frozen=True)
class PointTrack:
    """Sampled trajectory of one tracked point along a path."""

    path: ParamPath
    samples: tuple[tuple[float, object], ...]

    def __post_init__(self):
        samples = tuple((float(s), x) for s, x in self.samples)
        if not samples:
            raise ValueError("a track needs at least one sample")
        if samples[0][0] != 0.0:
            raise ValueError("first sample must sit at arc fraction 0")
        if any(s1 >= s2 for (s1, _), (s2, _) in zip(samples, samples[1:])):
            raise ValueError("sample fractions must increase")
        object.__setattr__(self, "samples", samples)

    @property
    def start(self):
        return self.samples[0][1]

    @property
    def end(self):
        return self.samples[-1][1]

    def max_step_motion(self) -> float:
        """Largest distance between consecutive samples."""
        worst = 0.0
        for (_, x), (_, y) in zip(self.samples, self.samples[1:]):
            if x is DIAGONAL and y is DIAGONAL:
                continue
            worst = max(worst, point_distance(x, y))
        return worst


def _sup_norm(bif: SimplicialBifiltration) -> float:
    return bif._memo(("supnorm",), lambda: float(
        abs(bif.vertex_values).max()) if len(bif.vertex_values) else 0.0)


def motion_bound(bif: SimplicialBifiltration, p: ParamPoint,
                 eps: float) -> float:
    """Explicit bound on the bottleneck motion of the slice diagram when
    both parameters move by at most ``eps`` (requires eps < min(a, 1-a))."""
    a, b = p.a, p.b
    if not eps < min(a, 1.0 - a):
        return math.inf
    denom = min(a * (a - eps), (1.0 - a) * (1.0 - a - eps))
    return eps * (_sup_norm(bif) + max(a, 1.0 - a) + abs(b)) / denom


def continuity_constant(bif: SimplicialBifiltration, path: ParamPath,
                        eta: float, samples_per_segment: int = 32) -> float:
    """Largest motion-bound prefactor along the path for perturbations up
    to ``eta``; perturbing the path by delta <= min(eta, c/C) moves every
    transported point by at most delta * C."""
    worst = 0.0
    sup = _sup_norm(bif)
    for p, q in zip(path.waypoints, path.waypoints[1:]):
        for k in range(samples_per_segment + 1):
            f = k / samples_per_segment
            a = p.a + f * (q.a - p.a)
            b = p.b + f * (q.b - p.b)
            if not eta < min(a, 1.0 - a):
                return math.inf
            denom = min(a * (a - eta), (1.0 - a) * (1.0 - a - eta))
            worst = max(worst, (sup + max(a, 1.0 - a) + abs(b)) / denom)
    if len(path.waypoints) == 1:
        p = path.waypoints[0]
        denom = min(p.a * (p.a - eta), (1.0 - p.a) * (1.0 - p.a - eta))
        if denom <= 0.0:
            return math.inf
        worst = (sup + max(p.a, 1.0 - p.a) + abs(p.b)) / denom
    return worst


def _seed_step(bif, p: ParamPoint, target: float, length: float,
               cfg: TransportConfig) -> float:
    """Step fraction whose parameter motion keeps the explicit diagram
    motion bound under ``target``."""
    eps = 0.5 * min(p.a, 1.0 - p.a)
    for _ in range(60):
        if motion_bound(bif, p, eps) <= target:
            break
        eps *= 0.5
    return max(eps / length, cfg.min_step)


def _match_step(tracked, next_points, c: float, safety: float):
    """Propose continuations of all tracked points into the next diagram;
    None when any continuation is ambiguous at this separation."""
    proposed = []
    used = set()
    for x in tracked:
        if x is DIAGONAL:
            proposed.append(DIAGONAL)
            continue
        best = second = math.inf
        best_j = None
        for j, y in enumerate(next_points):
            d = point_distance(x, y)
            if d < best:
                second = best
                best = d
                best_j = j
            elif d < second:
                second = d
        if not best < safety * c:
            return None
        if not second > c:
            return None
        if best_j in used:
            return None
        used.add(best_j)
        proposed.append(next_points[best_j])
    return proposed


def _transport_sweep(bif: SimplicialBifiltration, degree: int,
                     path: ParamPath, starts, cfg: TransportConfig):
    """Advance all start points along the path; returns one sample list per
    start point."""
    c = cfg.separation
    p0 = path.point_at(0.0)
    start_diagram = diagram_at(bif, p0, degree)
    tracked = []
    for x in starts:
        if x is DIAGONAL:
            tracked.append(DIAGONAL)
            continue
        best = math.inf
        best_pt = None
        for y in start_diagram.points:
            d = point_distance(x, y)
            if d < best:
                best = d
                best_pt = y
        if best_pt is None or best > START_MATCH_TOLERANCE:
            raise ValueError(f"{x} is not a point of the start diagram")
        tracked.append(best_pt)
    for x in tracked:
        if x is not DIAGONAL and point_distance(x, DIAGONAL) < c:
            raise RegionViolation(
                "start point closer to the diagonal than the separation")
    tracks = [[(0.0, x)] for x in tracked]
    length = path.length()
    if length == 0.0:
        return tracks

    target = 0.5 * cfg.safety_factor * c
    diagram = start_diagram
    s = 0.0
    step = min(cfg.initial_step, _seed_step(bif, p0, target, length, cfg))
    while s < 1.0:
        trial = min(step, 1.0 - s)
        s_next = 1.0 if trial == 1.0 - s else s + trial
        p_next = path.point_at(s_next)
        next_diagram = diagram_at(bif, p_next, degree)
        proposed = _match_step(tracked, next_diagram.points, c,
                               cfg.safety_factor)
        gate = math.inf
        if proposed is not None:
            gate, _ = bottleneck_distance(diagram, next_diagram)
            if not gate < cfg.safety_factor * c:
                proposed = None
        if proposed is None:
            step = 0.5 * trial
            if step < cfg.min_step:
                raise SingularityEncountered(
                    f"ambiguous continuation near (a={p_next.a:.6g}, "
                    f"b={p_next.b:.6g}); step underflow")
            continue
        for x in proposed:
            if x is not DIAGONAL and point_distance(x, DIAGONAL) < c:
                raise RegionViolation(
                    f"tracked point within separation of the diagonal at "
                    f"(a={p_next.a:.6g}, b={p_next.b:.6g})")
        s = s_next
        diagram = next_diagram
        tracked = proposed
        for track, x in zip(tracks, tracked):
            track.append((s, x))
        # the explicit bound only seeds the very first guess; afterwards
        # steps track ~80% of the gate from the measured diagram motion
        limit = cfg.safety_factor * c
        if gate > 0.0 and math.isfinite(gate):
            factor = min(1.7, max(0.5, 0.8 * limit / gate))
        else:
            factor = 1.7
        step = min(max(factor * trial, cfg.min_step), 1.0)
    return tracks


def transport_point(bif: SimplicialBifiltration, degree: int,
                    path: ParamPath, point, cfg: TransportConfig):
    """Endpoint of the unique continuation of ``point`` along ``path``,
    together with its sampled track; the diagonal transports to itself."""
    tracks = _transport_sweep(bif, degree, path, [point], cfg)
    samples = tuple(tracks[0])
    track = PointTrack(path, samples)
    return track.end, track


def transport_diagram(bif: SimplicialBifiltration, degree: int,
                      path: ParamPath, cfg: TransportConfig) -> Matching:
    """Bijection from the diagram at the path start onto the diagram at the
    path end, with every point transported in one shared sweep."""
    p0 = path.point_at(0.0)
    start_diagram = diagram_at(bif, p0, degree)
    tracks = _transport_sweep(bif, degree, path, list(start_diagram.points),
                              cfg)
    end_diagram = diagram_at(bif, path.point_at(1.0), degree)
    targets = [track[-1][1] for track in tracks]
    pairs = []
    used = set()
    for i, target in enumerate(targets):
        j_found = None
        for j, y in enumerate(end_diagram.points):
            if j in used:
                continue
            if y == target:
                j_found = j
                break
        if j_found is None:
            raise TransportConsistencyError(
                "transported point is not a point of the end diagram")
        used.add(j_found)
        pairs.append((i, j_found))
    if len(used) != len(end_diagram.points):
        raise TransportConsistencyError(
            "transport did not cover the end diagram")
    return Matching(start_diagram, end_diagram, tuple(pairs), (), ())


def transport_matching(bif_f: SimplicialBifiltration,
                       bif_g: SimplicialBifiltration, degree: int,
                       path: ParamPath, sigma: Matching,
                       cfg: TransportConfig) -> Matching:
    """Push a matching at the path start to the path end on both sides:
    transport of g after sigma after the inverse transport of f."""
    table_f = transport_diagram(bif_f, degree, path, cfg)
    table_g = transport_diagram(bif_g, degree, path, cfg)
    if not (sigma.left.same_points(table_f.left)
            and sigma.right.same_points(table_g.left)):
        raise ValueError("matching does not join the two start diagrams")
    return compose_matchings(compose_matchings(table_f.inverse(), sigma),
                             table_g)


def loop_permutation(bif: SimplicialBifiltration, degree: int,
                     loop: ParamPath, cfg: TransportConfig
                     ) -> tuple[int, ...]:
    """Permutation induced on the start diagram by a closed path;
    entry i holds the index the i-th point moves to."""
    if not loop.is_loop:
        raise ValueError("loop_permutation needs a closed path")
    table = transport_diagram(bif, degree, loop, cfg)
    perm = [None] * len(table.pairs)
    for i, j in table.pairs:
        perm[i] = j
    return tuple(perm)


def save_track(track: PointTrack, path) -> None:
    """Track CSV: arc fraction with the point coordinates per sample;
    improper points carry an infinite death, diagonal samples say so."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "u", "v"])
        for s, x in track.samples:
            if x is DIAGONAL:
                writer.writerow([repr(s), "diag", "diag"])
            elif x.is_proper:
                writer.writerow([repr(s), repr(x.u), repr(x.v)])
            else:
                writer.writerow([repr(s), repr(x.u), "inf"])
