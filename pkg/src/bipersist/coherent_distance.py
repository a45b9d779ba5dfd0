"""Coherent matching distance over a region with singularities removed.

The supremum over all transport paths factors into a finite monodromy
group times a sample of path endpoints.  Endpoint transport tables are
built once by chaining short hops between neighboring endpoints — any
chained path differs from a direct one by a loop, and loops are exactly
what the group maximization already covers.  All matching costs are then
pure permutation algebra on the cached tables.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bifiltration import ParamPoint, SimplicialBifiltration
from .diagram_metric import (Matching, bottleneck_distance, compose_matchings,
                             enumerate_matchings, identity_matching,
                             matching_cost)
from .parameter_space import (ParamPath, ParameterRegion, generator_loops,
                              path_avoiding_disks)
from .persistence import diagram_at
from .transport import TransportConfig, loop_permutation, transport_diagram


# ---------------------------------------------------------------------------
# Monodromy group
# ---------------------------------------------------------------------------

def _identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def _compose_perm(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Permutation doing p first, then q."""
    return tuple(q[j] for j in p)


def _invert_perm(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


@dataclass(frozen=True)
class PairPermutationGroup:
    """Closure of the loop-induced permutation pairs at a basepoint."""

    basepoint: ParamPoint
    generators: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    elements: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def order(self) -> int:
        return len(self.elements)


def close_generators(basepoint: ParamPoint, generators, n_f: int, n_g: int
                     ) -> PairPermutationGroup:
    """Breadth-first closure of permutation pairs under composition."""
    gens = tuple((tuple(pf), tuple(pg)) for pf, pg in generators)
    cap = math.factorial(len(gens) + 1) ** 2
    seeds = list(gens) + [(_invert_perm(pf), _invert_perm(pg))
                          for pf, pg in gens]
    identity = (_identity_perm(n_f), _identity_perm(n_g))
    elements = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for ef, eg in frontier:
            for sf, sg in seeds:
                cand = (_compose_perm(ef, sf), _compose_perm(eg, sg))
                if cand not in elements:
                    elements.add(cand)
                    nxt.append(cand)
                    if len(elements) > cap:
                        raise RuntimeError(
                            "permutation closure exceeded the "
                            f"(q+1)!^2 = {cap} sanity cap")
        frontier = nxt
    ordered = tuple(sorted(elements))
    return PairPermutationGroup(basepoint, gens, ordered)


def monodromy_group(bif_f: SimplicialBifiltration,
                    bif_g: SimplicialBifiltration, degree: int,
                    region: ParameterRegion, basepoint: ParamPoint,
                    cfg: TransportConfig) -> PairPermutationGroup:
    """Loop-induced permutation pairs for every generator loop, closed
    under composition."""
    loops = generator_loops(region, basepoint)
    n_f = len(diagram_at(bif_f, basepoint, degree))
    n_g = len(diagram_at(bif_g, basepoint, degree))
    generators = []
    for loop in loops:
        pf = loop_permutation(bif_f, degree, loop, cfg)
        pg = loop_permutation(bif_g, degree, loop, cfg)
        generators.append((pf, pg))
    return close_generators(basepoint, generators, n_f, n_g)


def trivial_group(basepoint: ParamPoint, n_f: int, n_g: int
                  ) -> PairPermutationGroup:
    return PairPermutationGroup(
        basepoint, (), ((_identity_perm(n_f), _identity_perm(n_g)),))


def apply_group_element(sigma: Matching, perm_f: tuple[int, ...],
                        perm_g: tuple[int, ...]) -> Matching:
    """Conjugate a matching at the basepoint by a loop's permutation pair."""
    pairs = tuple((perm_f[i], perm_g[j]) for i, j in sigma.pairs)
    left_delta = tuple(sorted(perm_f[i] for i in sigma.left_to_delta))
    right_delta = tuple(sorted(perm_g[j] for j in sigma.right_to_delta))
    return Matching(sigma.left, sigma.right, pairs, left_delta, right_delta)


# ---------------------------------------------------------------------------
# Endpoint sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """How densely to sample path endpoints inside a region.

    The half-width line a = 1/2 and the region boundary carry the maximum
    of the transported cost, so they get dense samples; a coarse interior
    grid stays in as a falsification net.
    """

    interior_n: int = 7
    boundary_n: int = 16
    half_width_n: int = 32

    def __post_init__(self):
        if self.interior_n < 2 or self.boundary_n < 4 or self.half_width_n < 2:
            raise ValueError("sample spec too coarse")


def _disk_clearance(region: ParameterRegion, p: ParamPoint) -> float:
    if not region.excluded:
        return math.inf
    return min(math.hypot(p.a - c.a, p.b - c.b) - r
               for c, r in region.excluded)


def sample_endpoints(region: ParameterRegion, basepoint: ParamPoint,
                     spec: SampleSpec) -> list[ParamPoint]:
    """Constant path, dense a = 1/2 segment, dense boundary, coarse
    interior; deduplicated, all strictly inside the region."""
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    pts: list[ParamPoint] = [basepoint]

    def admit(a, b):
        p = ParamPoint(float(a), float(b))
        if region.contains(p) and _disk_clearance(region, p) > 1e-9:
            pts.append(p)

    if a0 <= 0.5 <= a1:
        for b in np.linspace(b0, b1, spec.half_width_n):
            admit(0.5, b)
    for t in np.linspace(0.0, 1.0, spec.boundary_n):
        admit(a0, b0 + t * (b1 - b0))
        admit(a1, b0 + t * (b1 - b0))
        admit(a0 + t * (a1 - a0), b0)
        admit(a0 + t * (a1 - a0), b1)
    for c, r in region.excluded:
        ring = r + max(0.05 * r, 0.01)
        for k in range(spec.boundary_n):
            ang = 2.0 * math.pi * k / spec.boundary_n
            admit(c.a + ring * math.cos(ang), c.b + ring * math.sin(ang))
    for a in np.linspace(a0, a1, spec.interior_n):
        for b in np.linspace(b0, b1, spec.interior_n):
            admit(a, b)

    seen = set()
    unique = []
    for p in pts:
        key = (round(p.a, 12), round(p.b, 12))
        if key not in seen:
            seen.add(key)
            unique.append(p)
    return unique


def _serpentine_order(points: Sequence[ParamPoint], start: ParamPoint
                      ) -> list[int]:
    """Visit order with short hops: sweep by a-bins, alternating b
    direction, beginning near the start point."""
    idx = list(range(len(points)))
    if not idx:
        return idx
    a_vals = sorted(p.a for p in points)
    nbins = max(1, int(math.isqrt(len(points))))
    lo, hi = a_vals[0], a_vals[-1]
    width = (hi - lo) or 1.0

    def bin_of(p):
        return min(nbins - 1, int((p.a - lo) / width * nbins))

    order = []
    for k in range(nbins):
        members = [i for i in idx if bin_of(points[i]) == k]
        members.sort(key=lambda i: points[i].b, reverse=(k % 2 == 1))
        order.extend(members)
    best = min(range(len(order)),
               key=lambda r: math.hypot(points[order[r]].a - start.a,
                                        points[order[r]].b - start.b))
    return order[best:] + order[:best]


def _hop_margin(region: ParameterRegion, p: ParamPoint, q: ParamPoint
                ) -> float:
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    slack = [math.inf]
    for c, r in region.excluded:
        slack.append(_disk_clearance(region, p))
        slack.append(_disk_clearance(region, q))
        slack.append(min(c.a - r - a0, a1 - c.a - r,
                         c.b - r - b0, b1 - c.b - r))
    for i, (ci, ri) in enumerate(region.excluded):
        for cj, rj in region.excluded[i + 1:]:
            slack.append(0.5 * (math.hypot(ci.a - cj.a, ci.b - cj.b)
                                - ri - rj))
    m = 0.45 * min(slack)
    return m if math.isfinite(m) else 1.0


def _endpoint_tables(bif_f, bif_g, degree, region, basepoint, endpoints,
                     cfg: TransportConfig):
    """Transport tables from the basepoint diagram to every endpoint,
    chained hop by hop through the serpentine order."""
    order = _serpentine_order(endpoints, basepoint)
    diagram_f = diagram_at(bif_f, basepoint, degree)
    diagram_g = diagram_at(bif_g, basepoint, degree)
    tables: dict[int, tuple[Matching, Matching]] = {}
    cur = basepoint
    cur_f = identity_matching(diagram_f)
    cur_g = identity_matching(diagram_g)
    for i in order:
        nxt = endpoints[i]
        if (nxt.a, nxt.b) != (cur.a, cur.b):
            hop = path_avoiding_disks(cur, nxt, region.excluded,
                                      _hop_margin(region, cur, nxt))
            cur_f = compose_matchings(
                cur_f, transport_diagram(bif_f, degree, hop, cfg))
            cur_g = compose_matchings(
                cur_g, transport_diagram(bif_g, degree, hop, cfg))
            cur = nxt
        tables[i] = (cur_f, cur_g)
    return tables


# ---------------------------------------------------------------------------
# Coherent cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoherentCostReport:
    """Sampled supremum of a transported matching's cost."""

    sigma: Matching
    value: float
    witness_group_index: int
    witness_endpoint: ParamPoint
    tolerance: float

    def __post_init__(self):
        base = matching_cost(self.sigma).value
        if math.isfinite(self.value) and self.value < base - 1e-12:
            raise ValueError("coherent cost below the basepoint cost")


def _transported_cost(table_f: Matching, table_g: Matching,
                      moved_sigma: Matching) -> float:
    pushed = compose_matchings(
        compose_matchings(table_f.inverse(), moved_sigma), table_g)
    return matching_cost(pushed).value


class _CostEvaluator:
    """Shared endpoint tables for all coherent computations on a region."""

    def __init__(self, bif_f, bif_g, degree, region, basepoint, group,
                 spec: SampleSpec, cfg: TransportConfig):
        self.bif_f, self.bif_g = bif_f, bif_g
        self.degree = degree
        self.region = region
        self.basepoint = basepoint
        self.group = group
        self.cfg = cfg
        self.endpoints = sample_endpoints(region, basepoint, spec)
        self.tables = _endpoint_tables(bif_f, bif_g, degree, region,
                                       basepoint, self.endpoints, cfg)
        self.diagram_f = diagram_at(bif_f, basepoint, degree)
        self.diagram_g = diagram_at(bif_g, basepoint, degree)
        self._neighbor_pairs = self._neighbors()

    def _neighbors(self):
        n = len(self.endpoints)
        if n <= 1:
            return []
        hops = [math.hypot(self.endpoints[i].a - self.endpoints[i + 1].a,
                           self.endpoints[i].b - self.endpoints[i + 1].b)
                for i in range(n - 1)]
        med = sorted(hops)[len(hops) // 2]
        cut = 2.0 * med if med > 0 else math.inf
        return [(i, i + 1) for i in range(n - 1) if hops[i] <= cut]

    def cost_report(self, sigma: Matching) -> CoherentCostReport:
        best = -math.inf
        witness = (0, self.basepoint)
        values = {}
        for gi, (pf, pg) in enumerate(self.group.elements):
            moved = apply_group_element(sigma, pf, pg)
            for ei, endpoint in enumerate(self.endpoints):
                tf, tg = self.tables[ei]
                value = _transported_cost(tf, tg, moved)
                values[(gi, ei)] = value
                if value > best:
                    best = value
                    witness = (gi, endpoint)
        tol = self._sampling_tolerance(values)
        return CoherentCostReport(sigma, best, witness[0], witness[1], tol)

    def endpoint_costs(self, sigma: Matching) -> list[tuple[ParamPoint, float]]:
        """Per-endpoint transported cost, maxed over the group elements."""
        moved = [apply_group_element(sigma, pf, pg)
                 for pf, pg in self.group.elements]
        out = []
        for ei, endpoint in enumerate(self.endpoints):
            tf, tg = self.tables[ei]
            out.append((endpoint,
                        max(_transported_cost(tf, tg, m) for m in moved)))
        return out

    def _sampling_tolerance(self, values: dict) -> float:
        """Measured cost variation between neighboring endpoints, maximized
        over group elements — a Lipschitz-style sampling bound."""
        worst = 0.0
        for gi in range(len(self.group.elements)):
            for i, j in self._neighbor_pairs:
                vi, vj = values.get((gi, i)), values.get((gi, j))
                if vi is None or vj is None:
                    continue
                if math.isfinite(vi) and math.isfinite(vj):
                    worst = max(worst, abs(vi - vj))
        return worst


def coherent_cost(bif_f, bif_g, degree, region: ParameterRegion,
                  basepoint: ParamPoint, sigma: Matching,
                  group: PairPermutationGroup, spec: SampleSpec,
                  cfg: TransportConfig) -> CoherentCostReport:
    """Max over group elements and sampled endpoints of the transported
    matching's cost; the constant path (basepoint itself) is always in
    the sample."""
    ev = _CostEvaluator(bif_f, bif_g, degree, region, basepoint, group,
                        spec, cfg)
    return ev.cost_report(sigma)


# ---------------------------------------------------------------------------
# Coherent matching distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoherentDistanceReport:
    """Min over basepoint matchings of the coherent cost."""

    value: float
    witness: Optional[CoherentCostReport]
    tolerance: float

    def as_dict(self) -> dict:
        data = {"value": self.value if math.isfinite(self.value) else "inf",
                "tolerance": self.tolerance}
        if self.witness is not None:
            data["witness"] = {
                "a": self.witness.witness_endpoint.a,
                "b": self.witness.witness_endpoint.b,
                "group_index": self.witness.witness_group_index,
            }
        return data


def coherent_distance_report(bif_f, bif_g, degree,
                             region: ParameterRegion,
                             basepoint: ParamPoint, spec: SampleSpec,
                             cfg: TransportConfig,
                             enumeration_cap: int = 12,
                             group: Optional[PairPermutationGroup] = None
                             ) -> CoherentDistanceReport:
    diagram_f = diagram_at(bif_f, basepoint, degree)
    diagram_g = diagram_at(bif_g, basepoint, degree)
    if len(diagram_f.impropers()) != len(diagram_g.impropers()):
        return CoherentDistanceReport(math.inf, None, 0.0)
    if group is None:
        group = monodromy_group(bif_f, bif_g, degree, region, basepoint, cfg)
    ev = _CostEvaluator(bif_f, bif_g, degree, region, basepoint, group,
                        spec, cfg)
    best: Optional[CoherentCostReport] = None
    for sigma in enumerate_matchings(diagram_f, diagram_g,
                                     cap=enumeration_cap):
        report = ev.cost_report(sigma)
        if best is None or report.value < best.value:
            best = report
    assert best is not None
    return CoherentDistanceReport(best.value, best, best.tolerance)


def coherent_matching_distance(bif_f, bif_g, degree,
                               region: ParameterRegion,
                               basepoint: ParamPoint, spec: SampleSpec,
                               cfg: TransportConfig,
                               enumeration_cap: int = 12) -> float:
    """Min over basepoint matchings of the coherent cost; infinite exactly
    when the improper point counts differ."""
    return coherent_distance_report(bif_f, bif_g, degree, region, basepoint,
                                    spec, cfg, enumeration_cap).value


# ---------------------------------------------------------------------------
# Classical matching distance
# ---------------------------------------------------------------------------

def dmatch(bif_f, bif_g, degree: int,
           sample_rect: tuple[float, float, float, float],
           grid_n: int) -> tuple[float, list[tuple[float, float, float]]]:
    """Sup over a parameter grid of the bottleneck distance between the
    slice diagrams, with the full (a, b) -> value table."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    a0, a1, b0, b1 = sample_rect
    table = []
    worst = 0.0
    for a in np.linspace(a0, a1, grid_n):
        for b in np.linspace(b0, b1, grid_n):
            p = ParamPoint(float(a), float(b))
            df = diagram_at(bif_f, p, degree)
            dg = diagram_at(bif_g, p, degree)
            value, _ = bottleneck_distance(df, dg)
            table.append((p.a, p.b, value))
            worst = max(worst, value)
    return worst, table


def save_heatmap(table: Sequence[tuple[float, float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "value"])
        for a, b, value in table:
            writer.writerow([repr(a), repr(b),
                             "inf" if math.isinf(value) else repr(value)])


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def basepoint_independence_check(bif_f, bif_g, degree,
                                 region: ParameterRegion,
                                 basepoints: Sequence[ParamPoint],
                                 spec: SampleSpec,
                                 cfg: TransportConfig) -> bool:
    """Coherent distance recomputed from several basepoints agrees within
    the reported sampling tolerances."""
    if len(basepoints) < 2:
        raise ValueError("need at least two basepoints")
    reports = [coherent_distance_report(bif_f, bif_g, degree, region, bp,
                                        spec, cfg) for bp in basepoints]
    vals = [r.value for r in reports]
    if all(math.isinf(v) for v in vals):
        return True
    if any(math.isinf(v) for v in vals):
        return False
    tol = max(r.tolerance for r in reports) + 1e-9
    return max(vals) - min(vals) <= 2.0 * tol


@dataclass(frozen=True)
class PseudoMetricReport:
    d_fg: float
    d_gf: float
    d_gh: float
    d_fh: float
    tolerance: float
    symmetry_exact: bool
    triangle_ok: bool


def pseudo_metric_check(bif_f, bif_g, bif_h, degree,
                        region: ParameterRegion, basepoint: ParamPoint,
                        spec: SampleSpec, cfg: TransportConfig
                        ) -> PseudoMetricReport:
    """Symmetry (exact) and triangle inequality (within twice the sampling
    tolerance) on one function triple."""
    r_fg = coherent_distance_report(bif_f, bif_g, degree, region, basepoint,
                                    spec, cfg)
    r_gf = coherent_distance_report(bif_g, bif_f, degree, region, basepoint,
                                    spec, cfg)
    r_gh = coherent_distance_report(bif_g, bif_h, degree, region, basepoint,
                                    spec, cfg)
    r_fh = coherent_distance_report(bif_f, bif_h, degree, region, basepoint,
                                    spec, cfg)
    tol = max(r.tolerance for r in (r_fg, r_gf, r_gh, r_fh))
    symmetry = (r_fg.value == r_gf.value)
    if math.isinf(r_fh.value):
        triangle = math.isinf(r_fg.value) or math.isinf(r_gh.value)
    else:
        triangle = r_fh.value <= r_fg.value + r_gh.value + 2.0 * tol
    return PseudoMetricReport(r_fg.value, r_gf.value, r_gh.value, r_fh.value,
                              tol, symmetry, triangle)


@dataclass(frozen=True)
class MaxPrincipleReport:
    argmax: ParamPoint
    value: float
    grid_step: float
    distance_to_locus: float
    verdict: bool


def _locus_distance(p: ParamPoint, region: ParameterRegion) -> float:
    """Distance from p to {a = 1/2} union the region boundary."""
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    dists = [abs(p.a - 0.5),
             abs(p.a - a0), abs(p.a - a1),
             abs(p.b - b0), abs(p.b - b1)]
    for c, r in region.excluded:
        dists.append(abs(math.hypot(p.a - c.a, p.b - c.b) - r))
    return min(dists)


def max_principle_check(bif_f, bif_g, degree, region: ParameterRegion,
                        sigma: Matching, group: PairPermutationGroup,
                        fine_grid: int, cfg: TransportConfig
                        ) -> MaxPrincipleReport:
    """Locate the argmax of the transported cost over a fine interior grid
    plus boundary and half-width samples; the maximum principle predicts it
    within one grid step of {a = 1/2} union the region boundary.

    The cost landscape routinely contains plateaus (the branch weights are
    piecewise constant in the parameter), so the maximum may be attained
    at many sampled parameters at once; among the attaining parameters the
    one closest to the expected locus is reported.  The check still fails
    when every attaining parameter lies farther than one grid step from
    the locus.
    """
    a0, a1 = region.a_range
    b0, b1 = region.b_range
    step_a = (a1 - a0) / (fine_grid - 1)
    step_b = (b1 - b0) / (fine_grid - 1)
    spec = SampleSpec(interior_n=fine_grid,
                      boundary_n=max(4, fine_grid),
                      half_width_n=max(2, fine_grid))
    basepoint = group.basepoint
    ev = _CostEvaluator(bif_f, bif_g, degree, region, basepoint, group,
                        spec, cfg)
    costs = ev.endpoint_costs(sigma)
    best = max(value for _, value in costs)
    tie_gap = max(1e-9 * abs(best), 1e-12)
    attaining = [p for p, value in costs if value >= best - tie_gap]
    argmax = min(attaining, key=lambda p: _locus_distance(p, region))
    grid_step = max(step_a, step_b)
    distance = _locus_distance(argmax, region)
    verdict = distance <= grid_step + 1e-12
    return MaxPrincipleReport(argmax, best, grid_step, distance, verdict)


# ---------------------------------------------------------------------------
# Families of regions
# ---------------------------------------------------------------------------

def _rects_overlap(r1: ParameterRegion, r2: ParameterRegion) -> bool:
    (a0, a1), (b0, b1) = r1.a_range, r1.b_range
    (c0, c1), (d0, d1) = r2.a_range, r2.b_range
    return not (a1 < c0 or c1 < a0 or b1 < d0 or d1 < b0)


def family_distances(bif_f, bif_g, degree,
                     regions: Sequence[ParameterRegion],
                     basepoints: Sequence[ParamPoint],
                     spec: SampleSpec, cfg: TransportConfig
                     ) -> tuple[float, float]:
    """Family coherent distance (max over regions) and family matching
    distance (sup of the bottleneck distance over all sampled parameters
    of every region)."""
    if len(regions) != len(basepoints):
        raise ValueError("one basepoint per region required")
    for i, r1 in enumerate(regions):
        for r2 in regions[i + 1:]:
            if _rects_overlap(r1, r2):
                raise ValueError("family regions must be pairwise disjoint")
    cd_family = 0.0
    dmatch_family = 0.0
    tol_total = 0.0
    for region, basepoint in zip(regions, basepoints):
        rep = coherent_distance_report(bif_f, bif_g, degree, region,
                                       basepoint, spec, cfg)
        cd_family = max(cd_family, rep.value)
        tol_total = max(tol_total, rep.tolerance)
        for p in sample_endpoints(region, basepoint, spec):
            df = diagram_at(bif_f, p, degree)
            dg = diagram_at(bif_g, p, degree)
            value, _ = bottleneck_distance(df, dg)
            dmatch_family = max(dmatch_family, value)
    if dmatch_family > cd_family + tol_total + 1e-9:
        raise AssertionError(
            f"family matching distance {dmatch_family} exceeds family "
            f"coherent distance {cd_family} beyond tolerance {tol_total}")
    return cd_family, dmatch_family


def save_report(report: CoherentDistanceReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, sort_keys=True)
        fh.write("\n")
