"""Extended metric on diagram points, matchings, and the bottleneck distance.

Distances between diagram points use the extended metric that treats the
diagonal as a single distinguished element and keeps improper points
(infinite death) at infinite distance from everything except each other.
The bottleneck distance is computed exactly on the finite candidate set of
pairwise distances via bipartite feasibility tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Optional, Sequence, Union

from .persistence import DIAGONAL, DiagramPoint, PersistenceDiagram

INF = math.inf

PointOrDiagonal = Union[DiagramPoint, type(DIAGONAL)]


class CapExceeded(ValueError):
    """Raised when an exhaustive enumeration would be too large."""


def point_distance(x: PointOrDiagonal, y: PointOrDiagonal) -> float:
    """Extended distance between two diagram points (or the diagonal).

    Conventions: improper points are at |u - u'| from each other, at
    infinity from proper points and the diagonal; a proper point is at
    (v - u)/2 from the diagonal; the diagonal is at 0 from itself.
    """
    x_diag = x is DIAGONAL
    y_diag = y is DIAGONAL
    if x_diag and y_diag:
        return 0.0
    if x_diag or y_diag:
        p = y if x_diag else x
        return (p.v - p.u) / 2.0 if p.is_proper else INF
    if x.is_proper != y.is_proper:
        return INF
    if not x.is_proper:
        return abs(x.u - y.u)
    direct = max(abs(x.u - y.u), abs(x.v - y.v))
    via_diagonal = max((x.v - x.u) / 2.0, (y.v - y.u) / 2.0)
    return min(direct, via_diagonal)


@dataclass(frozen=True)
class Matching:
    """A bijection between two diagrams extended by the diagonal.

    ``pairs`` holds (left index, right index) matches into the respective
    ``points`` tuples; indices absent from ``pairs`` must appear in the
    corresponding delta list (those points are matched to the diagonal).
    """

    left: PersistenceDiagram
    right: PersistenceDiagram
    pairs: tuple[tuple[int, int], ...]
    left_to_delta: tuple[int, ...]
    right_to_delta: tuple[int, ...]

    def __post_init__(self):
        if self.left.degree != self.right.degree:
            raise ValueError("matched diagrams must have equal degree")
        object.__setattr__(self, "pairs",
                           tuple((int(i), int(j)) for i, j in self.pairs))
        object.__setattr__(self, "left_to_delta",
                           tuple(int(i) for i in self.left_to_delta))
        object.__setattr__(self, "right_to_delta",
                           tuple(int(j) for j in self.right_to_delta))
        left_seen = sorted([i for i, _ in self.pairs] + list(self.left_to_delta))
        right_seen = sorted([j for _, j in self.pairs] + list(self.right_to_delta))
        if left_seen != list(range(len(self.left.points))):
            raise ValueError("left diagram points not matched exactly once")
        if right_seen != list(range(len(self.right.points))):
            raise ValueError("right diagram points not matched exactly once")

    def image_of(self, left_index: int) -> PointOrDiagonal:
        for i, j in self.pairs:
            if i == left_index:
                return self.right.points[j]
        return DIAGONAL

    def as_dict(self) -> dict[int, Optional[int]]:
        """Left index -> right index (None meaning the diagonal)."""
        out: dict[int, Optional[int]] = {i: j for i, j in self.pairs}
        out.update({i: None for i in self.left_to_delta})
        return out

    def inverse(self) -> "Matching":
        return Matching(self.right, self.left,
                        tuple((j, i) for i, j in self.pairs),
                        self.right_to_delta, self.left_to_delta)

    @property
    def infinite_cost(self) -> bool:
        return matching_cost(self).value == INF


def compose_matchings(first: "Matching", second: "Matching") -> "Matching":
    """Relational composition: ``first`` maps A to B, ``second`` maps B to C.

    A point sent to the diagonal anywhere along the chain stays on the
    diagonal; ``first.right`` and ``second.left`` must be the same diagram.
    """
    if not first.right.same_points(second.left):
        raise ValueError("matchings do not share the middle diagram")
    mid_to_c = dict(second.pairs)
    mid_delta = set(second.left_to_delta)
    pairs = []
    left_delta = list(first.left_to_delta)
    for i, j in first.pairs:
        if j in mid_delta:
            left_delta.append(i)
        else:
            pairs.append((i, mid_to_c[j]))
    dropped_mid = set(first.right_to_delta)
    right_delta = list(second.right_to_delta)
    right_delta.extend(k for j, k in second.pairs if j in dropped_mid)
    return Matching(first.left, second.right, tuple(pairs),
                    tuple(sorted(left_delta)), tuple(sorted(right_delta)))


def identity_matching(d1: PersistenceDiagram,
                      d2: Optional[PersistenceDiagram] = None) -> Matching:
    """Index-wise matching between two structurally equal diagrams."""
    d2 = d1 if d2 is None else d2
    if d1.points != d2.points:
        raise ValueError("identity matching needs equal point multisets")
    n = len(d1.points)
    return Matching(d1, d2, tuple((i, i) for i in range(n)), (), ())


@dataclass(frozen=True)
class MatchingCost:
    """Cost of a matching and the pair realizing the maximum.

    ``argmax_pair`` is ``("pair", i, j)``, ``("left_delta", i)``,
    ``("right_delta", j)``, or None for an empty matching.
    """

    value: float
    argmax_pair: Optional[tuple]


def matching_cost(m: Matching) -> MatchingCost:
    """Max over matched pairs (and diagonal matches) of the point distance."""
    best = -1.0
    arg: Optional[tuple] = None
    for i, j in m.pairs:
        d = point_distance(m.left.points[i], m.right.points[j])
        if d > best:
            best, arg = d, ("pair", i, j)
    for i in m.left_to_delta:
        d = point_distance(m.left.points[i], DIAGONAL)
        if d > best:
            best, arg = d, ("left_delta", i)
    for j in m.right_to_delta:
        d = point_distance(DIAGONAL, m.right.points[j])
        if d > best:
            best, arg = d, ("right_delta", j)
    if arg is None:
        return MatchingCost(0.0, None)
    return MatchingCost(best, arg)


# ---------------------------------------------------------------------------
# Bottleneck distance
# ---------------------------------------------------------------------------

def _proper_feasible(p1: Sequence[DiagramPoint], p2: Sequence[DiagramPoint],
                     dist: list[list[float]], delta1: list[float],
                     delta2: list[float], t: float):
    """Perfect-matching feasibility for the proper parts at threshold ``t``.

    Vertices are doubled with dummies so that matching a point to the
    diagonal consumes its dummy partner; returns the left-to-right
    assignment (size n1 + n2) or None when infeasible.
    """
    n1, n2 = len(p1), len(p2)
    size = n1 + n2  # left: propers1 then dummies of p2; right: propers2 then dummies of p1

    def neighbors(a: int):
        if a < n1:
            for b in range(n2):
                if dist[a][b] <= t:
                    yield b
            if delta1[a] <= t:
                yield n2 + a
        else:
            b = a - n1  # dummy standing in for right point b
            if delta2[b] <= t:
                yield b
            for k in range(n1):
                yield n2 + k

    match_right = [-1] * size
    match_left = [-1] * size

    def augment(a: int, visited: list[bool]) -> bool:
        for b in neighbors(a):
            if not visited[b]:
                visited[b] = True
                if match_right[b] == -1 or augment(match_right[b], visited):
                    match_right[b] = a
                    match_left[a] = b
                    return True
        return False

    for a in range(size):
        if not augment(a, [False] * size):
            return None
    return match_left


def _improper_part(imp1: Sequence[DiagramPoint],
                   imp2: Sequence[DiagramPoint]):
    """Sorted pairing of improper points: cost and index pairs.

    Improper points move on a line and cannot pass through each other, so
    the order-preserving pairing is optimal; a count mismatch forces
    infinite cost (extras fall to the diagonal).
    """
    q1, q2 = len(imp1), len(imp2)
    q = min(q1, q2)
    pairs = list(zip(range(q), range(q)))
    if q1 != q2:
        return INF, pairs, list(range(q, q1)), list(range(q, q2))
    cost = max((abs(imp1[i].u - imp2[i].u) for i in range(q)), default=0.0)
    return cost, pairs, [], []


def bottleneck_distance(d1: PersistenceDiagram,
                        d2: PersistenceDiagram) -> tuple[float, Matching]:
    """Minimum matching cost between two diagrams and a realizing matching.

    Exact: the optimum is selected from the finite set of pairwise
    distances by feasibility search, not by numeric binary search on reals.
    """
    if d1.degree != d2.degree:
        raise ValueError("bottleneck distance needs equal degrees")
    imp1, imp2 = d1.impropers(), d2.impropers()
    p1, p2 = d1.propers(), d2.propers()
    # index maps back into the full point tuples
    imp1_idx = [i for i, p in enumerate(d1.points) if not p.is_proper]
    imp2_idx = [i for i, p in enumerate(d2.points) if not p.is_proper]
    p1_idx = [i for i, p in enumerate(d1.points) if p.is_proper]
    p2_idx = [i for i, p in enumerate(d2.points) if p.is_proper]

    imp_cost, imp_pairs, imp1_delta, imp2_delta = _improper_part(imp1, imp2)

    n1, n2 = len(p1), len(p2)
    dist = [[point_distance(a, b) for b in p2] for a in p1]
    delta1 = [point_distance(a, DIAGONAL) for a in p1]
    delta2 = [point_distance(b, DIAGONAL) for b in p2]
    candidates = sorted({0.0, *delta1, *delta2,
                         *(dist[i][j] for i in range(n1) for j in range(n2)
                           if math.isfinite(dist[i][j]))})

    lo, hi = 0, len(candidates) - 1
    best_assign = None
    # find the smallest feasible threshold among the candidates
    while lo <= hi:
        mid = (lo + hi) // 2
        assign = _proper_feasible(p1, p2, dist, delta1, delta2,
                                  candidates[mid])
        if assign is not None:
            best_assign = (candidates[mid], assign)
            hi = mid - 1
        else:
            lo = mid + 1
    if best_assign is None:  # only possible when candidate list is empty
        best_assign = (0.0, [])
    proper_cost, assign = best_assign

    pairs = [(imp1_idx[i], imp2_idx[j]) for i, j in imp_pairs]
    left_delta = [imp1_idx[i] for i in imp1_delta]
    right_delta = [imp2_idx[j] for j in imp2_delta]
    matched_right = set()
    for a in range(n1):
        b = assign[a] if a < len(assign) else -1
        if 0 <= b < n2:
            pairs.append((p1_idx[a], p2_idx[b]))
            matched_right.add(b)
        else:
            left_delta.append(p1_idx[a])
    right_delta.extend(p2_idx[b] for b in range(n2) if b not in matched_right)

    matching = Matching(d1, d2, tuple(pairs), tuple(left_delta),
                        tuple(right_delta))
    value = max(imp_cost, proper_cost) if (imp_pairs or imp1_delta
                                           or imp2_delta) else proper_cost
    if imp_cost == INF:
        value = INF
    return value, matching


def enumerate_matchings(d1: PersistenceDiagram, d2: PersistenceDiagram,
                        cap: int = 12) -> list[Matching]:
    """All matchings between two diagrams (improper bijections crossed with
    partial injections of the proper points; the rest go to the diagonal).

    When the improper counts differ every returned matching has infinite
    cost; the improper surplus is sent to the diagonal.
    """
    if d1.degree != d2.degree:
        raise ValueError("matchings need equal degrees")
    total = len(d1.points) + len(d2.points)
    if total > cap:
        raise CapExceeded(
            f"{total} diagram points exceed the enumeration cap {cap}")
    imp1_idx = [i for i, p in enumerate(d1.points) if not p.is_proper]
    imp2_idx = [i for i, p in enumerate(d2.points) if not p.is_proper]
    p1_idx = [i for i, p in enumerate(d1.points) if p.is_proper]
    p2_idx = [i for i, p in enumerate(d2.points) if p.is_proper]

    q1, q2 = len(imp1_idx), len(imp2_idx)
    q = min(q1, q2)
    if q1 == q2:
        imp_assignments = [
            (tuple((imp1_idx[k], imp2_idx[perm[k]]) for k in range(q)), (), ())
            for perm in permutations(range(q2))]
    else:
        # count mismatch: cost is infinite whatever the improper pairing, so
        # a single order-preserving truncation stands in for all of them
        imp_assignments = [
            (tuple((imp1_idx[k], imp2_idx[k]) for k in range(q)),
             tuple(imp1_idx[q:]), tuple(imp2_idx[q:]))]

    out = []
    for k in range(min(len(p1_idx), len(p2_idx)) + 1):
        for subset in combinations(range(len(p1_idx)), k):
            for images in permutations(range(len(p2_idx)), k):
                proper_pairs = tuple((p1_idx[subset[t]], p2_idx[images[t]])
                                     for t in range(k))
                used1 = set(subset)
                used2 = set(images)
                pl = tuple(p1_idx[i] for i in range(len(p1_idx))
                           if i not in used1)
                pr = tuple(p2_idx[j] for j in range(len(p2_idx))
                           if j not in used2)
                for imp_pairs, ld, rd in imp_assignments:
                    out.append(Matching(d1, d2, imp_pairs + proper_pairs,
                                        ld + pl, rd + pr))
    return out
