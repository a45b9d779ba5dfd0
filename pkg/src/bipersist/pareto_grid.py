"""Analytic value-plane grids for the built-in surfaces.

Each built-in surface has a curve family in the value plane — silhouette
arcs of its image plus vertical/horizontal half-lines at coordinate
extremes — whose intersections with an admissible line locate every
diagram coordinate of the sliced filtration.  The grids here are exact
closed-form catalogs; crossing them against lines is plain circle/line
geometry.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .bifiltration import ParamPoint, SimplicialBifiltration
from .parameter_space import AdmissibleLine
from .persistence import diagram_at

_MERGE_TOL = 1e-9

# Geometry pieces:
#   ("arc",  cx, cy, r, t0, t1)   circle arc, angles in [0, 2*pi), t0 < t1
#   ("vseg", x, y0, y1)           vertical segment
#   ("hseg", x0, x1, y)           horizontal segment
#   ("vline", x, y0)              upward half-line  {(x, y) : y >= y0}
#   ("hline", x0, y)              rightward half-line  {(x, y) : x >= x0}


@dataclass(frozen=True)
class Contour:
    """One primitive curve of the grid: a critical arc (proper) or a
    half-line anchored at a coordinate extreme (improper)."""

    contour_id: str
    kind: str  # "proper" | "improper"
    geometry: tuple
    provenance: str

    def __post_init__(self):
        if self.kind not in ("proper", "improper"):
            raise ValueError("contour kind must be proper or improper")
        shape = self.geometry[0]
        if self.kind == "improper" and shape not in ("vline", "hline"):
            raise ValueError("improper contours are half-lines")
        if self.kind == "proper" and shape not in ("arc", "vseg", "hseg"):
            raise ValueError("proper contours are bounded arcs")


@dataclass(frozen=True)
class ContourArc:
    """Connected piece of the grid between double points, labeled with the
    homology degree of the event it carries and its sign (+1 birth,
    -1 death)."""

    arc_id: str
    degree: int
    sign: int
    pieces: tuple[tuple, ...]
    provenance: str

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("arc sign must be +1 or -1")
        if self.degree < 0:
            raise ValueError("arc degree must be non-negative")
        if not self.pieces:
            raise ValueError("an arc needs at least one geometry piece")

    @property
    def unbounded(self) -> bool:
        return any(p[0] in ("vline", "hline") for p in self.pieces)


@dataclass(frozen=True)
class ExtendedParetoGrid:
    """Full catalog: contours, their arc decomposition with labels, the
    double points, and the annihilation crossings."""

    name: str
    contours: tuple[Contour, ...]
    arcs: tuple[ContourArc, ...]
    double_points: tuple[tuple[float, float], ...]
    annihilation_crossings: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ids = [a.arc_id for a in self.arcs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate arc ids")
        for x, y in self.double_points:
            touching = [c.contour_id for c in self.contours
                        if _point_on_contour(c, x, y)]
            if len(touching) < 2:
                raise ValueError(
                    f"double point ({x}, {y}) lies on fewer than two "
                    "contours")

    def arc(self, arc_id: str) -> ContourArc:
        for a in self.arcs:
            if a.arc_id == arc_id:
                return a
        raise KeyError(arc_id)


def _point_on_piece(piece: tuple, x: float, y: float,
                    tol: float = 1e-7) -> bool:
    shape = piece[0]
    if shape == "arc":
        _, cx, cy, r, t0, t1 = piece
        if abs(math.hypot(x - cx, y - cy) - r) > tol:
            return False
        theta = math.atan2(y - cy, x - cx) % (2.0 * math.pi)
        return (t0 - tol <= theta <= t1 + tol
                or t0 - tol <= theta + 2.0 * math.pi <= t1 + tol)
    if shape == "vseg":
        _, px, y0, y1 = piece
        return abs(x - px) <= tol and y0 - tol <= y <= y1 + tol
    if shape == "hseg":
        _, x0, x1, py = piece
        return abs(y - py) <= tol and x0 - tol <= x <= x1 + tol
    if shape == "vline":
        _, px, y0 = piece
        return abs(x - px) <= tol and y >= y0 - tol
    if shape == "hline":
        _, x0, py = piece
        return abs(y - py) <= tol and x >= x0 - tol
    raise ValueError(f"unknown geometry piece {shape!r}")


def _point_on_contour(contour: Contour, x: float, y: float) -> bool:
    return _point_on_piece(contour.geometry, x, y)


def arcs_at(grid: ExtendedParetoGrid, x: float, y: float,
            tol: float = 1e-7) -> tuple[str, ...]:
    """Ids of the arcs whose closure contains (x, y)."""
    found = [a.arc_id for a in grid.arcs
             if any(_point_on_piece(p, x, y, tol) for p in a.pieces)]
    return tuple(found)


# ---------------------------------------------------------------------------
# Built-in catalogs
# ---------------------------------------------------------------------------

def _torus_grid() -> ExtendedParetoGrid:
    """Planar projection curves of the standard torus: silhouette circles
    of radii 1 and 2 (first- and third-quadrant quarters are the critical
    parts) plus half-lines at the coordinate extremes -2, -1, 1, 2."""
    pi = math.pi
    s3 = math.sqrt(3.0)
    t_s31 = pi / 6.0   # angle of (sqrt(3), 1) on the radius-2 circle
    t_1s3 = pi / 3.0   # angle of (1, sqrt(3))

    contours = (
        Contour("inner-ne", "proper", ("arc", 0, 0, 1, 0.0, pi / 2),
                "inner silhouette circle, first quadrant"),
        Contour("inner-sw", "proper", ("arc", 0, 0, 1, pi, 1.5 * pi),
                "inner silhouette circle, third quadrant"),
        Contour("outer-ne", "proper", ("arc", 0, 0, 2, 0.0, pi / 2),
                "outer silhouette circle, first quadrant"),
        Contour("outer-sw", "proper", ("arc", 0, 0, 2, pi, 1.5 * pi),
                "outer silhouette circle, third quadrant"),
        Contour("V(-2)", "improper", ("vline", -2.0, 0.0),
                "first-coordinate minimum"),
        Contour("V(-1)", "improper", ("vline", -1.0, 0.0),
                "first-coordinate inner minimum"),
        Contour("V(1)", "improper", ("vline", 1.0, 0.0),
                "first-coordinate inner maximum"),
        Contour("V(2)", "improper", ("vline", 2.0, 0.0),
                "first-coordinate maximum"),
        Contour("H(-2)", "improper", ("hline", 0.0, -2.0),
                "second-coordinate minimum"),
        Contour("H(-1)", "improper", ("hline", 0.0, -1.0),
                "second-coordinate inner minimum"),
        Contour("H(1)", "improper", ("hline", 0.0, 1.0),
                "second-coordinate inner maximum"),
        Contour("H(2)", "improper", ("hline", 0.0, 2.0),
                "second-coordinate maximum"),
    )

    arcs = (
        # births of the transient component (degree 0)
        ContourArc("inner-ne", 0, +1, (("arc", 0, 0, 1, 0.0, pi / 2),),
                   "inner circle, first quadrant"),
        ContourArc("outer-sw", 0, +1,
                   (("vline", -2.0, 0.0), ("arc", 0, 0, 2, pi, 1.5 * pi),
                    ("hline", 0.0, -2.0)),
                   "left tail, outer circle third quadrant, bottom tail"),
        # deaths of the transient component (degree 0)
        ContourArc("v1-low", 0, -1, (("vseg", 1.0, 0.0, 1.0),),
                   "x = 1 below (1,1)"),
        ContourArc("h1-low", 0, -1, (("hseg", 0.0, 1.0, 1.0),),
                   "y = 1 left of (1,1)"),
        # births of 1-classes
        ContourArc("inner-sw", 1, +1,
                   (("vline", -1.0, 0.0), ("arc", 0, 0, 1, pi, 1.5 * pi),
                    ("hline", 0.0, -1.0)),
                   "left tail, inner circle third quadrant, bottom tail"),
        ContourArc("outer-ne-low", 1, +1,
                   (("arc", 0, 0, 2, 0.0, t_s31),),
                   "outer circle between (2,0) and (sqrt(3),1)"),
        ContourArc("outer-ne-mid", 1, +1,
                   (("arc", 0, 0, 2, t_s31, t_1s3),),
                   "outer circle between (sqrt(3),1) and (1,sqrt(3))"),
        ContourArc("outer-ne-high", 1, +1,
                   (("arc", 0, 0, 2, t_1s3, pi / 2),),
                   "outer circle between (1,sqrt(3)) and (0,2)"),
        ContourArc("v1-mid", 1, +1, (("vseg", 1.0, 1.0, s3),),
                   "x = 1 between (1,1) and (1,sqrt(3))"),
        ContourArc("v1-high", 1, +1, (("vseg", 1.0, s3, 2.0),),
                   "x = 1 between (1,sqrt(3)) and (1,2)"),
        ContourArc("v1-tail", 1, +1, (("vline", 1.0, 2.0),),
                   "x = 1 above (1,2)"),
        ContourArc("h1-mid", 1, +1, (("hseg", 1.0, s3, 1.0),),
                   "y = 1 between (1,1) and (sqrt(3),1)"),
        ContourArc("h1-high", 1, +1, (("hseg", s3, 2.0, 1.0),),
                   "y = 1 between (sqrt(3),1) and (2,1)"),
        ContourArc("h1-tail", 1, +1, (("hline", 2.0, 1.0),),
                   "y = 1 right of (2,1)"),
        # deaths of 1-classes
        ContourArc("v2-low", 1, -1, (("vseg", 2.0, 0.0, 1.0),),
                   "x = 2 below (2,1)"),
        ContourArc("v2-high", 1, -1, (("vseg", 2.0, 1.0, 2.0),),
                   "x = 2 between (2,1) and (2,2)"),
        ContourArc("h2-low", 1, -1, (("hseg", 0.0, 1.0, 2.0),),
                   "y = 2 left of (1,2)"),
        ContourArc("h2-high", 1, -1, (("hseg", 1.0, 2.0, 2.0),),
                   "y = 2 between (1,2) and (2,2)"),
        # births of the 2-class
        ContourArc("v2-tail", 2, +1, (("vline", 2.0, 2.0),),
                   "x = 2 above (2,2)"),
        ContourArc("h2-tail", 2, +1, (("hline", 2.0, 2.0),),
                   "y = 2 right of (2,2)"),
    )

    double_points = ((1.0, 0.0), (0.0, 1.0), (2.0, 0.0), (0.0, 2.0),
                     (1.0, 1.0), (1.0, s3), (s3, 1.0), (1.0, 2.0),
                     (2.0, 1.0), (2.0, 2.0))
    annihilation = ((1.0, 0.0), (0.0, 1.0), (2.0, 0.0), (0.0, 2.0),
                    (1.0, 2.0), (2.0, 1.0))
    return ExtendedParetoGrid("torus", contours, arcs, double_points,
                              annihilation)


def _circle_crossings(c1, r1, c2, r2):
    """Intersection points of two circles (assumed transversal)."""
    (x1, y1), (x2, y2) = c1, c2
    dx, dy = x2 - x1, y2 - y1
    d = math.hypot(dx, dy)
    h = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    k = math.sqrt(max(r1 * r1 - h * h, 0.0))
    mx, my = x1 + h * dx / d, y1 + h * dy / d
    return ((mx - k * dy / d, my + k * dx / d),
            (mx + k * dy / d, my - k * dx / d))


def _two_spheres_grid() -> ExtendedParetoGrid:
    """Silhouette circles of two radius-4 spheres whose images are centered
    at (0,0) and (-1,1.25), plus half-lines at each sphere's coordinate
    extremes."""
    pi = math.pi
    ca, ra = (0.0, 0.0), 4.0
    cb, rb = (-1.0, 1.25), 4.0
    upper, lower = _circle_crossings(ca, ra, cb, rb)
    ax, ay = max(upper, lower)           # first-quadrant crossing
    cx_, cy_ = min(upper, lower)         # third-quadrant crossing
    s7 = math.sqrt(7.0)                  # circle-1 height at x = 3
    xq = -1.0 + math.sqrt(rb * rb - (4.0 - cb[1]) ** 2)  # circle-2 at y = 4

    def ang(c, x, y):
        return math.atan2(y - c[1], x - c[0]) % (2.0 * pi)

    tc_a = ang(ca, cx_, cy_)
    tc_b = ang(cb, cx_, cy_)
    ta_a = ang(ca, ax, ay)
    ta_b = ang(cb, ax, ay)
    t37 = ang(ca, 3.0, s7)
    txq = ang(cb, xq, 4.0)

    contours = (
        Contour("a-ne", "proper", ("arc", 0.0, 0.0, ra, 0.0, pi / 2),
                "first sphere silhouette, first quadrant"),
        Contour("a-sw", "proper", ("arc", 0.0, 0.0, ra, pi, 1.5 * pi),
                "first sphere silhouette, third quadrant"),
        Contour("b-ne", "proper", ("arc", -1.0, 1.25, rb, 0.0, pi / 2),
                "second sphere silhouette, first quadrant"),
        Contour("b-sw", "proper", ("arc", -1.0, 1.25, rb, pi, 1.5 * pi),
                "second sphere silhouette, third quadrant"),
        Contour("V(-4)", "improper", ("vline", -4.0, 0.0),
                "first sphere leftmost point"),
        Contour("V(4)", "improper", ("vline", 4.0, 0.0),
                "first sphere rightmost point"),
        Contour("H(-4)", "improper", ("hline", 0.0, -4.0),
                "first sphere bottom point"),
        Contour("H(4)", "improper", ("hline", 0.0, 4.0),
                "first sphere top point"),
        Contour("V(-5)", "improper", ("vline", -5.0, 1.25),
                "second sphere leftmost point"),
        Contour("V(3)", "improper", ("vline", 3.0, 1.25),
                "second sphere rightmost point"),
        Contour("H(-2.75)", "improper", ("hline", -1.0, -2.75),
                "second sphere bottom point"),
        Contour("H(5.25)", "improper", ("hline", -1.0, 5.25),
                "second sphere top point"),
    )

    arcs = (
        # births of the two components (degree 0, all essential)
        ContourArc("a-sw-upper", 0, +1,
                   (("vline", -4.0, 0.0), ("arc", 0.0, 0.0, ra, pi, tc_a)),
                   "first sphere: left tail down to the circle crossing"),
        ContourArc("a-sw-lower", 0, +1,
                   (("arc", 0.0, 0.0, ra, tc_a, 1.5 * pi),
                    ("hline", 0.0, -4.0)),
                   "first sphere: circle crossing to the bottom tail"),
        ContourArc("b-sw-upper", 0, +1,
                   (("vline", -5.0, 1.25),
                    ("arc", -1.0, 1.25, rb, pi, tc_b)),
                   "second sphere: left tail down to the circle crossing"),
        ContourArc("b-sw-lower", 0, +1,
                   (("arc", -1.0, 1.25, rb, tc_b, 1.5 * pi),
                    ("hline", -1.0, -2.75)),
                   "second sphere: circle crossing to the bottom tail"),
        # births of 1-classes
        ContourArc("a-ne-low", 1, +1,
                   (("arc", 0.0, 0.0, ra, 0.0, t37),),
                   "first sphere circle between (4,0) and (3,sqrt(7))"),
        ContourArc("a-ne-mid", 1, +1,
                   (("arc", 0.0, 0.0, ra, t37, ta_a),),
                   "first sphere circle between (3,sqrt(7)) and the "
                   "circle crossing"),
        ContourArc("a-ne-high", 1, +1,
                   (("arc", 0.0, 0.0, ra, ta_a, pi / 2),),
                   "first sphere circle between the circle crossing "
                   "and (0,4)"),
        ContourArc("b-ne-low", 1, +1,
                   (("arc", -1.0, 1.25, rb, 0.0, ta_b),),
                   "second sphere circle between (3,1.25) and the "
                   "circle crossing"),
        ContourArc("b-ne-mid", 1, +1,
                   (("arc", -1.0, 1.25, rb, ta_b, txq),),
                   "second sphere circle between the circle crossing "
                   "and the y = 4 crossing"),
        ContourArc("b-ne-high", 1, +1,
                   (("arc", -1.0, 1.25, rb, txq, pi / 2),),
                   "second sphere circle between the y = 4 crossing "
                   "and (-1,5.25)"),
        # deaths of 1-classes
        ContourArc("v3-low", 1, -1, (("vseg", 3.0, 1.25, s7),),
                   "x = 3 between (3,1.25) and (3,sqrt(7))"),
        ContourArc("v3-mid", 1, -1, (("vseg", 3.0, s7, 4.0),),
                   "x = 3 between (3,sqrt(7)) and (3,4)"),
        ContourArc("v3-high", 1, -1, (("vseg", 3.0, 4.0, 5.25),),
                   "x = 3 between (3,4) and (3,5.25)"),
        ContourArc("v4-low", 1, -1, (("vseg", 4.0, 0.0, 4.0),),
                   "x = 4 between (4,0) and (4,4)"),
        ContourArc("h4-left", 1, -1, (("hseg", 0.0, xq, 4.0),),
                   "y = 4 between (0,4) and the second circle"),
        ContourArc("h4-mid", 1, -1, (("hseg", xq, 3.0, 4.0),),
                   "y = 4 between the second circle and (3,4)"),
        ContourArc("h4-right", 1, -1, (("hseg", 3.0, 4.0, 4.0),),
                   "y = 4 between (3,4) and (4,4)"),
        ContourArc("h525-left", 1, -1, (("hseg", -1.0, 3.0, 5.25),),
                   "y = 5.25 between (-1,5.25) and (3,5.25)"),
        # births of 2-classes
        ContourArc("v3-tail", 2, +1, (("vline", 3.0, 5.25),),
                   "x = 3 above (3,5.25)"),
        ContourArc("v4-mid", 2, +1, (("vseg", 4.0, 4.0, 5.25),),
                   "x = 4 between (4,4) and (4,5.25)"),
        ContourArc("v4-tail", 2, +1, (("vline", 4.0, 5.25),),
                   "x = 4 above (4,5.25)"),
        ContourArc("h4-tail", 2, +1, (("hline", 4.0, 4.0),),
                   "y = 4 right of (4,4)"),
        ContourArc("h525-mid", 2, +1, (("hseg", 3.0, 4.0, 5.25),),
                   "y = 5.25 between (3,5.25) and (4,5.25)"),
        ContourArc("h525-tail", 2, +1, (("hline", 4.0, 5.25),),
                   "y = 5.25 right of (4,5.25)"),
    )

    double_points = ((ax, ay), (cx_, cy_), (3.0, 4.0), (4.0, 5.25),
                     (3.0, 5.25), (4.0, 4.0), (3.0, s7), (xq, 4.0),
                     (4.0, 0.0), (0.0, 4.0), (3.0, 1.25), (-1.0, 5.25))
    annihilation = ((4.0, 0.0), (0.0, 4.0), (3.0, 1.25), (-1.0, 5.25))
    return ExtendedParetoGrid("two_spheres", contours, arcs, double_points,
                              annihilation)


_BUILTIN_GRIDS = {"torus": _torus_grid, "two_spheres": _two_spheres_grid}


def builtin_grid(example_id: str) -> ExtendedParetoGrid:
    try:
        return _BUILTIN_GRIDS[example_id]()
    except KeyError:
        raise ValueError(
            f"no analytic grid for {example_id!r}; available: "
            f"{sorted(_BUILTIN_GRIDS)}") from None


def translated(grid: ExtendedParetoGrid, dx: float, dy: float
               ) -> ExtendedParetoGrid:
    """Copy of the grid with every feature shifted by (dx, dy); used as a
    falsification control for the position check."""
    def move(piece):
        shape = piece[0]
        if shape == "arc":
            _, cx, cy, r, t0, t1 = piece
            return ("arc", cx + dx, cy + dy, r, t0, t1)
        if shape == "vseg":
            _, x, y0, y1 = piece
            return ("vseg", x + dx, y0 + dy, y1 + dy)
        if shape == "hseg":
            _, x0, x1, y = piece
            return ("hseg", x0 + dx, x1 + dx, y + dy)
        if shape == "vline":
            _, x, y0 = piece
            return ("vline", x + dx, y0 + dy)
        _, x0, y = piece
        return ("hline", x0 + dx, y + dy)

    contours = tuple(Contour(c.contour_id, c.kind, move(c.geometry),
                             c.provenance) for c in grid.contours)
    arcs = tuple(ContourArc(a.arc_id, a.degree, a.sign,
                            tuple(move(p) for p in a.pieces), a.provenance)
                 for a in grid.arcs)
    dps = tuple((x + dx, y + dy) for x, y in grid.double_points)
    ann = tuple((x + dx, y + dy) for x, y in grid.annihilation_crossings)
    return ExtendedParetoGrid(grid.name, contours, arcs, dps, ann)


# ---------------------------------------------------------------------------
# Line / grid intersections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridIntersection:
    x: float
    y: float
    arc_ids: tuple[str, ...]
    tangent: bool


def _piece_line_points(piece: tuple, line: AdmissibleLine):
    """(x, y, tangent) hits of one geometry piece with the line."""
    a = line.param.a
    b = line.param.b
    shape = piece[0]
    eps = _MERGE_TOL
    if shape in ("vseg", "vline"):
        x0 = piece[1]
        t = (x0 - b) / a
        y = -b + (1.0 - a) * t
        if shape == "vseg":
            _, _, y0, y1 = piece
            ok = y0 - eps <= y <= y1 + eps
        else:
            ok = y >= piece[2] - eps
        return [(x0, y, False)] if ok else []
    if shape in ("hseg", "hline"):
        y0 = piece[-1] if shape == "hseg" else piece[2]
        t = (y0 + b) / (1.0 - a)
        x = b + a * t
        if shape == "hseg":
            _, xlo, xhi, _ = piece
            ok = xlo - eps <= x <= xhi + eps
        else:
            ok = x >= piece[1] - eps
        return [(x, y0, False)] if ok else []
    _, cx, cy, r, t0, t1 = piece
    qa = a * a + (1.0 - a) ** 2
    qb = 2.0 * (a * (b - cx) + (1.0 - a) * (-b - cy))
    qc = (b - cx) ** 2 + (-b - cy) ** 2 - r * r
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    tangent = root / qa < eps
    hits = []
    for t in ({-qb / (2.0 * qa)} if tangent
              else {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)}):
        x = b + a * t
        y = -b + (1.0 - a) * t
        theta = math.atan2(y - cy, x - cx) % (2.0 * math.pi)
        ang_eps = eps / max(r, 1.0)
        if (t0 - ang_eps <= theta <= t1 + ang_eps
                or t0 - ang_eps <= theta + 2.0 * math.pi <= t1 + ang_eps):
            hits.append((x, y, tangent))
    return hits


def line_grid_intersections(grid: ExtendedParetoGrid, line: AdmissibleLine
                            ) -> list[GridIntersection]:
    """All crossings of the line with every arc, coincident points merged
    so a double point carries every arc through it."""
    raw = []
    for arc in grid.arcs:
        for piece in arc.pieces:
            for x, y, tangent in _piece_line_points(piece, line):
                raw.append((x, y, arc.arc_id, tangent))
    raw.sort(key=lambda rec: (rec[0], rec[1]))
    merged: list[list] = []
    for x, y, arc_id, tangent in raw:
        for cluster in merged:
            if (abs(cluster[0] - x) <= 1e-9
                    and abs(cluster[1] - y) <= 1e-9):
                if arc_id not in cluster[2]:
                    cluster[2].append(arc_id)
                cluster[3] = cluster[3] or tangent
                break
        else:
            merged.append([x, y, [arc_id], tangent])
    return [GridIntersection(x, y, tuple(sorted(ids)), tangent)
            for x, y, ids, tangent in merged]


# ---------------------------------------------------------------------------
# Position check and arc pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositionReport:
    """Which diagram coordinates found a matching grid intersection."""

    degree: int
    param: ParamPoint
    checked: int
    unmatched: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return not self.unmatched


def position_check(grid: ExtendedParetoGrid, bif: SimplicialBifiltration,
                   degree: int, p: ParamPoint, tol: float
                   ) -> PositionReport:
    """Every finite diagram coordinate must equal the normalized coordinate
    of some grid intersection, within tol."""
    line = AdmissibleLine(p)
    witness = [line.w_of_x(rec.x)
               for rec in line_grid_intersections(grid, line)]
    diagram = diagram_at(bif, p, degree)
    checked = 0
    unmatched = []
    for point in diagram.points:
        coords = [point.u] if not point.is_proper else [point.u, point.v]
        for w in coords:
            checked += 1
            if not any(abs(w - cand) <= tol for cand in witness):
                unmatched.append(w)
    return PositionReport(degree, p, checked, tuple(sorted(unmatched)))


@dataclass(frozen=True)
class ArcPairing:
    """Grid arcs carrying one diagram point's birth and death."""

    birth: float
    death: float  # math.inf for improper points
    birth_arc: Optional[str]
    death_arc: Optional[str]  # None when improper or unresolved
    ambiguous: bool


def _arcs_for_coordinate(records, line: AdmissibleLine, w: float,
                         degree: int, sign: int, grid: ExtendedParetoGrid,
                         tol: float):
    found = []
    for rec in records:
        if abs(line.w_of_x(rec.x) - w) <= tol:
            for arc_id in rec.arc_ids:
                arc = grid.arc(arc_id)
                if arc.degree == degree and arc.sign == sign \
                        and arc_id not in found:
                    found.append(arc_id)
    return found


def pair_arcs(grid: ExtendedParetoGrid, bif: SimplicialBifiltration,
              degree: int, p: ParamPoint, tol: float) -> list[ArcPairing]:
    """Assign each diagram point's birth to a (degree, +1) arc and its
    death to a (degree, -1) arc through the matching intersections;
    assignments meeting several arcs are flagged, not resolved."""
    line = AdmissibleLine(p)
    records = line_grid_intersections(grid, line)
    diagram = diagram_at(bif, p, degree)
    pairings = []
    for point in diagram.points:
        births = _arcs_for_coordinate(records, line, point.u, degree, +1,
                                      grid, tol)
        if point.is_proper:
            deaths = _arcs_for_coordinate(records, line, point.v, degree,
                                          -1, grid, tol)
        else:
            deaths = []
        ambiguous = len(births) != 1 or (point.is_proper
                                         and len(deaths) != 1)
        pairings.append(ArcPairing(
            point.u, point.v if point.is_proper else math.inf,
            births[0] if len(births) == 1 else None,
            deaths[0] if len(deaths) == 1 else None,
            ambiguous))
    return pairings


def annihilation_catalog(grid: ExtendedParetoGrid
                         ) -> list[tuple[float, float]]:
    """Value-plane points where a birth arc and a death arc of the same
    degree share an endpoint; the only places a diagram point can reach
    or leave the diagonal under line motion."""
    return list(grid.annihilation_crossings)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _sample_piece(piece: tuple, samples: int, extent: float):
    shape = piece[0]
    if shape == "arc":
        _, cx, cy, r, t0, t1 = piece
        return [[cx + r * math.cos(t0 + (t1 - t0) * k / (samples - 1)),
                 cy + r * math.sin(t0 + (t1 - t0) * k / (samples - 1))]
                for k in range(samples)]
    if shape == "vseg":
        _, x, y0, y1 = piece
        return [[x, y0], [x, y1]]
    if shape == "hseg":
        _, x0, x1, y = piece
        return [[x0, y], [x1, y]]
    if shape == "vline":
        _, x, y0 = piece
        return [[x, y0], [x, y0 + extent]]
    _, x0, y = piece
    return [[x0, y], [x0 + extent, y]]


def grid_to_dict(grid: ExtendedParetoGrid, samples: int = 33,
                 extent: float = 3.0) -> dict:
    """Plot-ready dump: polylines for every contour and arc, plus the
    double points and annihilation crossings."""
    return {
        "name": grid.name,
        "contours": [{
            "id": c.contour_id,
            "kind": c.kind,
            "provenance": c.provenance,
            "polyline": _sample_piece(c.geometry, samples, extent),
        } for c in grid.contours],
        "arcs": [{
            "id": a.arc_id,
            "degree": a.degree,
            "sign": a.sign,
            "provenance": a.provenance,
            "polyline": [pt for piece in a.pieces
                         for pt in _sample_piece(piece, samples, extent)],
        } for a in grid.arcs],
        "double_points": [list(dp) for dp in grid.double_points],
        "annihilation_crossings": [list(xy)
                                   for xy in grid.annihilation_crossings],
    }


def save_grid(grid: ExtendedParetoGrid, path, samples: int = 33,
              extent: float = 3.0) -> None:
    with open(path, "w") as fh:
        json.dump(grid_to_dict(grid, samples, extent), fh, sort_keys=True)
        fh.write("\n")


def save_intersections(records: Sequence[GridIntersection], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "arcs", "tangent"])
        for rec in records:
            writer.writerow([repr(rec.x), repr(rec.y),
                             ";".join(rec.arc_ids), int(rec.tangent)])
