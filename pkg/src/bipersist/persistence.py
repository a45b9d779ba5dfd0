"""Persistence diagrams of slice filtrations, with independent rank oracles.

Homology is simplicial over the two-element field.  ``compute_diagram`` runs
the standard boundary-matrix reduction (union-find in degree 0); the
``persistent_betti`` / ``multiplicity`` pair re-derives the same numbers by
direct rank computations so the two routes can be checked against each other.
"""
from __future__ import annotations

import csv
import math
import weakref
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .bifiltration import ParamPoint, SliceFiltration


class _DiagonalType:
    """The distinguished diagonal element of extended diagrams (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Diagonal"


DIAGONAL = _DiagonalType()


@dataclass(frozen=True)
class DiagramPoint:
    """A non-diagonal diagram point: birth ``u``, death ``v`` (inf = improper)."""

    u: float
    v: float

    def __post_init__(self):
        if not math.isfinite(self.u):
            raise ValueError(f"birth must be finite, got {self.u!r}")
        if not self.u < self.v:
            raise ValueError(f"need birth < death, got ({self.u!r}, {self.v!r})")

    @classmethod
    def proper(cls, u: float, v: float) -> "DiagramPoint":
        p = cls(float(u), float(v))
        if not p.is_proper:
            raise ValueError("proper points need a finite death")
        return p

    @classmethod
    def improper(cls, u: float) -> "DiagramPoint":
        return cls(float(u), math.inf)

    @property
    def is_proper(self) -> bool:
        return math.isfinite(self.v)

    def __repr__(self):
        if self.is_proper:
            return f"Proper({self.u:g}, {self.v:g})"
        return f"Improper({self.u:g})"


@dataclass(frozen=True)
class PersistenceDiagram:
    """Degree-tagged finite multiset of diagram points.

    The diagonal is implicit (infinite multiplicity) and never stored.
    ``points`` is kept sorted by (birth, death) so equal diagrams compare
    equal structurally.
    """

    degree: int
    points: tuple[DiagramPoint, ...]
    param: Optional[ParamPoint] = None

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        ordered = tuple(sorted(self.points, key=lambda p: (p.u, p.v)))
        object.__setattr__(self, "points", ordered)

    def propers(self) -> tuple[DiagramPoint, ...]:
        return tuple(p for p in self.points if p.is_proper)

    def impropers(self) -> tuple[DiagramPoint, ...]:
        return tuple(p for p in self.points if not p.is_proper)

    def count(self, point: DiagramPoint) -> int:
        """Multiset multiplicity of ``point`` among the stored points."""
        return sum(1 for p in self.points if p == point)

    def __len__(self):
        return len(self.points)

    def same_points(self, other: "PersistenceDiagram") -> bool:
        return self.degree == other.degree and self.points == other.points


# ---------------------------------------------------------------------------
# Reduction pipeline
# ---------------------------------------------------------------------------

def _native_faces(bif):
    """Simplex faces as plain Python lists (fast scalar access in hot loops)."""
    return bif._memo(("native",), lambda: (
        [(int(a), int(b)) for a, b in bif.edges],
        [tuple(int(g) for g in row) for row in bif.tri_faces],
        [tuple(int(g) for g in row) for row in bif.tet_faces],
    ))


def _uf_pass(sf: SliceFiltration):
    """Degree-0 pairs via union-find with the elder rule.

    Returns ``(proper_value_pairs, improper_births, creator_edges)`` where
    ``creator_edges`` are the local edge ids whose insertion closed a cycle
    (the degree-1 creators).
    """
    bif = sf.source
    off = bif.offsets
    n = bif.n_vertices
    vals = sf.simplex_values.tolist()
    pos = sf.positions
    vpos = pos[:n].tolist()
    edges_list, _, _ = _native_faces(bif)
    edge_val_off = int(off[1])

    parent = list(range(n))
    rep = list(range(n))  # oldest vertex (min filtration position) per root
    pairs0: list[tuple[float, float]] = []
    creator_edges: list[int] = []
    edge_order = np.argsort(pos[off[1]:off[2]]).tolist()
    for el in edge_order:
        va, vb = edges_list[el]
        while parent[va] != va:
            parent[va] = parent[parent[va]]
            va = parent[va]
        while parent[vb] != vb:
            parent[vb] = parent[parent[vb]]
            vb = parent[vb]
        if va == vb:
            creator_edges.append(el)
            continue
        if vpos[rep[va]] > vpos[rep[vb]]:
            va, vb = vb, va
        pairs0.append((vals[rep[vb]], vals[edge_val_off + el]))
        parent[vb] = va
    imps0 = sorted(vals[rep[r]] for r in range(n) if parent[r] == r)
    return pairs0, imps0, frozenset(creator_edges)


def _reduction_pass(sf: SliceFiltration) -> dict:
    """Pairs and essential creators for degrees 1–3 by column reduction.

    Boundary columns are bitmask integers (bit r = the r-th face in
    filtration order); the classical uniqueness of reduced lows makes the
    output independent of reduction choices.
    """
    bif = sf.source
    pos = sf.positions
    vals = sf.simplex_values.tolist()
    off = bif.offsets
    m1, m2, m3 = len(bif.edges), len(bif.tris), len(bif.tets)
    _, tri_faces, tet_faces = _native_faces(bif)

    def reduce_columns(face_list, face_off, n_faces, col_off, n_cols):
        fpos = pos[face_off:face_off + n_faces]
        frow_arr = np.empty(n_faces, dtype=np.int64)
        frow_arr[np.argsort(fpos)] = np.arange(n_faces)
        frow = frow_arr.tolist()
        face_by_row = [0] * n_faces
        for local, r in enumerate(frow):
            face_by_row[r] = local
        col_order = np.argsort(pos[col_off:col_off + n_cols]).tolist()
        lows: dict[int, int] = {}
        pairs: list[tuple[int, int]] = []
        creators: list[int] = []
        for cl in col_order:
            mask = 0
            for fg in face_list[cl]:
                mask ^= 1 << frow[fg - face_off]
            low = -1
            while mask:
                low = mask.bit_length() - 1
                other = lows.get(low)
                if other is None:
                    break
                mask ^= other
            if mask:
                lows[low] = mask
                pairs.append((face_by_row[low], cl))
            else:
                creators.append(cl)
        return pairs, creators

    pairs1_idx, creator_tris = (reduce_columns(tri_faces, int(off[1]), m1,
                                               int(off[2]), m2)
                                if m2 else ([], []))
    _, _, creator_edges = _uf_table(sf)
    destroyed_edges = {e for e, _ in pairs1_idx}
    assert destroyed_edges <= creator_edges, \
        "reduction paired a non-creator edge"
    pairs1 = [(vals[off[1] + e], vals[off[2] + t]) for e, t in pairs1_idx]
    imps1 = sorted(vals[off[1] + e] for e in creator_edges - destroyed_edges)

    pairs2_idx, creator_tets = (reduce_columns(tet_faces, int(off[2]), m2,
                                               int(off[3]), m3)
                                if m3 else ([], []))
    destroyed_tris = {t for t, _ in pairs2_idx}
    pairs2 = [(vals[off[2] + t], vals[off[3] + s]) for t, s in pairs2_idx]
    imps2 = sorted(vals[off[2] + t]
                   for t in set(creator_tris) - destroyed_tris)
    imps3 = sorted(vals[off[3] + s] for s in creator_tets)
    return {1: (pairs1, imps1), 2: (pairs2, imps2), 3: ([], imps3)}


_NOPARAM_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _cached(sf: SliceFiltration, tag: str, build):
    if sf.param is not None:
        key = (tag, sf.param.a, sf.param.b)
        return sf.source._memo(key, build)
    store = _NOPARAM_CACHE.setdefault(sf, {})
    if tag not in store:
        store[tag] = build()
    return store[tag]


def _uf_table(sf: SliceFiltration):
    return _cached(sf, "uf", lambda: _uf_pass(sf))


def _reduction_table(sf: SliceFiltration) -> dict:
    return _cached(sf, "red", lambda: _reduction_pass(sf))


def compute_diagram(sf: SliceFiltration, degree: int) -> PersistenceDiagram:
    """Degree-``degree`` persistence diagram of a slice filtration.

    Proper points are birth–death pairs with strictly positive lifespan;
    improper points are essential classes (never destroyed).  Degrees above
    the complex dimension yield an empty diagram.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree == 0:
        propers, impropers, _ = _uf_table(sf)
    else:
        propers, impropers = _reduction_table(sf).get(degree, ([], []))
    points = [DiagramPoint.proper(u, v) for u, v in propers if u < v]
    points.extend(DiagramPoint.improper(u) for u in impropers)
    return PersistenceDiagram(degree, tuple(points), sf.param)


def diagram_at(bif, p: ParamPoint, degree: int) -> PersistenceDiagram:
    """Diagram of ``bif`` sliced at ``p`` (cached per (a, b) on the complex)."""
    from .bifiltration import build_slice
    key = ("diagram", p.a, p.b, degree)
    return bif._memo(key, lambda: compute_diagram(build_slice(bif, p), degree))


# ---------------------------------------------------------------------------
# Independent rank oracles
# ---------------------------------------------------------------------------

def _gf2_rank(columns: Iterable[int]) -> int:
    """Rank over the two-element field of bitmask columns."""
    pivots: dict[int, int] = {}
    rank = 0
    for c in columns:
        while c:
            low = c.bit_length() - 1
            p = pivots.get(low)
            if p is None:
                pivots[low] = c
                rank += 1
                break
            c ^= p
    return rank


def persistent_betti(sf: SliceFiltration, degree: int, u: float,
                     v: float) -> int:
    """Rank of the map on degree-``degree`` homology from sublevel u to v.

    Computed directly as dim(Z_k(u) + B_k(v)) - dim B_k(v) by Gaussian
    elimination, independent of the reduction pipeline in
    ``compute_diagram``.
    """
    if not u < v:
        raise ValueError(f"need u < v, got u={u!r}, v={v!r}")
    k = degree
    if k < 0 or k > 3:
        return 0
    bif = sf.source
    values = sf.simplex_values
    off = bif.offsets
    nk = int(off[k + 1] - off[k])
    included = [i for i in range(nk) if values[off[k] + i] <= u]

    if k == 0:
        zbasis = [1 << i for i in included]
    else:
        faces = (None, bif.edge_faces, bif.tri_faces, bif.tet_faces)[k]
        face_off = int(off[k - 1])
        pivots: dict[int, tuple[int, int]] = {}
        zbasis = []
        for local in included:
            c = 0
            for fg in faces[local]:
                c ^= 1 << (int(fg) - face_off)
            combo = 1 << local
            while c:
                low = c.bit_length() - 1
                p = pivots.get(low)
                if p is None:
                    pivots[low] = (c, combo)
                    break
                c ^= p[0]
                combo ^= p[1]
            if not c:
                zbasis.append(combo)

    if k + 1 <= 3:
        cofaces = (bif.edge_faces, bif.tri_faces, bif.tet_faces)[k]
        n_next = int(off[k + 2] - off[k + 1])
        face_off = int(off[k])
        bcols = []
        for local in range(n_next):
            if values[off[k + 1] + local] <= v:
                c = 0
                for fg in cofaces[local]:
                    c ^= 1 << (int(fg) - face_off)
                bcols.append(c)
    else:
        bcols = []

    rank_b = _gf2_rank(bcols)
    rank_zb = _gf2_rank(zbasis + bcols)
    return rank_zb - rank_b


def betti_number(sf: SliceFiltration, degree: int) -> int:
    """Betti number of the full complex via the rank oracle."""
    top = float(np.max(sf.simplex_values))
    return persistent_betti(sf, degree, top, top + 1.0)


def _min_value_gap(sf: SliceFiltration) -> float:
    distinct = np.unique(sf.simplex_values)
    if len(distinct) < 2:
        return 1.0
    return float(np.min(np.diff(distinct)))


def multiplicity(sf: SliceFiltration, degree: int,
                 point: DiagramPoint) -> int:
    """Multiplicity of ``point`` via the alternating rank formulas.

    Uses the four-corner formula for proper points and the two-term limit
    formula for improper ones, with the probe offset a quarter of the
    smallest relevant gap — strictly inside the half-gap window where the
    finite value set makes the formulas stationary.
    """
    if point is DIAGONAL or not isinstance(point, DiagramPoint):
        raise ValueError("multiplicity is defined for non-diagonal points")
    gap = _min_value_gap(sf)
    b = persistent_betti
    if point.is_proper:
        eps = 0.25 * min(gap, point.v - point.u)
        u, v = point.u, point.v
        return (b(sf, degree, u + eps, v - eps)
                - b(sf, degree, u - eps, v - eps)
                - b(sf, degree, u + eps, v + eps)
                + b(sf, degree, u - eps, v + eps))
    eps = 0.25 * gap
    v_big = float(np.max(sf.simplex_values)) + 2.0
    u = point.u
    return (b(sf, degree, u + eps, v_big)
            - b(sf, degree, u - eps, v_big))


# ---------------------------------------------------------------------------
# Diagram CSV interchange
# ---------------------------------------------------------------------------

def save_diagram_csv(path, diagrams: Iterable[PersistenceDiagram]) -> None:
    """Write diagrams as CSV rows ``degree,u,v`` (``v = inf`` if improper)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["degree", "u", "v"])
        for diagram in diagrams:
            for p in diagram.points:
                writer.writerow([diagram.degree, repr(p.u),
                                 "inf" if not p.is_proper else repr(p.v)])


def load_diagram_csv(path) -> list[PersistenceDiagram]:
    """Read diagrams written by :func:`save_diagram_csv`, grouped by degree."""
    by_degree: dict[int, list[DiagramPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["degree", "u", "v"]:
            raise ValueError(f"unexpected diagram CSV header: {header}")
        for row in reader:
            if not row:
                continue
            k, u, v = int(row[0]), float(row[1]), float(row[2])
            point = (DiagramPoint.improper(u) if math.isinf(v)
                     else DiagramPoint.proper(u, v))
            by_degree.setdefault(k, []).append(point)
    return [PersistenceDiagram(k, tuple(pts))
            for k, pts in sorted(by_degree.items())]
