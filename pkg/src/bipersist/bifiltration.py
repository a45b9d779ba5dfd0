"""Simplicial complexes filtered by two scalar fields, and their line slices.

A bifiltration here is a finite simplicial complex (dimension <= 3) whose
vertices carry a pair of values ``(f1, f2)``.  Every positive-slope line in
the value plane, named by a pair ``(a, b)`` with ``0 < a < 1``, induces a
single-parameter lower-star filtration through the normalized slice value

    min(a, 1-a) * max((f1 - b) / a, (f2 + b) / (1 - a))

which is the quantity all downstream persistence computations consume.
"""
from __future__ import annotations

import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

MAX_DIM = 3


class ComplexError(ValueError):
    """Structurally invalid simplicial input (bad indices, duplicates, holes)."""


@dataclass(frozen=True)
class ParamPoint:
    """A point (a, b) of the open parameter strip (0, 1) x R.

    Each pair names the line with direction ``(a, 1 - a)`` through
    ``(b, -b)`` in the value plane, and thereby one slice filtration.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and 0.0 < self.a < 1.0):
            raise ValueError(f"a must lie strictly between 0 and 1, got {self.a!r}")
        if not math.isfinite(self.b):
            raise ValueError(f"b must be finite, got {self.b!r}")

    @property
    def ra(self) -> float:
        """Scale applied to the ``f1 - b`` term: ``min(a, 1-a) / a``."""
        return min(self.a, 1.0 - self.a) / self.a

    @property
    def rb(self) -> float:
        """Scale applied to the ``f2 + b`` term: ``min(a, 1-a) / (1 - a)``."""
        return min(self.a, 1.0 - self.a) / (1.0 - self.a)

    def line_point(self, t: float) -> tuple[float, float]:
        """Point of the value-plane line at parameter ``t``."""
        return (self.a * t + self.b, (1.0 - self.a) * t - self.b)


def slice_value(f1: float, f2: float, p: ParamPoint) -> float:
    """Normalized slice value of a single value pair at parameter ``p``."""
    return max((f1 - p.b) * p.ra, (f2 + p.b) * p.rb)


def _canonical_simplices(simplices: Iterable[Sequence[int]], n_vertices: int,
                         close_faces: bool):
    """Validate, optionally close, and bucket simplices by dimension."""
    seen: set[tuple[int, ...]] = set()
    by_dim: list[set[tuple[int, ...]]] = [set() for _ in range(MAX_DIM + 1)]
    for s in simplices:
        t = tuple(int(i) for i in s)
        if len(t) == 0 or len(t) > MAX_DIM + 1:
            raise ComplexError(f"simplex {t} has unsupported dimension")
        if len(set(t)) != len(t):
            raise ComplexError(f"simplex {t} repeats a vertex")
        for i in t:
            if not (0 <= i < n_vertices):
                raise ComplexError(f"simplex {t} references missing vertex {i}")
        t = tuple(sorted(t))
        if t in seen:
            raise ComplexError(f"duplicate simplex {t}")
        seen.add(t)
        by_dim[len(t) - 1].add(t)
    # every vertex participates as a 0-simplex
    for i in range(n_vertices):
        by_dim[0].add((i,))
    if close_faces:
        for d in range(MAX_DIM, 0, -1):
            for s in by_dim[d]:
                for f in combinations(s, d):
                    by_dim[d - 1].add(f)
    else:
        for d in range(MAX_DIM, 0, -1):
            for s in by_dim[d]:
                for f in combinations(s, d):
                    if f not in by_dim[d - 1]:
                        raise ComplexError(
                            f"face {f} of {s} is missing (load with face closure?)")
    return by_dim


class SimplicialBifiltration:
    """A finite simplicial complex with two filtering values per vertex.

    Instances are immutable after construction (the only internal mutation is
    a private memo of computed diagrams).  Simplices are stored bucketed by
    dimension with a canonical global index: vertices first, then edges,
    triangles and tetrahedra, each bucket sorted lexicographically.  The
    global index is the deterministic tie-break used by slice filtrations.
    """

    def __init__(self, vertex_values, simplices: Iterable[Sequence[int]] = (),
                 name: str = "", *, close_faces: bool = False,
                 meta: Optional[dict] = None):
        values = np.asarray(vertex_values, dtype=float)
        if values.ndim != 2 or values.shape[1] != 2:
            raise ComplexError("vertex_values must have shape (n, 2)")
        if values.shape[0] == 0:
            raise ComplexError("complex must be nonempty")
        if not np.all(np.isfinite(values)):
            raise ComplexError("vertex values must be finite")
        self.vertex_values = values
        self.vertex_values.setflags(write=False)
        self.name = name
        self.meta = dict(meta or {})

        by_dim = _canonical_simplices(simplices, len(values), close_faces)
        self.verts = np.arange(len(values), dtype=np.int64).reshape(-1, 1)
        self.edges = self._bucket_array(by_dim[1], 2)
        self.tris = self._bucket_array(by_dim[2], 3)
        self.tets = self._bucket_array(by_dim[3], 4)

        counts = [len(values), len(self.edges), len(self.tris), len(self.tets)]
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self.n_simplices = int(self.offsets[-1])
        self.dims = np.repeat(np.arange(4), counts)

        edge_id = {tuple(e): i for i, e in enumerate(self.edges)}
        tri_id = {tuple(t): i for i, t in enumerate(self.tris)}
        # faces of each simplex, as global indices (used by boundary matrices)
        self.edge_faces = self.edges.copy()
        self.tri_faces = np.array(
            [[self.offsets[1] + edge_id[f] for f in combinations(t, 2)]
             for t in self.tris], dtype=np.int64).reshape(len(self.tris), 3)
        self.tet_faces = np.array(
            [[self.offsets[2] + tri_id[f] for f in combinations(t, 3)]
             for t in self.tets], dtype=np.int64).reshape(len(self.tets), 4)
        for arr in (self.edges, self.tris, self.tets, self.tri_faces,
                    self.tet_faces):
            arr.setflags(write=False)
        self._cache: OrderedDict = OrderedDict()

    @staticmethod
    def _bucket_array(bucket: set, width: int) -> np.ndarray:
        if not bucket:
            return np.empty((0, width), dtype=np.int64)
        return np.array(sorted(bucket), dtype=np.int64)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_values)

    def simplex_vertices(self, gid: int) -> tuple[int, ...]:
        """Vertex tuple of the simplex with the given global index."""
        d = int(self.dims[gid])
        row = gid - int(self.offsets[d])
        arr = (self.verts, self.edges, self.tris, self.tets)[d]
        return tuple(int(v) for v in arr[row])

    def same_complex(self, other: "SimplicialBifiltration") -> bool:
        return (self.n_vertices == other.n_vertices
                and self.edges.shape == other.edges.shape
                and self.tris.shape == other.tris.shape
                and self.tets.shape == other.tets.shape
                and bool(np.array_equal(self.edges, other.edges))
                and bool(np.array_equal(self.tris, other.tris))
                and bool(np.array_equal(self.tets, other.tets)))

    def with_values(self, vertex_values, name: str = "") -> "SimplicialBifiltration":
        """Copy of this complex carrying different vertex values."""
        out = SimplicialBifiltration.__new__(SimplicialBifiltration)
        values = np.asarray(vertex_values, dtype=float).copy()
        if values.shape != self.vertex_values.shape:
            raise ComplexError("replacement values must match vertex count")
        if not np.all(np.isfinite(values)):
            raise ComplexError("vertex values must be finite")
        values.setflags(write=False)
        out.vertex_values = values
        out.name = name or (self.name + "-mod")
        out.meta = dict(self.meta)
        for attr in ("verts", "edges", "tris", "tets", "offsets", "n_simplices",
                     "dims", "edge_faces", "tri_faces", "tet_faces"):
            setattr(out, attr, getattr(self, attr))
        out._cache = OrderedDict()
        return out

    # -- memo of per-parameter computations (diagrams, reductions) ----------
    _CACHE_MAX = 1024

    def _memo(self, key, build):
        cache = self._cache
        if key in cache:
            cache.move_to_end(key)
            return cache[key]
        value = build()
        cache[key] = value
        if len(cache) > self._CACHE_MAX:
            cache.popitem(last=False)
        return value

    def __repr__(self):
        return (f"SimplicialBifiltration({self.name or 'unnamed'}: "
                f"{self.n_vertices} vertices, {len(self.edges)} edges, "
                f"{len(self.tris)} triangles, {len(self.tets)} tetrahedra)")


@dataclass(frozen=True, eq=False)
class SliceFiltration:
    """A single-parameter lower-star filtration of a bifiltration.

    ``simplex_values[g]`` is the filtration value of global simplex ``g``
    (the max of its vertices' slice values) and ``order`` lists global
    indices sorted by ``(value, dimension, index)``.
    """

    source: SimplicialBifiltration
    param: Optional[ParamPoint]
    vertex_slice_values: np.ndarray
    simplex_values: np.ndarray
    order: np.ndarray
    _positions: np.ndarray = field(repr=False, default=None)

    @property
    def positions(self) -> np.ndarray:
        """Inverse permutation of ``order``: global index -> filtration rank."""
        pos = object.__getattribute__(self, "_positions")
        if pos is None:
            pos = np.empty_like(self.order)
            pos[self.order] = np.arange(len(self.order))
            object.__setattr__(self, "_positions", pos)
        return pos

    def value_of(self, gid: int) -> float:
        return float(self.simplex_values[gid])


def from_vertex_values(bif: SimplicialBifiltration, vertex_slice_values,
                       param: Optional[ParamPoint] = None) -> SliceFiltration:
    """Lower-star filtration of ``bif`` from explicit per-vertex values."""
    vv = np.asarray(vertex_slice_values, dtype=float)
    if vv.shape != (bif.n_vertices,):
        raise ComplexError("need one value per vertex")
    if not np.all(np.isfinite(vv)):
        raise ComplexError("slice values must be finite")
    values = np.empty(bif.n_simplices)
    values[: bif.offsets[1]] = vv
    if len(bif.edges):
        values[bif.offsets[1]:bif.offsets[2]] = np.max(vv[bif.edges], axis=1)
    if len(bif.tris):
        values[bif.offsets[2]:bif.offsets[3]] = np.max(vv[bif.tris], axis=1)
    if len(bif.tets):
        values[bif.offsets[3]:bif.offsets[4]] = np.max(vv[bif.tets], axis=1)
    gidx = np.arange(bif.n_simplices)
    order = np.lexsort((gidx, bif.dims, values))
    values.setflags(write=False)
    order.setflags(write=False)
    return SliceFiltration(bif, param, vv, values, order)


def build_slice(bif: SimplicialBifiltration, p: ParamPoint) -> SliceFiltration:
    """Slice filtration of ``bif`` along the line named by ``p``."""
    f1 = bif.vertex_values[:, 0]
    f2 = bif.vertex_values[:, 1]
    vv = np.maximum((f1 - p.b) * p.ra, (f2 + p.b) * p.rb)
    return from_vertex_values(bif, vv, p)


def sup_norm_slice_gap(bif_f: SimplicialBifiltration,
                       bif_g: SimplicialBifiltration, p: ParamPoint) -> float:
    """Sup over vertices of the slice-value difference at ``p``.

    Never exceeds ``sup_norm_diff(bif_f, bif_g)``: the slice construction is
    1-Lipschitz with respect to the max-norm on value pairs.
    """
    if not bif_f.same_complex(bif_g):
        raise ComplexError("slice gap needs two filtrations of one complex")
    va = build_slice(bif_f, p).vertex_slice_values
    vb = build_slice(bif_g, p).vertex_slice_values
    return float(np.max(np.abs(va - vb)))


def sup_norm_diff(bif_f: SimplicialBifiltration,
                  bif_g: SimplicialBifiltration) -> float:
    """Max-norm distance between the two vertex value fields."""
    if not bif_f.same_complex(bif_g):
        raise ComplexError("sup-norm difference needs a shared complex")
    return float(np.max(np.abs(bif_f.vertex_values - bif_g.vertex_values)))


# -- JSON interchange -------------------------------------------------------

def complex_to_dict(bif: SimplicialBifiltration) -> dict:
    simplices = []
    for arr in (bif.edges, bif.tris, bif.tets):
        simplices.extend([int(i) for i in row] for row in arr)
    return {
        "vertices": [{"f1": float(a), "f2": float(b)}
                     for a, b in bif.vertex_values],
        "simplices": simplices,
    }


def save_complex(bif: SimplicialBifiltration, path) -> None:
    with open(path, "w") as fh:
        json.dump(complex_to_dict(bif), fh, sort_keys=True)
        fh.write("\n")


def complex_from_dict(data: dict, name: str = "") -> SimplicialBifiltration:
    try:
        vertices = [(v["f1"], v["f2"]) for v in data["vertices"]]
        simplices = [tuple(s) for s in data.get("simplices", [])]
    except (KeyError, TypeError) as exc:
        raise ComplexError(f"malformed complex data: {exc}") from exc
    return SimplicialBifiltration(vertices, simplices, name=name,
                                  close_faces=True)


def load_complex(path) -> SimplicialBifiltration:
    """Read a complex from JSON, completing face closure."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ComplexError(f"invalid JSON in {path}: {exc}") from exc
    import os
    return complex_from_dict(data, name=os.path.basename(str(path)))
