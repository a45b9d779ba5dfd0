"""Built-in example bifiltrations: meshes at configurable resolution.

Three families:

* ``monodromy_basic`` — a planar rectangle with ``f1 = x`` and a piecewise
  linear ``f2`` whose degree-0 diagram exhibits monodromy around the
  parameter pair (1/4, 0).
* ``torus`` — a torus of radii (1.5, 0.5) around the y axis, filtered by
  ``(x, z)``; its coordinate extremes sit at ±1 and ±2.
* ``two_spheres`` — two disjoint round spheres of radius 4 whose images in
  the value plane are circles centered at (0, 0) and (-1, 1.25).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bifiltration import SimplicialBifiltration

EXAMPLE_IDS = ("monodromy_basic", "torus", "two_spheres")


@dataclass(frozen=True)
class ExampleSpec:
    """Recipe for a built-in mesh.

    ``resolution`` scales mesh density (the rectangle uses an x spacing of
    ``1/(4*resolution)``; the surfaces use about ``resolution`` samples per
    angular period).  ``bounds`` optionally overrides the rectangle's x
    range for ``monodromy_basic``.
    """

    id: str
    resolution: int = 32
    bounds: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.id not in EXAMPLE_IDS:
            raise ValueError(f"unknown example {self.id!r}; "
                             f"choose from {EXAMPLE_IDS}")
        if self.resolution < 8:
            raise ValueError("resolution must be at least 8")
        if self.bounds is not None:
            x0, x1 = self.bounds
            if not (math.isfinite(x0) and math.isfinite(x1) and x0 < x1):
                raise ValueError("bounds must be a finite increasing pair")


def monodromy_f2(x, y):
    """The second filtering value of the monodromy example, analytically.

    Piecewise linear in y with creases at y = 0, 1, 2, 3 where it equals
    -x, -x+1, -2x, -2x+5/4 respectively; slope -1 in y outside [0, 3].
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.select(
        [y <= 0.0, y <= 1.0, y <= 2.0, y <= 3.0],
        [-x - y,
         -x + y,
         -x * y + 2.0 - y,
         -2.0 * x + 1.25 * (y - 2.0)],
        default=-2.0 * x + 1.25 - (y - 3.0),
    )
    if out.ndim == 0:
        return float(out)
    return out


# y positions of the rectangle mesh rows: every crease of f2 plus the domain
# edges.  The top edge sits at y = 6 so the component born there predates
# the two swapping components for every parameter probed by the demos
# (births stay negative on the scan window), keeping it the essential class.
_MONODROMY_ROWS = (-1.0, 0.0, 1.0, 2.0, 3.0, 6.0)


def _strip_triangles(nx: int, ny: int, wrap_x: bool = False,
                     wrap_y: bool = False) -> list[tuple[int, int, int]]:
    """Quad-split triangles of an nx-by-ny index grid (optionally wrapped)."""
    tris = []
    imax = nx if wrap_x else nx - 1
    jmax = ny if wrap_y else ny - 1

    def vid(i, j):
        return (j % ny) * nx + (i % nx)

    for j in range(jmax):
        for i in range(imax):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((a, b, c))
            tris.append((b, d, c))
    return tris


def _monodromy_mesh(spec: ExampleSpec) -> SimplicialBifiltration:
    x0, x1 = spec.bounds if spec.bounds is not None else (-5.0, 5.0)
    step = 1.0 / (4.0 * spec.resolution)
    n_cols = int(round((x1 - x0) / step)) + 1
    xs = x0 + step * np.arange(n_cols)
    ys = np.array(_MONODROMY_ROWS)
    gx, gy = np.meshgrid(xs, ys)
    f1 = gx.ravel()
    f2 = monodromy_f2(gx, gy).ravel()
    tris = _strip_triangles(n_cols, len(ys))
    return SimplicialBifiltration(
        np.column_stack([f1, f2]), tris,
        name=f"monodromy_basic(res={spec.resolution})", close_faces=True,
        meta={"example": "monodromy_basic", "resolution": spec.resolution,
              "max_edge": float(step)})


def _torus_mesh(spec: ExampleSpec) -> SimplicialBifiltration:
    n = 4 * ((spec.resolution + 3) // 4)
    theta = 2.0 * np.pi * np.arange(n) / n
    phi = 2.0 * np.pi * np.arange(n) / n
    gt, gp = np.meshgrid(theta, phi)
    radial = 1.5 + 0.5 * np.cos(gp)
    x = (radial * np.cos(gt)).ravel()
    z = (radial * np.sin(gt)).ravel()
    tris = _strip_triangles(n, n, wrap_x=True, wrap_y=True)
    max_edge = 2.0 * 2.0 * np.pi / n  # outer-equator step in the value plane
    return SimplicialBifiltration(
        np.column_stack([x, z]), tris,
        name=f"torus(res={spec.resolution})", close_faces=True,
        meta={"example": "torus", "resolution": spec.resolution,
              "max_edge": float(max_edge)})


def _sphere_patch(center: tuple[float, float, float], radius: float,
                  n_theta: int, n_phi: int, base: int):
    """Vertices (as (x, z) value pairs) and triangles of one UV sphere."""
    cx, cy, cz = center
    values = [(cx, cz)]  # north pole (along +y, so its image is the center)
    for j in range(1, n_phi):
        p = np.pi * j / n_phi
        for i in range(n_theta):
            t = 2.0 * np.pi * i / n_theta
            values.append((cx + radius * np.sin(p) * np.cos(t),
                           cz + radius * np.sin(p) * np.sin(t)))
    values.append((cx, cz))  # south pole
    south = len(values) - 1

    def rid(j, i):
        return 1 + (j - 1) * n_theta + (i % n_theta)

    tris = []
    for i in range(n_theta):
        tris.append((0, rid(1, i), rid(1, i + 1)))
        tris.append((south, rid(n_phi - 1, i + 1), rid(n_phi - 1, i)))
    for j in range(1, n_phi - 1):
        for i in range(n_theta):
            a, b = rid(j, i), rid(j, i + 1)
            c, d = rid(j + 1, i), rid(j + 1, i + 1)
            tris.append((a, b, c))
            tris.append((b, d, c))
    tris = [(base + p, base + q, base + r) for p, q, r in tris]
    return values, tris


def _two_spheres_mesh(spec: ExampleSpec) -> SimplicialBifiltration:
    n_theta = 4 * ((spec.resolution + 3) // 4)
    n_phi = max(4, 2 * (n_theta // 4))
    # disjoint in space via the y offset; images overlap in the value plane
    values_a, tris_a = _sphere_patch((0.0, 0.0, 0.0), 4.0, n_theta, n_phi, 0)
    values_b, tris_b = _sphere_patch((-1.0, 20.0, 1.25), 4.0, n_theta, n_phi,
                                     len(values_a))
    max_edge = 4.0 * 2.0 * np.pi / n_theta
    return SimplicialBifiltration(
        values_a + values_b, tris_a + tris_b,
        name=f"two_spheres(res={spec.resolution})", close_faces=True,
        meta={"example": "two_spheres", "resolution": spec.resolution,
              "max_edge": float(max_edge)})


def generate(spec: ExampleSpec) -> SimplicialBifiltration:
    """Build the mesh described by ``spec``."""
    builder = {"monodromy_basic": _monodromy_mesh,
               "torus": _torus_mesh,
               "two_spheres": _two_spheres_mesh}[spec.id]
    return builder(spec)


def example(example_id: str, resolution: int = 32,
            bounds: Optional[tuple[float, float]] = None
            ) -> SimplicialBifiltration:
    """Convenience wrapper around :func:`generate`."""
    return generate(ExampleSpec(example_id, resolution, bounds))


def value_shift(bif: SimplicialBifiltration,
                offset: float) -> SimplicialBifiltration:
    """Copy with the value components shifted by (offset, -offset).

    Every slice of the result at (a, b) equals the slice of ``bif`` at
    (a, b - offset), so all diagrams are reparameterized copies: the pair
    (bif, value_shift(bif, t)) is transportable over any region where
    ``bif`` itself is, and the sup-norm gap between the two functions is
    exactly |offset|.  This is the canonical way to build a comparison
    pair for whole-region transported computations: a generic pointwise
    perturbation of a coarse mesh routinely creates short-lived diagram
    points that appear and vanish inside the region, which makes the
    perturbed function untransportable there.
    """
    vv = bif.vertex_values
    return bif.with_values(
        np.column_stack([vv[:, 0] + offset, vv[:, 1] - offset]),
        name=bif.name + f"+shift({offset:g})")


def perturbed(bif: SimplicialBifiltration, magnitude: float,
              seed: int = 0) -> SimplicialBifiltration:
    """A smooth deterministic perturbation of the vertex values.

    Both components move by at most ``magnitude`` (sup norm); distinct
    seeds give different smooth offset fields.  Note that the perturbed
    copy is generally *not* transportable over a whole region (see
    :func:`value_shift`); it is meant for slice-wise comparisons.
    """
    if magnitude < 0:
        raise ValueError("magnitude must be nonnegative")
    f1 = bif.vertex_values[:, 0]
    f2 = bif.vertex_values[:, 1]
    phase = 2.0 * np.pi * ((seed * 0.6180339887498949) % 1.0)
    d1 = magnitude * np.sin(1.3 * f1 - 0.7 * f2 + phase)
    d2 = magnitude * np.cos(0.9 * f1 + 1.1 * f2 - 0.5 * phase)
    return bif.with_values(np.column_stack([f1 + d1, f2 + d2]),
                           name=bif.name + f"+delta({magnitude:g},{seed})")
