"""Shared builders, fixtures, and hypothesis strategies for the suite."""
import numpy as np
import pytest
from hypothesis import strategies as st

from bipersist import (
    DiagramPoint,
    ParamPoint,
    PersistenceDiagram,
    SimplicialBifiltration,
    example,
)

HALF = ParamPoint(0.5, 0.0)


# ---------------------------------------------------------------------------
# Small-complex builders
# ---------------------------------------------------------------------------

def build_complex(vertices, simplices=(), name="test"):
    """Bifiltration from (f1, f2) vertex pairs and top simplices.

    Faces are completed automatically, so only maximal simplices need to
    be listed; isolated vertices exist by virtue of the vertex array.
    """
    return SimplicialBifiltration(list(vertices),
                                  [tuple(s) for s in simplices],
                                  name=name, close_faces=True)


def monotone_complex(values, simplices=(), name="test"):
    """Complex whose slice at (1/2, 0) carries exactly ``values``.

    With f1 = f2 = w the slice value at (1/2, 0) is max(w, w) = w, so the
    lower-star filtration of the slice reproduces the requested values.
    """
    return build_complex([(float(w), float(w)) for w in values],
                         simplices, name=name)


def cycle_complex(values, name="cycle"):
    """Cycle graph v0 - v1 - ... - v_{n-1} - v0 with the given values."""
    n = len(values)
    edges = [(i, (i + 1) % n) for i in range(n)]
    return monotone_complex(values, edges, name=name)


def proper(u, v):
    return DiagramPoint.proper(u, v)


def improper(u):
    return DiagramPoint.improper(u)


def diagram(degree, pts):
    return PersistenceDiagram(degree, tuple(pts))


# ---------------------------------------------------------------------------
# Random generators (numpy Generator based; deterministic per seed)
# ---------------------------------------------------------------------------

def random_diagram(rng, degree=0, max_points=6, improper_p=0.3):
    n = int(rng.integers(0, max_points + 1))
    pts = []
    for _ in range(n):
        if rng.random() < improper_p:
            pts.append(DiagramPoint.improper(round(float(rng.uniform(-3, 3)), 3)))
        else:
            u = round(float(rng.uniform(-3, 3)), 3)
            length = round(float(rng.uniform(0.001, 4.0)), 3)
            pts.append(DiagramPoint.proper(u, u + max(length, 0.001)))
    return PersistenceDiagram(degree, tuple(pts))


def random_complex(rng, max_vertices=8, max_top=10, max_simplices=50):
    """Random small complex with at most ``max_simplices`` total simplices."""
    while True:
        nv = int(rng.integers(1, max_vertices + 1))
        tops = set()
        for _ in range(int(rng.integers(0, max_top + 1))):
            dim = int(rng.integers(1, 4))
            if nv <= dim:
                continue
            tops.add(tuple(sorted(
                int(i) for i in rng.choice(nv, size=dim + 1, replace=False))))
        vertices = [(round(float(rng.uniform(-2, 2)), 4),
                     round(float(rng.uniform(-2, 2)), 4)) for _ in range(nv)]
        bif = build_complex(vertices, tops, name="random")
        if bif.n_simplices <= max_simplices:
            return bif


def random_slice_values(rng, bif):
    return np.round(rng.uniform(-2.0, 2.0, size=bif.n_vertices), 4)


# ---------------------------------------------------------------------------
# Hypothesis strategies (dyadic floats so exact identities hold bit-for-bit)
# ---------------------------------------------------------------------------

def dyadics(lo=-4.0, hi=4.0, denom=64):
    return st.integers(int(lo * denom), int(hi * denom)).map(
        lambda k: k / denom)


def param_points(a_lo=4, a_hi=60, b_span=32, denom=64):
    return st.tuples(st.integers(a_lo, a_hi),
                     st.integers(-b_span, b_span)).map(
        lambda t: ParamPoint(t[0] / denom, t[1] / denom))


# ---------------------------------------------------------------------------
# Built-in meshes (session-scoped: diagram memos accumulate across tests)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def mono12():
    return example("monodromy_basic", resolution=12, bounds=(-1.25, 1.5))


@pytest.fixture(scope="session")
def mono16():
    return example("monodromy_basic", resolution=16, bounds=(-1.25, 1.5))


@pytest.fixture(scope="session")
def mono32():
    return example("monodromy_basic", resolution=32, bounds=(-1.25, 1.5))


@pytest.fixture(scope="session")
def torus12():
    return example("torus", resolution=12)


@pytest.fixture(scope="session")
def torus64():
    return example("torus", resolution=64)


@pytest.fixture(scope="session")
def spheres16():
    return example("two_spheres", resolution=16)


@pytest.fixture(scope="session")
def spheres32():
    return example("two_spheres", resolution=32)
