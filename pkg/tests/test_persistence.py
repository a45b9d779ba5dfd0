"""Diagram computation checked against rank/multiplicity linear algebra."""
import math
from itertools import combinations

import numpy as np
import pytest

from bipersist import (
    DiagramPoint,
    bottleneck_distance,
    build_slice,
    compute_diagram,
    from_vertex_values,
    load_diagram_csv,
    multiplicity,
    persistent_betti,
    save_diagram_csv,
)
from conftest import (
    HALF,
    build_complex,
    cycle_complex,
    diagram,
    improper,
    monotone_complex,
    proper,
    random_complex,
    random_slice_values,
)

INF = math.inf


def slice_of(bif):
    return build_slice(bif, HALF)


@pytest.fixture(scope="module")
def one_min_circle():
    # square cycle with a single min (0) and a single max (2)
    return slice_of(cycle_complex([0.0, 1.0, 2.0, 1.0]))


@pytest.fixture(scope="module")
def two_min_circle():
    # hexagon cycle: minima 0 and 1, maxima 3 and 4, lower saddle value 2
    return slice_of(cycle_complex([0.0, 2.0, 1.0, 3.0, 4.0, 3.0]))


# ---------------------------------------------------------------------------
# compute_diagram
# ---------------------------------------------------------------------------

def test_circle_single_min_degree0(one_min_circle):
    assert compute_diagram(one_min_circle, 0).same_points(
        diagram(0, [improper(0.0)]))


def test_circle_single_min_degree1(one_min_circle):
    # the loop closes when the last edge appears, at the max value 2
    assert compute_diagram(one_min_circle, 1).same_points(
        diagram(1, [improper(2.0)]))


def test_circle_two_minima_degree0(two_min_circle):
    # second component born at the higher min 1, merged at the saddle 2
    assert compute_diagram(two_min_circle, 0).same_points(
        diagram(0, [improper(0.0), proper(1.0, 2.0)]))


def test_circle_two_minima_degree1(two_min_circle):
    assert compute_diagram(two_min_circle, 1).same_points(
        diagram(1, [improper(4.0)]))


def test_single_vertex():
    sf = slice_of(monotone_complex([0.75]))
    assert compute_diagram(sf, 0).same_points(diagram(0, [improper(0.75)]))


def test_degree_above_dimension_is_empty(one_min_circle):
    assert len(compute_diagram(one_min_circle, 2)) == 0
    assert len(compute_diagram(one_min_circle, 7)) == 0


def test_compute_diagram_deterministic(two_min_circle):
    d1 = compute_diagram(two_min_circle, 0)
    d2 = compute_diagram(two_min_circle, 0)
    assert d1.points == d2.points


# ---------------------------------------------------------------------------
# persistent_betti
# ---------------------------------------------------------------------------

def test_betti_empty_sublevel(two_min_circle):
    assert persistent_betti(two_min_circle, 0, -0.5, 3.7) == 0


def test_betti_two_components(two_min_circle):
    assert persistent_betti(two_min_circle, 0, 1.2, 1.8) == 2


def test_betti_after_merge(two_min_circle):
    assert persistent_betti(two_min_circle, 0, 2.2, 4.5) == 1


def test_betti_rejects_bad_interval(two_min_circle):
    with pytest.raises(ValueError):
        persistent_betti(two_min_circle, 0, 1.0, 1.0)
    with pytest.raises(ValueError):
        persistent_betti(two_min_circle, 0, 2.0, 1.0)


# ---------------------------------------------------------------------------
# multiplicity
# ---------------------------------------------------------------------------

def test_multiplicity_proper_point(two_min_circle):
    assert multiplicity(two_min_circle, 0, proper(1.0, 2.0)) == 1


def test_multiplicity_absent_point(two_min_circle):
    assert multiplicity(two_min_circle, 0, proper(0.5, 1.5)) == 0


def test_multiplicity_improper_point(two_min_circle):
    assert multiplicity(two_min_circle, 0, improper(0.0)) == 1


# ---------------------------------------------------------------------------
# Independent homology oracle (bitmask Gaussian elimination over GF(2))
# ---------------------------------------------------------------------------

def _gf2_rank(columns):
    pivots = {}
    rank = 0
    for col in columns:
        while col:
            h = col.bit_length() - 1
            if h in pivots:
                col ^= pivots[h]
            else:
                pivots[h] = col
                rank += 1
                break
    return rank


def _betti_oracle(bif, degree):
    buckets = [
        [(int(v),) for v in range(bif.n_vertices)],
        [tuple(int(x) for x in e) for e in bif.edges],
        [tuple(int(x) for x in t) for t in bif.tris],
        [tuple(int(x) for x in t) for t in bif.tets],
    ]
    if degree > 3 or not buckets[degree]:
        return 0

    def boundary_rank(k):
        if k == 0 or k > 3 or not buckets[k]:
            return 0
        face_index = {s: i for i, s in enumerate(buckets[k - 1])}
        cols = []
        for simplex in buckets[k]:
            col = 0
            for face in combinations(simplex, k):
                col ^= 1 << face_index[face]
            cols.append(col)
        return _gf2_rank(cols)

    return (len(buckets[degree]) - boundary_rank(degree)
            - boundary_rank(degree + 1))


def test_improper_count_matches_betti_oracle():
    rng = np.random.default_rng(42)
    for _ in range(12):
        bif = random_complex(rng)
        sf = from_vertex_values(bif, random_slice_values(rng, bif))
        for k in range(3):
            dgm = compute_diagram(sf, k)
            assert len(dgm.impropers()) == _betti_oracle(bif, k), (
                f"degree {k} of {bif!r}")


def test_multiplicity_agrees_with_diagram_everywhere():
    # every candidate point built from pairs of filtration values
    rng = np.random.default_rng(7)
    for _ in range(8):
        bif = random_complex(rng, max_vertices=6, max_top=6,
                             max_simplices=30)
        sf = from_vertex_values(bif, random_slice_values(rng, bif))
        values = sorted(set(float(v) for v in sf.simplex_values))
        for k in range(3):
            dgm = compute_diagram(sf, k)
            counts = {}
            for pt in dgm.points:
                counts[pt] = counts.get(pt, 0) + 1
            for u in values:
                pt = improper(u)
                assert multiplicity(sf, k, pt) == counts.get(pt, 0)
            for u, v in combinations(values, 2):
                pt = proper(u, v)
                assert multiplicity(sf, k, pt) == counts.get(pt, 0)


def test_one_parameter_stability():
    rng = np.random.default_rng(11)
    bif = cycle_complex([0.0] * 8)  # values replaced per trial
    for _ in range(25):
        base = random_slice_values(rng, bif)
        eps = float(rng.uniform(0.01, 0.5))
        delta = rng.uniform(-eps, eps, size=bif.n_vertices)
        sf1 = from_vertex_values(bif, base)
        sf2 = from_vertex_values(bif, base + delta)
        for k in (0, 1):
            value, _ = bottleneck_distance(compute_diagram(sf1, k),
                                           compute_diagram(sf2, k))
            assert value <= eps


# ---------------------------------------------------------------------------
# Diagram CSV
# ---------------------------------------------------------------------------

def test_diagram_csv_round_trip(tmp_path):
    d0 = diagram(0, [improper(-1.5), proper(0.0, 2.25)])
    d1 = diagram(1, [proper(0.5, 0.75)])
    path = tmp_path / "dgm.csv"
    save_diagram_csv(path, [d0, d1])
    text = path.read_text()
    assert "inf" in text
    loaded = load_diagram_csv(path)
    by_degree = {d.degree: d for d in loaded}
    assert by_degree[0].same_points(d0)
    assert by_degree[1].same_points(d1)


def test_diagram_point_validation():
    with pytest.raises(ValueError):
        DiagramPoint.proper(2.0, 1.0)
    with pytest.raises(ValueError):
        DiagramPoint.proper(1.0, 1.0)
    with pytest.raises(ValueError):
        DiagramPoint.improper(math.nan)
