"""Parameter-strip geometry: regions, gap scans, detection, loops."""
import math

import numpy as np
import pytest

from bipersist import (
    AdmissibleLine,
    ParameterRegion,
    ParamPath,
    ParamPoint,
    SimplicialBifiltration,
    contains,
    detect_singular_pairs,
    generator_loops,
    load_region,
    min_diagram_gap,
    region_from_dict,
    region_to_dict,
    save_region,
    save_reports,
    segment_path,
    suggest_separation,
    winding_number,
)
from conftest import build_complex, monotone_complex

P = ParamPoint


# ---------------------------------------------------------------------------
# contains
# ---------------------------------------------------------------------------

def test_contains_plain_rectangle():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0))
    assert contains(region, P(0.5, 0.0))
    assert not contains(region, P(0.95, 0.0))
    assert not contains(region, P(0.5, 1.5))


def test_contains_excluded_disk():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                             ((P(0.25, 0.0), 0.05),))
    assert not contains(region, P(0.25, 0.0))
    assert contains(region, P(0.25, 0.051))
    assert not contains(region, P(0.25, 0.05))  # closed disk


# ---------------------------------------------------------------------------
# Region validation
# ---------------------------------------------------------------------------

def test_region_rejects_bad_a_range():
    with pytest.raises(ValueError):
        ParameterRegion((0.0, 0.5), (-1.0, 1.0))
    with pytest.raises(ValueError):
        ParameterRegion((0.5, 1.0), (-1.0, 1.0))


def test_region_rejects_disk_touching_boundary():
    with pytest.raises(ValueError):
        ParameterRegion((0.1, 0.9), (-1.0, 1.0), ((P(0.15, 0.0), 0.1),))


def test_region_rejects_overlapping_disks():
    with pytest.raises(ValueError):
        ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                        ((P(0.4, 0.0), 0.1), (P(0.55, 0.0), 0.1)))


def test_region_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        ParameterRegion((0.1, 0.9), (-1.0, 1.0), ((P(0.5, 0.0), 0.0),))


def test_region_rejects_negative_separation():
    with pytest.raises(ValueError):
        ParameterRegion((0.1, 0.9), (-1.0, 1.0), separation=-0.01)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

def test_path_endpoints_exact():
    path = ParamPath((P(0.2, -0.3), P(0.4, 0.1), P(0.7, 0.0)))
    assert path.point_at(0.0) is path.start
    assert path.point_at(1.0) is path.end
    assert not path.is_loop
    assert path.length() == pytest.approx(
        math.hypot(0.2, 0.4) + math.hypot(0.3, 0.1))


def test_path_midpoint_of_segment():
    path = segment_path(P(0.2, 0.0), P(0.6, 0.0))
    mid = path.point_at(0.5)
    assert (mid.a, mid.b) == pytest.approx((0.4, 0.0))


def test_path_reverse_and_concatenate():
    path = segment_path(P(0.2, 0.0), P(0.6, 0.4))
    loop = path.then(path.reverse())
    assert loop.is_loop
    assert loop.length() == pytest.approx(2 * path.length())


def test_path_then_requires_matching_junction():
    with pytest.raises(ValueError):
        segment_path(P(0.2, 0.0), P(0.4, 0.0)).then(
            segment_path(P(0.5, 0.0), P(0.6, 0.0)))


def test_path_rejects_bad_arc_fraction():
    path = segment_path(P(0.2, 0.0), P(0.6, 0.0))
    with pytest.raises(ValueError):
        path.point_at(-0.1)
    with pytest.raises(ValueError):
        path.point_at(1.1)


def test_path_needs_a_waypoint():
    with pytest.raises(ValueError):
        ParamPath(())


def test_contains_path_detects_disk_crossing():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                             ((P(0.5, 0.0), 0.1),))
    assert not region.contains_path(segment_path(P(0.2, 0.0), P(0.8, 0.0)))
    assert region.contains_path(segment_path(P(0.2, 0.5), P(0.8, 0.5)))


# ---------------------------------------------------------------------------
# Admissible lines
# ---------------------------------------------------------------------------

def test_line_parameterization():
    line = AdmissibleLine(P(0.25, 0.5))
    assert line.direction == (0.25, 0.75)
    assert line.basepoint == (0.5, -0.5)
    x, y = line.point_at(2.0)
    assert (x, y) == pytest.approx((1.0, 1.0))


def test_line_normalized_coordinate():
    line = AdmissibleLine(P(0.25, 0.5))
    # the point with first coordinate x sits at t = (x - b)/a, scaled by
    # min(a, 1-a)
    assert line.t_of_x(1.0) == pytest.approx(2.0)
    assert line.w_of_x(1.0) == pytest.approx(0.5)


def test_line_side_of_sign():
    line = AdmissibleLine(P(0.5, 0.0))  # the diagonal v = u
    assert line.side_of(0.0, 1.0) > 0
    assert line.side_of(1.0, 0.0) < 0
    assert line.side_of(2.0, 2.0) == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# Winding numbers
# ---------------------------------------------------------------------------

def _square_loop(center, half):
    a, b = center
    return ParamPath((P(a - half, b - half), P(a + half, b - half),
                      P(a + half, b + half), P(a - half, b + half),
                      P(a - half, b - half)))


def test_winding_number_basic():
    loop = _square_loop((0.5, 0.0), 0.2)
    assert winding_number(loop, P(0.5, 0.0)) == 1
    assert winding_number(loop.reverse(), P(0.5, 0.0)) == -1
    assert winding_number(loop, P(0.8, 0.8)) == 0


def test_winding_number_requires_loop():
    with pytest.raises(ValueError):
        winding_number(segment_path(P(0.2, 0.0), P(0.6, 0.0)), P(0.4, 0.1))


# ---------------------------------------------------------------------------
# min_diagram_gap
# ---------------------------------------------------------------------------

def test_gap_single_point_diagram_is_infinite():
    lone = monotone_complex([1.0])
    assert min_diagram_gap(lone, P(0.5, 0.0), 0) == math.inf


def test_gap_star_complex():
    # diagram at (1/2, 0): {Improper(-5), Proper(0,1), Proper(0,1.2)};
    # the closest pair is the two proper points at distance 0.2
    star = build_complex([(-5, -5), (1, 1), (0, 0), (1.2, 1.2), (0, 0)],
                         [(0, 1), (1, 2), (0, 3), (3, 4)])
    assert min_diagram_gap(star, P(0.5, 0.0), 0) == pytest.approx(0.2)


def test_gap_collapses_toward_collision(mono16):
    gaps = [min_diagram_gap(mono16, P(a, 0.0), 0)
            for a in (0.4, 0.33, 0.28, 0.25)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 2e-3


# ---------------------------------------------------------------------------
# detect_singular_pairs
# ---------------------------------------------------------------------------

def test_detect_rejects_coarse_grid(mono16):
    with pytest.raises(ValueError):
        detect_singular_pairs(mono16, 0, (0.1, 0.45, -0.5, 0.5), grid_n=7)


def test_detect_monodromy_collision(mono16):
    reports = detect_singular_pairs(mono16, 0, (0.15, 0.35, -0.2, 0.2),
                                    grid_n=12, refine_tol=5e-3)
    assert len(reports) == 1
    rep = reports[0]
    # mesh-limited offset from the ideal location (0.25, 0)
    assert abs(rep.location.a - 0.25) < 0.015
    assert abs(rep.location.b) < 0.01
    assert rep.refinement_radius <= 5e-3
    assert rep.degree == 0


def test_detect_refinement_beats_scan_grid(mono16):
    reports = detect_singular_pairs(mono16, 0, (0.15, 0.35, -0.2, 0.2),
                                    grid_n=12, refine_tol=5e-3)
    grid_min = min(
        min_diagram_gap(mono16, P(float(a), float(b)), 0)
        for a in np.linspace(0.15, 0.35, 12)
        for b in np.linspace(-0.2, 0.2, 12))
    assert reports[0].min_gap_at_location <= grid_min


def test_detect_two_spheres_degree1_on_double_point_line(spheres32):
    reports = detect_singular_pairs(spheres32, 1, (0.26, 0.40, 0.60, 0.95),
                                    grid_n=15, refine_tol=5e-3)
    assert len(reports) == 1
    rep = reports[0]
    assert rep.min_gap_at_location < 1e-3
    # the detected line passes through both crossings of the two
    # sphere-projection circles (up to mesh error)
    a, b = rep.location.a, rep.location.b
    for x, y in ((2.560306, 3.073245), (3.0, 4.0)):
        offset = abs((x - b) * (1 - a) - (y + b) * a) / math.hypot(a, 1 - a)
        assert offset < 0.05


def test_detect_constant_gap_is_empty():
    flat = SimplicialBifiltration([(0.0, 0.0), (5.0, 5.0)], [])
    assert detect_singular_pairs(flat, 0, (0.2, 0.8, -1.0, 1.0),
                                 grid_n=8) == []


# ---------------------------------------------------------------------------
# suggest_separation and region membership
# ---------------------------------------------------------------------------

def test_separation_is_quarter_of_sampled_minimum(mono16):
    region = ParameterRegion((0.55, 0.8), (-0.3, 0.3))
    c = suggest_separation(mono16, region, 0, grid_n=9)
    sampled = min(
        min_diagram_gap(mono16, P(float(a), float(b)), 0)
        for a in np.linspace(0.55, 0.8, 9)
        for b in np.linspace(-0.3, 0.3, 9))
    assert c == pytest.approx(sampled / 4.0)
    assert c > 0


def test_region_membership_gap_exceeds_twice_separation(mono16):
    # every accepted point of a region with the suggested separation
    # keeps its diagram gap above 2c
    region = ParameterRegion((0.55, 0.8), (-0.3, 0.3))
    c = suggest_separation(mono16, region, 0, grid_n=9)
    strict = ParameterRegion((0.55, 0.8), (-0.3, 0.3), separation=c)
    for a in np.linspace(0.55, 0.8, 13):
        for b in np.linspace(-0.3, 0.3, 13):
            p = P(float(a), float(b))
            if strict.contains(p):
                assert min_diagram_gap(mono16, p, 0) > 2 * c


# ---------------------------------------------------------------------------
# generator_loops
# ---------------------------------------------------------------------------

def test_loops_empty_without_disks():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0))
    assert generator_loops(region, P(0.5, 0.0)) == []


def test_loops_single_disk():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                             ((P(0.5, 0.0), 0.08),))
    loops = generator_loops(region, P(0.2, -0.6))
    assert len(loops) == 1
    loop = loops[0]
    assert loop.is_loop
    assert loop.start.a == 0.2 and loop.start.b == -0.6
    assert winding_number(loop, P(0.5, 0.0)) == 1
    assert region.contains_path(loop)


def test_loops_two_disks_winding_profiles():
    d1, d2 = P(0.35, -0.4), P(0.65, 0.4)
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                             ((d1, 0.08), (d2, 0.08)))
    loops = generator_loops(region, P(0.15, 0.8))
    assert len(loops) == 2
    profiles = [(winding_number(lp, d1), winding_number(lp, d2))
                for lp in loops]
    assert sorted(profiles) == [(0, 1), (1, 0)]
    assert all(region.contains_path(lp) for lp in loops)


def test_loops_require_basepoint_inside():
    region = ParameterRegion((0.1, 0.9), (-1.0, 1.0),
                             ((P(0.5, 0.0), 0.08),))
    with pytest.raises(ValueError):
        generator_loops(region, P(0.5, 0.0))  # inside the excluded disk


def test_loops_crowded_disks_error():
    # the enclosing box of the first disk cannot clear the second disk's
    # diagonal corner, so loop construction must fail rather than return a
    # loop that leaves the region
    region = ParameterRegion((0.05, 0.95), (-1.0, 1.0),
                             ((P(0.5, 0.0), 0.1), (P(0.68, 0.18), 0.05)))
    with pytest.raises(ValueError):
        generator_loops(region, P(0.15, -0.5))


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------

def test_region_json_round_trip(tmp_path):
    region = ParameterRegion((0.2, 0.8), (-0.5, 0.5),
                             ((P(0.5, 0.0), 0.1),), separation=0.02)
    data = region_to_dict(region)
    assert data["rect"] == [0.2, 0.8, -0.5, 0.5]
    assert data["disks"] == [[0.5, 0.0, 0.1]]
    assert data["c"] == 0.02
    path = tmp_path / "region.json"
    save_region(region, path)
    back = load_region(path)
    assert back.a_range == region.a_range
    assert back.b_range == region.b_range
    assert back.separation == region.separation
    assert len(back.excluded) == 1
    assert region_from_dict(data).excluded[0][1] == 0.1


def test_reports_csv(tmp_path, mono16):
    reports = detect_singular_pairs(mono16, 0, (0.15, 0.35, -0.2, 0.2),
                                    grid_n=12, refine_tol=5e-3)
    path = tmp_path / "reports.csv"
    save_reports(reports, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "a,b,degree,gap"
    fields = lines[1].split(",")
    assert float(fields[0]) == reports[0].location.a
    assert int(fields[2]) == 0
