import math

import numpy as np
import pytest

from annulus_scan import (ArcPoints, Point, boundary_segment, extract_edges,
                          plane_mask, ransac_line, symmetric_correction,
                          truncate_at_vertices)
from annulus_scan.boundaries import EdgeSet, _mirror
from annulus_scan.errors import TooFewPoints


def _edges(points, side="left"):
    return EdgeSet(np.asarray(points, dtype=np.float64).reshape(-1, 2), side)


def test_extract_edges_rectangle():
    mask = np.zeros((12, 32), dtype=np.uint8)
    mask[2:9, 10:21] = 1
    left, right = extract_edges(mask, 15.0)
    assert (left.points[:, 1] == 10).all()
    assert (right.points[:, 1] == 20).all()
    assert (left.points[:, 0] == np.arange(2, 9)).all()


def test_extract_edges_single_column_on_axis():
    mask = np.zeros((10, 21), dtype=np.uint8)
    mask[:, 10] = 1
    left, right = extract_edges(mask, 10.0)
    assert left.points.size == 0 and right.points.size == 0


def test_extract_edges_one_sided_rows():
    mask = np.zeros((6, 20), dtype=np.uint8)
    mask[1, 3] = 1            # only left of the axis
    mask[4, 3] = mask[4, 15] = 1
    left, right = extract_edges(mask, 10.0)
    assert left.points.shape == (2, 2)
    assert right.points.shape == (1, 2)


def test_truncate_removes_arc_points():
    # leg descends to the vertex at (10, 0); arc curls back rightward below
    leg = [(r, 10.0 - r) for r in range(11)]
    arc = [(10.0 + k, 0.5 * k * k) for k in range(1, 8)]
    out = truncate_at_vertices(_edges(leg + arc, side="left"))
    assert out.points.shape[0] == len(leg)
    assert out.points[:, 0].max() == 10.0


def test_truncate_right_side_mirror_case():
    leg = [(r, 10.0 + r) for r in range(11)]
    arc = [(10.0 + k, 20.0 - 0.5 * k * k) for k in range(1, 8)]
    out = truncate_at_vertices(_edges(leg + arc, side="right"))
    assert out.points.shape[0] == len(leg)


def test_truncate_collinear_passthrough():
    pts = [(r, 5.0 + 0.3 * r) for r in range(12)]
    out = truncate_at_vertices(_edges(pts))
    assert out.points.shape[0] == 12


def test_truncate_keeps_leg_of_rendered_sector(canonical_case):
    _, img, truth = canonical_case
    plane = plane_mask(img)
    left, _ = extract_edges(plane, truth.axis_col)
    kept = truncate_at_vertices(left)
    # retained points hug the true left leg line
    o, half = truth.origin, truth.theta / 2
    direction = np.array([math.cos(half), -math.sin(half)])
    rel = kept.points - np.array([o.row, o.col])
    perp = np.abs(rel[:, 0] * direction[1] - rel[:, 1] * direction[0])
    assert perp.max() <= 1.5


def test_ransac_exact_collinear():
    pts = [(r, 4.0 + 0.25 * r) for r in range(50)]
    fit = ransac_line(_edges(pts), seed=3)
    assert fit.residual <= 1e-9
    assert fit.slope == pytest.approx(0.25, abs=1e-9)
    assert fit.intercept == pytest.approx(4.0, abs=1e-9)
    assert fit.inlier_count == 50


def test_ransac_rejects_gross_outliers():
    # oracle: the generating line; 20% of points pushed 40 px off it
    rng = np.random.default_rng(11)
    rows = np.arange(100, dtype=np.float64)
    cols = 40.0 + 0.3 * rows
    outliers = rng.choice(100, size=20, replace=False)
    cols[outliers] += 40.0
    fit = ransac_line(_edges(np.column_stack([rows, cols])), seed=5)
    worst = max(abs(fit.col_at(r) - (40.0 + 0.3 * r)) for r in (0.0, 50.0, 99.0))
    assert worst <= 0.5
    assert fit.inlier_count == 80


def test_ransac_single_point():
    with pytest.raises(TooFewPoints):
        ransac_line(_edges([(3.0, 7.0)]))


def test_ransac_single_row():
    with pytest.raises(TooFewPoints):
        ransac_line(_edges([(3.0, 7.0), (3.0, 9.0)]))


def test_ransac_deterministic():
    rng = np.random.default_rng(2)
    pts = np.column_stack([np.arange(60.0), rng.normal(50, 1.5, 60)])
    a = ransac_line(_edges(pts), seed=9)
    b = ransac_line(_edges(pts), seed=9)
    assert a == b


def test_boundary_segment_evaluates_row_extremes():
    pts = [(r, 30.0 - 0.5 * r) for r in range(5, 101)]
    fit = ransac_line(_edges(pts))
    rb = boundary_segment(fit, _edges(pts))
    assert rb.top == Point(5.0, pytest.approx(27.5))
    assert rb.bottom == Point(100.0, pytest.approx(-20.0))


def _arcs(col=50.0):
    return ArcPoints(Point(10.0, col), Point(90.0, col))


def test_correction_replaces_noisier_right():
    rb_l = (Point(0.0, 40.0), Point(80.0, 10.0))
    rb_r = (Point(0.0, 61.0), Point(80.0, 93.0))
    from annulus_scan.boundaries import RadialBoundary
    rb_l, rb_r = RadialBoundary(*rb_l), RadialBoundary(*rb_r)
    new_l, new_r = symmetric_correction(rb_l, rb_r, 0.2, 3.0, _arcs())
    assert new_l == rb_l
    assert new_r.top == Point(0.0, 60.0)
    assert new_r.bottom == Point(80.0, 90.0)


def test_correction_replaces_noisier_left():
    from annulus_scan.boundaries import RadialBoundary
    rb_l = RadialBoundary(Point(0.0, 42.0), Point(80.0, 12.0))
    rb_r = RadialBoundary(Point(0.0, 60.0), Point(80.0, 90.0))
    new_l, new_r = symmetric_correction(rb_l, rb_r, 3.0, 0.2, _arcs())
    assert new_r == rb_r
    assert new_l.top == Point(0.0, 40.0)
    assert new_l.bottom == Point(80.0, 10.0)


def test_correction_tie_leaves_both():
    from annulus_scan.boundaries import RadialBoundary
    rb_l = RadialBoundary(Point(0.0, 42.0), Point(80.0, 12.0))
    rb_r = RadialBoundary(Point(0.0, 60.0), Point(80.0, 90.0))
    assert symmetric_correction(rb_l, rb_r, 1.0, 1.0, _arcs()) == (rb_l, rb_r)


def test_mirror_involution():
    from annulus_scan.boundaries import RadialBoundary
    rb = RadialBoundary(Point(3.25, 17.5), Point(91.0, -4.75))
    twice = _mirror(_mirror(rb, 33.33), 33.33)
    assert twice.top.col == pytest.approx(rb.top.col, abs=1e-12)
    assert twice.bottom.col == pytest.approx(rb.bottom.col, abs=1e-12)


def test_correction_symmetry_invariant_after_replacement():
    from annulus_scan.boundaries import RadialBoundary
    rb_l = RadialBoundary(Point(0.0, 40.1), Point(80.0, 9.7))
    rb_r = RadialBoundary(Point(0.0, 59.0), Point(80.0, 88.0))
    m = 50.0
    new_l, new_r = symmetric_correction(rb_l, rb_r, 0.1, 2.0, _arcs(m))
    assert abs((m - new_l.bottom.col) - (new_r.bottom.col - m)) <= 1e-6


def test_corrupted_leg_recovered_by_correction():
    # right edge jittered hard; the mirrored left fit takes over
    rng = np.random.default_rng(4)
    rows = np.arange(20.0, 220.0)
    left = np.column_stack([rows, 200.0 - 0.4 * rows])
    right_cols = 312.0 + 0.4 * rows + rng.normal(0.0, 1.8, rows.size)
    right = np.column_stack([rows, right_cols])
    fit_l = ransac_line(_edges(left), seed=7)
    fit_r = ransac_line(_edges(right, side="right"), seed=8)
    rb_l = boundary_segment(fit_l, _edges(left))
    rb_r = boundary_segment(fit_r, _edges(right, side="right"))
    assert fit_l.residual < fit_r.residual
    new_l, new_r = symmetric_correction(rb_l, rb_r, fit_l.residual,
                                        fit_r.residual, _arcs(256.0))
    assert new_l == rb_l
    # mirrored endpoints coincide with the true right leg
    assert new_r.top.col == pytest.approx(312.0 + 0.4 * 20.0, abs=0.5)
    assert new_r.bottom.col == pytest.approx(312.0 + 0.4 * 219.0, abs=0.5)


def test_fitted_slopes_match_leg_angles(canonical_case):
    _, img, truth = canonical_case
    plane = plane_mask(img)
    left, right = extract_edges(plane, truth.axis_col)
    half = truth.theta / 2
    for edges, sign in ((left, -1.0), (right, 1.0)):
        fit = ransac_line(truncate_at_vertices(edges), seed=1)
        got = math.atan(fit.slope)
        want = math.atan(sign * math.tan(half))
        assert abs(math.degrees(got - want)) <= 0.5
