import math

import numpy as np
import pytest

from annulus_scan import (SectorSpec, accumulate_rows, arc_points, centroid,
                          detect_cropped_top, find_axis, flanking_minima,
                          plane_mask, render, symmetry_axis)
from annulus_scan.errors import AxisMissesPlane, FlatAccumulation
from annulus_scan.raster import Point
from conftest import CANONICAL


def test_accumulate_empty_top_half():
    mask = np.zeros((20, 9), dtype=np.uint8)
    mask[15:, :] = 1  # everything below h/2
    assert not accumulate_rows(mask).any()


def test_accumulate_single_full_row():
    mask = np.zeros((20, 9), dtype=np.uint8)
    mask[1, :] = 1
    s = accumulate_rows(mask)
    assert s == pytest.approx(np.full(9, -1.0))  # kernel sums to one


def test_accumulate_skips_row_zero():
    mask = np.zeros((20, 9), dtype=np.uint8)
    mask[0, :] = 1
    assert not accumulate_rows(mask).any()


def test_accumulate_profile_shape(canonical_case):
    # local maximum near the axis, minima near the top corners
    _, img, truth = canonical_case
    s = accumulate_rows(plane_mask(img))
    axis = int(truth.axis_col)
    corner_l = int(truth.keypoints["legs_l_top"].col)
    corner_r = int(truth.keypoints["legs_r_top"].col)
    assert s[axis] > s[corner_l] and s[axis] > s[corner_r]
    lo = int(np.argmin(s))
    assert min(abs(lo - corner_l), abs(lo - corner_r)) <= 3


def test_centroid_symmetric_profile():
    s = np.zeros(101)
    s[30:71] = -np.hanning(41)
    assert centroid(s) == pytest.approx(50.0, abs=0.5)


def test_centroid_adjacent_pair():
    s = np.zeros(10)
    s[4] = s[5] = -3.0
    assert centroid(s) == pytest.approx(4.5, abs=1e-12)


def test_centroid_flat_profile():
    with pytest.raises(FlatAccumulation):
        centroid(np.zeros(32))


def test_flanking_minima_unique():
    s = -np.hanning(21)
    s[4] -= 2.0
    s[16] -= 1.5
    assert flanking_minima(s, 10.0) == (4, 16)


def test_flanking_minima_plateau_takes_leftmost():
    s = np.zeros(20)
    s[2:6] = -5.0
    s[12:17] = -5.0
    assert flanking_minima(s, 9.5) == (2, 12)


def test_flanking_minima_near_rendered_corners(canonical_case):
    _, img, truth = canonical_case
    s = accumulate_rows(plane_mask(img))
    m_hat = centroid(s)
    min_l, min_r = flanking_minima(s, m_hat)
    assert abs(min_l - truth.keypoints["legs_l_top"].col) <= 3
    assert abs(min_r - truth.keypoints["legs_r_top"].col) <= 3


def test_symmetry_axis_consistent_inputs():
    assert symmetry_axis(100.0, 60, 140) == 100.0


def test_symmetry_axis_skewed_centroid():
    assert symmetry_axis(90.0, 60, 140) == 95.0


def test_detect_cropped_top_cropped_sector():
    img, truth = render(CANONICAL)
    cropped = img[60:, :]  # removes the whole concave top
    plane = plane_mask(cropped)
    flag, m = detect_cropped_top(plane)
    assert flag
    assert m == pytest.approx(truth.axis_col, abs=2.0)


def test_detect_cropped_top_clean_sector(canonical_case):
    _, img, _ = canonical_case
    flag, m = detect_cropped_top(plane_mask(img))
    assert not flag and m is None


def test_detect_cropped_top_full_width_row():
    mask = np.ones((6, 11), dtype=np.uint8)
    flag, m = detect_cropped_top(mask)
    assert flag and m == 5.0


def test_arc_points_column_runs():
    mask = np.zeros((300, 40), dtype=np.uint8)
    mask[10:201, 17] = 1
    arcs = arc_points(mask, 17.2)
    assert arcs.arc_inner == Point(10.0, 17.0)
    assert arcs.arc_outer == Point(200.0, 17.0)


def test_arc_points_cropped_sector_starts_at_zero():
    img, truth = render(CANONICAL)
    plane = plane_mask(img[60:, :])
    arcs = arc_points(plane, truth.axis_col)
    assert arcs.arc_inner.row == 0.0


def test_arc_points_empty_column():
    mask = np.zeros((10, 10), dtype=np.uint8)
    mask[:, 2] = 1
    with pytest.raises(AxisMissesPlane):
        arc_points(mask, 7.0)


def test_axis_mirror_property(canonical_case):
    _, img, _ = canonical_case
    plane = plane_mask(img)
    m = find_axis(plane).m
    m_flipped = find_axis(plane[:, ::-1]).m
    w = plane.shape[1]
    assert abs((w - 1) - m - m_flipped) <= 0.51


@pytest.mark.parametrize("theta_deg,r_inner,r_outer",
                         [(40, 30, 200), (60, 60, 300), (80, 120, 350)])
def test_axis_accuracy_on_rendered_sectors(theta_deg, r_inner, r_outer):
    theta = math.radians(theta_deg)
    spec = SectorSpec(origin=Point(12.0 - r_inner * math.cos(theta / 2), 255.5),
                      theta=theta, r_inner=r_inner, r_outer=r_outer,
                      canvas=(512, 512))
    img, truth = render(spec)
    result = find_axis(plane_mask(img))
    assert abs(result.m - truth.axis_col) <= 2.0
    arcs = arc_points(plane_mask(img), result.m)
    assert abs(arcs.arc_inner.row - truth.keypoints["arc_inner"].row) <= 1.0
    assert abs(arcs.arc_outer.row - truth.keypoints["arc_outer"].row) <= 1.0


def test_accumulation_length_and_sign(canonical_case):
    _, img, _ = canonical_case
    plane = plane_mask(img)
    s = accumulate_rows(plane)
    assert s.size == plane.shape[1]
    assert (s <= 0).all()
