import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from annulus_scan import (GuiBox, background_max, binarize,
                          connected_components, intensity_histogram,
                          largest_component, plane_mask, to_grayscale,
                          z_scores)
from annulus_scan.errors import DegenerateHistogram, EmptyForeground
from annulus_scan.masking import ComponentMap, close_mask
from conftest import flood_fill_labels


def test_histogram_constant_image():
    h = intensity_histogram(np.zeros((4, 4), dtype=np.uint8))
    assert h[0] == 16 and h[1:].sum() == 0


def test_histogram_enumeration():
    h = intensity_histogram(np.array([[0, 0, 5]], dtype=np.uint8))
    assert h[0] == 2 and h[5] == 1 and h.sum() == 3


@given(arrays(np.uint8, st.tuples(st.integers(2, 24), st.integers(2, 24))))
@settings(max_examples=50, deadline=None)
def test_histogram_count_conservation(img):
    assert intensity_histogram(img).sum() == img.size


def test_z_scores_miniature():
    z = z_scores(np.array([6, 2, 2, 2]))
    assert z == pytest.approx([1.732, -0.577, -0.577, -0.577], abs=1e-3)


def test_z_scores_uniform_bins():
    with pytest.raises(DegenerateHistogram):
        z_scores(np.full(256, 7))


def test_z_scores_constant_background_frame(canonical_case):
    # black background produces a single dominant spike at intensity 0
    _, img, _ = canonical_case
    z = z_scores(intensity_histogram(to_grayscale(img)))
    assert int(np.argmax(z)) == 0
    assert background_max(z) == 0


def test_background_max_single_spike():
    z = np.full(256, -0.1)
    z[0] = 10.0
    assert background_max(z) == 0  # sp_thr = 5, only index 0 clears it


def test_background_max_furthest_qualifying_spike():
    z = np.full(256, -0.1)
    z[0], z[3] = 8.0, 7.0
    assert background_max(z) == 3  # sp_thr = 4; both qualify, furthest wins


def test_background_max_threshold_floor():
    z = np.full(256, -0.1)
    z[2] = 3.9
    assert background_max(z) == 2  # sp_thr = max(1.95, 2) = 2 and 3.9 > 2


def test_background_max_no_spike_clears_floor():
    z = np.full(256, 0.5)
    z[40] = 2.0  # not strictly greater than the floor
    assert background_max(z) == 0


def test_binarize_definition():
    img = np.array([[0, 5], [7, 2]], dtype=np.uint8)
    assert (binarize(img, 2) == [[0, 1], [1, 0]]).all()


def test_binarize_extreme_threshold():
    img = np.arange(16, dtype=np.uint8).reshape(4, 4) * 17
    assert not binarize(img, 255).any()


@given(arrays(np.uint8, st.tuples(st.integers(2, 16), st.integers(2, 16))),
       st.integers(0, 254))
@settings(max_examples=50, deadline=None)
def test_binarize_monotone_in_threshold(img, t):
    low, high = binarize(img, t), binarize(img, t + 1)
    assert not (high & ~low).any()  # raising the threshold never adds pixels


def test_ccl_diagonal_pixels_are_separate():
    mask = np.zeros((4, 4), dtype=np.uint8)
    mask[1, 1] = mask[2, 2] = 1
    cmap = connected_components(mask)
    assert len(cmap.component_sizes) == 2


def test_ccl_full_mask_single_component():
    cmap = connected_components(np.ones((5, 7), dtype=np.uint8))
    assert len(cmap.component_sizes) == 1
    assert cmap.component_sizes[0] == 35
    assert (cmap.labels == 1).all()


def test_ccl_matches_flood_fill_on_random_masks():
    rng = np.random.default_rng(42)
    for _ in range(25):
        shape = (int(rng.integers(2, 64)), int(rng.integers(2, 64)))
        mask = (rng.random(shape) < rng.uniform(0.2, 0.8)).astype(np.uint8)
        got = connected_components(mask)
        want = flood_fill_labels(mask)
        assert (got.labels == want).all()
        assert got.component_sizes.sum() == mask.sum()


def test_ccl_u_shape_merges_across_rows():
    mask = np.array([[1, 0, 1],
                     [1, 0, 1],
                     [1, 1, 1]], dtype=np.uint8)
    cmap = connected_components(mask)
    assert len(cmap.component_sizes) == 1


def test_largest_component_argmax():
    labels = np.zeros((4, 16), dtype=np.int64)
    labels[0, :5] = 1
    labels[1, :9] = 2
    labels[2, :2] = 3
    cmap = ComponentMap(labels, np.array([5, 9, 2]))
    out = largest_component(cmap)
    assert out.sum() == 9 and (out[1, :9] == 1).all()


def test_largest_component_tie_breaks_to_first_label():
    labels = np.zeros((2, 8), dtype=np.int64)
    labels[0, :3] = 1
    labels[1, :3] = 2
    cmap = ComponentMap(labels, np.array([3, 3]))
    assert (largest_component(cmap)[0, :3] == 1).all()


def test_largest_component_empty_mask():
    with pytest.raises(EmptyForeground):
        largest_component(connected_components(np.zeros((4, 4), dtype=np.uint8)))


def test_largest_component_is_connected():
    rng = np.random.default_rng(7)
    mask = (rng.random((48, 48)) < 0.55).astype(np.uint8)
    plane = largest_component(connected_components(mask))
    again = connected_components(plane)
    assert len(again.component_sizes) == 1


def test_plane_survives_gui_text_blobs(canonical_case):
    # interface boxes become separate components and are discarded
    spec, img, truth = canonical_case
    noisy = img.copy()
    noisy[10:40, 10:120] = 180   # header block
    noisy[480:500, 400:505] = 220  # caption block
    plane = plane_mask(noisy)
    assert plane[300, 256] == 1       # inside the sector
    assert plane[20, 50] == 0         # header removed
    assert plane[490, 450] == 0       # caption removed


def test_closing_fills_pinholes():
    mask = np.ones((9, 9), dtype=np.uint8)
    mask[4, 4] = 0
    assert close_mask(mask)[4, 4] == 1
