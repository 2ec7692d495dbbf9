"""Ultrasound plane masking.

The background intensity band is found by z-score spike analysis of the
intensity histogram, the image is binarised against it, and the plane is
isolated as the largest 4-connected foreground component.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateHistogram, EmptyForeground


class ComponentMap(NamedTuple):
    """Dense component labelling: 0 is background, labels run 1..n in
    raster-encounter order.  component_sizes[k] is the pixel count of
    label k+1."""

    labels: np.ndarray
    component_sizes: np.ndarray


def intensity_histogram(img: np.ndarray) -> np.ndarray:
    """Exact 256-bin intensity histogram of a grayscale image."""
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)


def z_scores(hist: np.ndarray) -> np.ndarray:
    """Standardise bin counts by their mean and population std."""
    h = np.asarray(hist, dtype=np.float64)
    sigma = h.std()
    if sigma == 0.0:
        raise DegenerateHistogram("all histogram bins are equal; no spike exists")
    return (h - h.mean()) / sigma


def background_max(z: np.ndarray) -> int:
    """Upper intensity of the background band.

    A bin is a spike when its z-score exceeds max(max(z)/2, 2); the spike
    furthest from intensity 0 wins.  Returns 0 when nothing clears the
    threshold (everything nonzero is then treated as foreground).
    """
    z = np.asarray(z, dtype=np.float64)
    sp_thr = max(z.max() / 2.0, 2.0)
    spikes = np.flatnonzero(z > sp_thr)
    return int(spikes[-1]) if spikes.size else 0


def binarize(img: np.ndarray, bg_max: int) -> np.ndarray:
    """Foreground-background mask: strictly greater than bg_max."""
    return (np.asarray(img) > bg_max).astype(np.uint8)


def connected_components(mask: np.ndarray) -> ComponentMap:
    """Two-pass 4-connectivity labelling with union-find resolution.

    The first pass assigns one provisional label per horizontal foreground
    run and records equivalences between vertically adjacent runs; the
    second pass resolves the equivalence classes and densifies labels in
    raster-encounter order.
    """
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = m
    deltas = np.diff(padded, axis=1)

    starts: list[np.ndarray] = []
    ends: list[np.ndarray] = []
    first_run: list[int] = []  # provisional label of each row's first run
    n_runs = 0
    for j in range(h):
        s = np.flatnonzero(deltas[j] == 1)
        e = np.flatnonzero(deltas[j] == -1)
        starts.append(s)
        ends.append(e)
        first_run.append(n_runs)
        n_runs += s.size

    parent = np.arange(n_runs, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            if rx < ry:
                parent[ry] = rx
            else:
                parent[rx] = ry

    # first pass: merge runs that overlap a run on the previous row
    for j in range(1, h):
        s1, e1 = starts[j], ends[j]
        s0, e0 = starts[j - 1], ends[j - 1]
        if s1.size == 0 or s0.size == 0:
            continue
        a = b = 0
        while a < s1.size and b < s0.size:
            if s1[a] < e0[b] and s0[b] < e1[a]:
                union(first_run[j] + a, first_run[j - 1] + b)
            if e1[a] <= e0[b]:
                a += 1
            else:
                b += 1

    # second pass: resolve roots, densify in raster order, paint labels
    roots = np.array([find(i) for i in range(n_runs)], dtype=np.int64)
    dense = np.zeros(n_runs, dtype=np.int64)
    next_label = 0
    seen: dict[int, int] = {}
    for i in range(n_runs):
        r = int(roots[i])
        if r not in seen:
            next_label += 1
            seen[r] = next_label
        dense[i] = seen[r]

    labels = np.zeros((h, w), dtype=np.int64)
    sizes = np.zeros(next_label, dtype=np.int64)
    for j in range(h):
        base = first_run[j]
        for k in range(starts[j].size):
            s, e = int(starts[j][k]), int(ends[j][k])
            lab = int(dense[base + k])
            labels[j, s:e] = lab
            sizes[lab - 1] += e - s
    return ComponentMap(labels, sizes)


def largest_component(cmap: ComponentMap) -> np.ndarray:
    """Mask of the biggest component; size ties go to the smallest label."""
    if cmap.component_sizes.size == 0:
        raise EmptyForeground("mask has no foreground pixels")
    winner = int(np.argmax(cmap.component_sizes)) + 1
    return (cmap.labels == winner).astype(np.uint8)


def close_mask(mask: np.ndarray) -> np.ndarray:
    """One iteration of 3x3 morphological closing (dilate then erode)."""
    m = np.asarray(mask).astype(bool)

    def _dilate(x: np.ndarray) -> np.ndarray:
        out = x.copy()
        out[1:, :] |= x[:-1, :]
        out[:-1, :] |= x[1:, :]
        out[:, 1:] |= x[:, :-1]
        out[:, :-1] |= x[:, 1:]
        out[1:, 1:] |= x[:-1, :-1]
        out[1:, :-1] |= x[:-1, 1:]
        out[:-1, 1:] |= x[1:, :-1]
        out[:-1, :-1] |= x[1:, 1:]
        return out

    return (~_dilate(~_dilate(m))).astype(np.uint8)


def plane_mask(gray: np.ndarray, closing: bool = False) -> np.ndarray:
    """Full masking stage: histogram -> z-scores -> threshold -> largest
    4-connected component.  Optional 3x3 closing smooths speckled masks."""
    hist = intensity_histogram(gray)
    bg_max = background_max(z_scores(hist))
    mask = binarize(gray, bg_max)
    plane = largest_component(connected_components(mask))
    if closing:
        # closing may attach diagonal-only pixels; re-isolate to keep the
        # single-4-connected-component invariant
        plane = largest_component(connected_components(close_mask(plane)))
    return plane
