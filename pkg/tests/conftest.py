"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

import math
from collections import deque

import numpy as np
import pytest

from annulus_scan import Point, SectorSpec, render

CANONICAL = SectorSpec(origin=Point(-40.0, 256.0), theta=math.radians(60.0),
                       r_inner=60.0, r_outer=380.0, canvas=(512, 512),
                       texture="radial")


@pytest.fixture(scope="session")
def canonical_case():
    """One well-behaved rendered sector shared by read-only tests."""
    img, truth = render(CANONICAL)
    return CANONICAL, img, truth


def flood_fill_labels(mask: np.ndarray) -> np.ndarray:
    """Independent 4-connectivity labelling by BFS flood fill.

    Labels are dense 1..n in raster-encounter order, matching the
    contract of the production labeller so arrays compare directly.
    """
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    labels = np.zeros((h, w), dtype=np.int64)
    current = 0
    for j in range(h):
        for i in range(w):
            if not m[j, i] or labels[j, i]:
                continue
            current += 1
            queue = deque([(j, i)])
            labels[j, i] = current
            while queue:
                r, c = queue.popleft()
                for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= rr < h and 0 <= cc < w and m[rr, cc] \
                            and not labels[rr, cc]:
                        labels[rr, cc] = current
                        queue.append((rr, cc))
    return labels


def keypoint_errors(sec, truth) -> dict[str, float]:
    """Euclidean distance per keypoint between two sectors."""
    return {name: math.hypot(sec.keypoints[name].row - truth.keypoints[name].row,
                             sec.keypoints[name].col - truth.keypoints[name].col)
            for name in sec.keypoints}
