from __future__ import annotations

import numpy as np
import pytest

from cedkit import ColoredPointCloud


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def small_cloud(rng):
    xyz = rng.uniform(0, 1, size=(60, 3))
    rgb = rng.uniform(0, 1, size=(60, 3))
    return ColoredPointCloud(xyz, rgb, resolution=0.05)
