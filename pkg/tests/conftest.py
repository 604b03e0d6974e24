import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcolor.imageio import ImageBuffer  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def noise_image():
    r = np.random.default_rng(7)
    return ImageBuffer(r.integers(0, 256, size=(32, 32, 3)))


@pytest.fixture
def gradient_image():
    return make_gradient(32)


def make_gradient(size):
    x = np.arange(size)
    xs, ys = np.meshgrid(x, x)
    data = np.stack([xs * 255 // (size - 1), ys * 255 // (size - 1), (xs + ys) * 255 // (2 * size - 2)], axis=-1)
    return ImageBuffer(data)
