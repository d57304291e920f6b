import os
import tempfile

import numpy as np
import pytest

from ael.core import Image, LabelMask, GridException, constants
from ael.core.io import write_image, read_image, write_mask, read_mask


def test_image_round_trip(rng):
    data = rng.integers(256, size=(8, 9, 3)) / 255
    image = Image(data)
    with tempfile.TemporaryDirectory() as tmp_dir:
        path = os.path.join(tmp_dir, 'nested', 'image.png')
        write_image(image, path)
        loaded = read_image(path)
    assert np.array_equal(loaded.data, image.data)


def test_image_quantized(rng):
    image = Image(rng.random((4, 4, 3)))
    with tempfile.TemporaryDirectory() as tmp_dir:
        path = os.path.join(tmp_dir, 'image.png')
        write_image(image, path)
        loaded = read_image(path)
    assert np.max(np.abs(loaded.data - image.data)) <= 0.5 / 255 + 1e-12


def test_mask_round_trip(rng):
    data = rng.integers(5, size=(8, 8))
    data[0, :] = constants.IGNORE_INDEX
    mask = LabelMask(data, num_classes=5)
    with tempfile.TemporaryDirectory() as tmp_dir:
        path = os.path.join(tmp_dir, 'mask.png')
        write_mask(mask, path)
        loaded = read_mask(path, num_classes=5)

        assert np.array_equal(loaded.data, mask.data)
        assert not loaded.valid[0].any()

        write_image(Image(np.zeros((2, 2, 3))), path)
        pytest.raises(GridException, read_mask, path)

    pytest.raises(GridException, write_mask, LabelMask(np.array([[300]])), 'x.png')
