import numpy as np
import pytest

from ael.core import (
    Image, LabelMask, ProbMap, LogitMap, SampleIndicator, PixelWeights,
    GridException, constants)


def test_image_validation():
    image = Image(np.full((4, 5, 3), 0.5))
    assert image.spatial_shape == (4, 5)
    assert image.height == 4 and image.width == 5
    assert image.data.dtype == np.float64

    pytest.raises(GridException, Image, np.full((4, 4, 3), 1.5))
    pytest.raises(GridException, Image, np.full((4, 4, 3), -0.1))
    pytest.raises(GridException, Image, np.zeros((4, 4, 4)))
    pytest.raises(GridException, Image, np.zeros((4, 4)))
    pytest.raises(GridException, Image, np.zeros((0, 4, 3)))
    bad = np.zeros((2, 2, 3))
    bad[0, 0, 0] = np.nan
    pytest.raises(GridException, Image, bad)


def test_grids_are_immutable():
    source = np.zeros((2, 2), dtype=np.int64)
    mask = LabelMask(source, num_classes=3)
    source[0, 0] = 2
    assert mask.data[0, 0] == 0

    with pytest.raises(ValueError):
        mask.data[0, 0] = 1
    with pytest.raises(GridException):
        mask.data = np.ones((2, 2))


def test_label_mask():
    data = np.array([[0, 1], [constants.IGNORE_INDEX, 2]])
    mask = LabelMask(data, num_classes=3)
    assert np.array_equal(mask.valid, [[True, True], [False, True]])

    pytest.raises(GridException, LabelMask, data, num_classes=2)
    pytest.raises(GridException, LabelMask, np.array([[-1, 0]]))
    pytest.raises(GridException, LabelMask, np.array([[0.5, 0]]))
    # float integers are accepted
    assert LabelMask(np.array([[1.0, 0.0]])).data.dtype == np.int64


def test_prob_map():
    probs = ProbMap(np.full((3, 3, 4), 0.25))
    assert probs.num_classes == 4

    pytest.raises(GridException, ProbMap, np.full((3, 3, 4), 0.3))
    data = np.zeros((1, 1, 2))
    data[..., 0] = -0.5
    data[..., 1] = 1.5
    pytest.raises(GridException, ProbMap, data)


def test_logit_map():
    logits = LogitMap(np.zeros((2, 2, 3)))
    assert logits.num_classes == 3
    data = np.zeros((2, 2, 3))
    data[0, 0, 0] = np.inf
    pytest.raises(GridException, LogitMap, data)


def test_indicator_and_weights():
    indicator = SampleIndicator(np.array([[0, 1], [1, 0]]))
    assert indicator.data.dtype == bool
    pytest.raises(GridException, SampleIndicator, np.array([[0, 2]]))

    weights = PixelWeights(np.array([[0.0, 0.5]]), gamma=2.0)
    assert weights.gamma == 2.0
    pytest.raises(GridException, PixelWeights, np.array([[1.5]]))
    pytest.raises(GridException, PixelWeights, np.array([[-0.1]]))


def test_check_spatial_match():
    image = Image(np.zeros((4, 4, 3)))
    LabelMask(np.zeros((4, 4))).check_spatial_match(image)
    with pytest.raises(GridException):
        LabelMask(np.zeros((4, 5))).check_spatial_match(image)
