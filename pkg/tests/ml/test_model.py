import numpy as np
import pytest
import torch

from ael.core import Image, constants
from ael.core.utils import argmax_mask
from ael.ml.networks import PixelClassifier, pixel_features
from ael.ml.train import TrainState, TrainException, poly_factor
from tests.conftest import random_image


def test_pixel_features(rng):
    image = random_image(rng, 4, 8)
    features = pixel_features(image)
    assert features.shape == (4, 8, constants.NUM_FEATURES)
    assert np.array_equal(features[..., :3], image.data)
    assert np.all(features[..., 5] == 1)
    assert features[2, 3, 3] == 3 / 8
    assert features[2, 3, 4] == 2 / 4
    assert features[..., 3:5].min() >= 0 and features[..., 3:5].max() <= 1


def test_forward_examples(rng):
    model = PixelClassifier(3)
    image = random_image(rng, 4, 4)
    assert np.all(model.logits(image).data == 0)
    assert np.allclose(model.predict(image).data, 1 / 3)

    weights = np.zeros((3, constants.NUM_FEATURES))
    weights[:, 5] = [0.5, -1.0, 2.0]
    model.set_weights(weights)
    logits = model.logits(image).data
    assert np.allclose(logits, [0.5, -1.0, 2.0])

    weights = rng.normal(size=(3, constants.NUM_FEATURES))
    model.set_weights(weights)
    single = Image(np.array([[[0.2, 0.4, 0.6]]]))
    expected = weights @ np.array([0.2, 0.4, 0.6, 0.0, 0.0, 1.0])
    assert np.allclose(model.logits(single).data[0, 0], expected)
    assert np.array_equal(model.get_weights(), weights)
    assert 'PixelClassifier' in repr(model)


def test_poly_schedule():
    state = TrainState(3, max_iter=10, base_lr=0.5)
    assert state.current_lr() == 0.5
    zero = np.zeros((3, constants.NUM_FEATURES))
    for _ in range(5):
        state.sgd_step(zero)
    assert np.isclose(state.current_lr(), 0.5 * 0.5 ** 0.9)
    assert np.isclose(0.5 ** 0.9, 0.5359, atol=1e-4)
    for _ in range(4):
        state.sgd_step(zero)
    lr = state.current_lr()
    assert 0 < lr < 0.5 * (1 / 10) ** 0.9 * 2
    assert np.array_equal(state.student.get_weights(), zero)

    state.sgd_step(zero)
    assert state.step == 10
    pytest.raises(TrainException, state.sgd_step, zero)
    assert poly_factor(0, 10) == 1.0


def test_sgd_step(rng):
    state = TrainState(3, max_iter=5, base_lr=0.3)
    gradient = rng.normal(size=(3, constants.NUM_FEATURES))
    state.sgd_step(gradient)
    assert np.allclose(state.student.get_weights(), -0.3 * gradient)
    assert state.step == 1
    pytest.raises(TrainException, state.sgd_step, np.zeros((2, 2)))
    pytest.raises(TrainException, TrainState, 3, max_iter=0)
    pytest.raises(TrainException, TrainState, 3, max_iter=5, teacher_momentum=1.0)


def test_teacher_update(rng):
    target = rng.normal(size=(3, constants.NUM_FEATURES))

    state = TrainState(3, max_iter=5, teacher_momentum=0.0)
    state.student.set_weights(target)
    state.teacher_update()
    assert np.allclose(state.teacher.get_weights(), target)
    state.teacher_update()
    assert np.allclose(state.teacher.get_weights(), target)

    state = TrainState(3, max_iter=5, teacher_momentum=0.9)
    state.student.set_weights(target)
    for n in range(1, 31):
        state.teacher_update()
        expected = target * (1 - 0.9 ** n)
        assert np.allclose(state.teacher.get_weights(), expected, atol=1e-12)
        assert (np.abs(state.teacher.get_weights()).max() <=
                np.abs(target).max() + 1e-12)


def test_teacher_bounded_by_student_history(rng):
    state = TrainState(3, max_iter=40, base_lr=0.5, teacher_momentum=0.8)
    history = 0.0
    for _ in range(40):
        state.sgd_step(rng.normal(size=(3, constants.NUM_FEATURES)))
        history = max(history, np.abs(state.student.get_weights()).max())
        state.teacher_update()
        assert np.abs(state.teacher.get_weights()).max() <= history + 1e-12


def test_pseudo_label(rng):
    state = TrainState(3, max_iter=5)
    image = random_image(rng, 6, 6)
    mask, probs = state.pseudo_label(image)
    assert np.all(mask.data == 0)

    weights = np.zeros((3, constants.NUM_FEATURES))
    weights[2, 5] = 50.0
    state.teacher.set_weights(weights)
    mask, probs = state.pseudo_label(image)
    assert np.all(mask.data == 2)

    state.teacher.set_weights(rng.normal(size=(3, constants.NUM_FEATURES)))
    mask, probs = state.pseudo_label(image)
    assert np.array_equal(argmax_mask(probs).data, mask.data)


def test_state_dict_round_trip(rng):
    state = TrainState(3, max_iter=6, base_lr=0.4, teacher_momentum=0.5)
    for _ in range(3):
        state.sgd_step(rng.normal(size=(3, constants.NUM_FEATURES)))
        state.teacher_update()

    other = TrainState(3, max_iter=6, base_lr=0.4, teacher_momentum=0.5)
    other.load_state_dict(state.state_dict())
    assert other.step == 3
    assert other.current_lr() == state.current_lr()
    assert torch.equal(other.student.weight, state.student.weight)
    assert torch.equal(other.teacher.weight, state.teacher.weight)

    gradient = rng.normal(size=(3, constants.NUM_FEATURES))
    state.sgd_step(gradient)
    other.sgd_step(gradient)
    assert torch.equal(other.student.weight, state.student.weight)

    pytest.raises(TrainException, TrainState(4, max_iter=6).load_state_dict,
                  state.state_dict())
