import numpy as np

from ael.core import LabelMask, ProbMap, PixelWeights, constants
from ael.ml.networks import pixel_features
from ael.ml.train.gradients import (
    TrainBatch, objective, loss_gradient, gradient_from_predictions,
    forward_probs)
from tests.conftest import random_image, random_mask


def _batch(rng, num_classes=3, size=4):
    images = [random_image(rng, size, size) for _ in range(2)]
    labels = [random_mask(rng, size, size, num_classes, 0.2) for _ in range(2)]
    unlabeled = [random_image(rng, size, size) for _ in range(2)]
    pseudo = [random_mask(rng, size, size, num_classes, 0.1) for _ in range(2)]
    weights = [PixelWeights(rng.random((size, size)) * (rng.random((size, size)) < 0.7))
               for _ in range(2)]
    return TrainBatch(images, labels, unlabeled, pseudo, weights)


def _finite_differences(weights, batch, alpha, eps=1e-5):
    grad = np.zeros_like(weights)
    for index in np.ndindex(*weights.shape):
        plus, minus = weights.copy(), weights.copy()
        plus[index] += eps
        minus[index] -= eps
        grad[index] = (objective(plus, batch, alpha) -
                       objective(minus, batch, alpha)) / (2 * eps)
    return grad


def test_gradient_matches_finite_differences():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        batch = _batch(rng)
        weights = rng.normal(scale=0.5, size=(3, constants.NUM_FEATURES))
        alpha = rng.uniform(0.5, 2.0)
        analytic = loss_gradient(weights, batch, alpha)
        numeric = _finite_differences(weights, batch, alpha)
        error = np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-8)
        assert error <= 1e-4


def test_supervised_only_gradient():
    rng = np.random.default_rng(5)
    batch = _batch(rng)
    weights = rng.normal(size=(3, constants.NUM_FEATURES))
    other = _batch(np.random.default_rng(6))
    swapped = batch._replace(unlabeled_images=other.unlabeled_images,
                             pseudo_masks=other.pseudo_masks,
                             weights=other.weights)
    assert np.array_equal(loss_gradient(weights, batch, 0.0),
                          loss_gradient(weights, swapped, 0.0))

    empty = batch._replace(unlabeled_images=[], pseudo_masks=[], weights=[])
    assert np.array_equal(loss_gradient(weights, empty, 0.0),
                          loss_gradient(weights, batch, 0.0))


def test_gradient_zero_at_optimum(rng):
    labels = LabelMask(np.array([[0, 1], [2, 1]]))
    probs = ProbMap(np.eye(3)[labels.data])
    image = random_image(rng, 2, 2)
    features = [pixel_features(image)]
    grad = gradient_from_predictions(
        features, [probs], [labels], features, [probs], [labels],
        [PixelWeights(np.ones((2, 2)))], 1.0)
    assert np.all(grad == 0)


def test_forward_probs_matches_classifier(rng):
    from ael.ml.networks import PixelClassifier
    model = PixelClassifier(4)
    weights = rng.normal(size=(4, constants.NUM_FEATURES))
    model.set_weights(weights)
    image = random_image(rng, 5, 6)
    assert np.allclose(forward_probs(weights, image).data, model.predict(image).data)
