"""
Analytic gradient of the training objective ``L_s + alpha * L_u`` with respect
to the ``(C, F)`` weights of a :class:`ael.ml.networks.PixelClassifier`.

For a softmax-linear model the cross-entropy derivative of pixel ``j`` with
respect to its logits is ``p_j - onehot(y_j)``, so every loss term reduces to

.. math::

    \\nabla_W = \\sum_j a_j (p_j - onehot(y_j)) f_j^T

with a per-pixel coefficient ``a_j`` that carries the normalization of the
loss: ``1 / (n_images * n_valid_i)`` for the supervised term and
``alpha * w_j / (n_weighted_images * sum_j w_j)`` for the unsupervised term.
Pixel weights are constants. Where the true-class probability falls under
the log clamp the loss is flat and the coefficient is 0.
"""

from collections import namedtuple

import numpy as np

from ...core import constants
from ...core.utils import softmax, one_hot, true_class_probability
from ..networks.pixel_classifier import pixel_features
from .loss import supervised_loss, unsupervised_loss_ael, total_loss

TrainBatch = namedtuple(
    'TrainBatch',
    ['images', 'labels', 'unlabeled_images', 'pseudo_masks', 'weights'])
"""
Inputs of one objective evaluation. ``weights`` holds one PixelWeights grid
per unlabeled image. The unlabeled fields may be empty lists.
"""


def forward_probs(weights, image):
    """
    Numpy forward pass: softmax of ``pixel_features(image) @ weights.T``.
    """
    return softmax(pixel_features(image) @ np.asarray(weights).T)


def _accumulate(features, probs, targets, coef):
    _, valid = true_class_probability(probs, targets)
    residual = probs.data - one_hot(targets, probs.num_classes)
    coef = np.where(valid, coef, 0.0)
    return np.einsum('hwc,hwf,hw->cf', residual, features, coef)


def _flat_mask(probs, targets):
    p_true, _ = true_class_probability(probs, targets)
    return p_true >= constants.PROB_CLAMP


def supervised_gradient(features, preds, gts):
    """
    Gradient of :func:`ael.ml.train.loss.supervised_loss`.

    Args:
        features (list of np.ndarray): ``(H, W, F)`` features per image.
        preds (list of ProbMap): model predictions for the same images.
        gts (list of LabelMask): targets.

    Returns:
        np.ndarray: ``(C, F)`` gradient.
    """
    num_classes = preds[0].num_classes
    grad = np.zeros((num_classes, features[0].shape[-1]))
    counts = [y.valid.sum() for y in gts]
    num_images = sum(1 for n in counts if n > 0)
    for f, p, y, n in zip(features, preds, gts, counts):
        if n == 0:
            continue
        coef = _flat_mask(p, y) / (num_images * n)
        grad += _accumulate(f, p, y, coef)
    return grad


def unsupervised_gradient(features, preds, pseudo_masks, weights):
    """
    Gradient of :func:`ael.ml.train.loss.unsupervised_loss_ael`. Pass
    all-ones weights on valid pixels for the unweighted loss.
    """
    num_classes = preds[0].num_classes
    grad = np.zeros((num_classes, features[0].shape[-1]))
    masked = [w.data * y.valid for w, y in zip(weights, pseudo_masks)]
    totals = [w.sum() for w in masked]
    num_images = sum(1 for t in totals if t > 0)
    for f, p, y, w, t in zip(features, preds, pseudo_masks, masked, totals):
        if t <= 0:
            continue
        coef = _flat_mask(p, y) * w / (num_images * t)
        grad += _accumulate(f, p, y, coef)
    return grad


def gradient_from_predictions(labeled_features, labeled_preds, labels,
                              unlabeled_features, unlabeled_preds,
                              pseudo_masks, weights, alpha):
    """
    Gradient of ``L_s + alpha * L_u`` given forward-pass outputs that are
    already available. With ``alpha == 0`` the unlabeled inputs are not read.

    Returns:
        np.ndarray: ``(C, F)`` gradient.
    """
    grad = supervised_gradient(labeled_features, labeled_preds, labels)
    if alpha != 0 and len(unlabeled_preds) > 0:
        grad = grad + alpha * unsupervised_gradient(
            unlabeled_features, unlabeled_preds, pseudo_masks, weights)
    return grad


def objective(weights, batch, alpha):
    """
    Evaluates ``L_s + alpha * L_u`` for weight matrix ``weights``.

    Args:
        weights (np.ndarray): ``(C, F)`` weights.
        batch (TrainBatch): images, targets and pixel weights.
        alpha (float): unsupervised loss weight.

    Returns:
        float: the objective.
    """
    preds = [forward_probs(weights, x) for x in batch.images]
    value = supervised_loss(preds, batch.labels)
    unsup = 0.0
    if alpha != 0 and len(batch.unlabeled_images) > 0:
        unlabeled = [forward_probs(weights, x) for x in batch.unlabeled_images]
        unsup = unsupervised_loss_ael(unlabeled, batch.pseudo_masks, batch.weights)
    return total_loss(value, unsup, alpha)


def loss_gradient(weights, batch, alpha):
    """
    Analytic gradient of :func:`objective` at ``weights``.

    Args:
        weights (np.ndarray): ``(C, F)`` weights.
        batch (TrainBatch): images, targets and pixel weights.
        alpha (float): unsupervised loss weight.

    Returns:
        np.ndarray: ``(C, F)`` gradient.
    """
    features = [pixel_features(x) for x in batch.images]
    preds = [forward_probs(weights, x) for x in batch.images]
    unlabeled_features, unlabeled_preds = [], []
    if alpha != 0:
        unlabeled_features = [pixel_features(x) for x in batch.unlabeled_images]
        unlabeled_preds = [forward_probs(weights, x) for x in batch.unlabeled_images]
    return gradient_from_predictions(
        features, preds, batch.labels, unlabeled_features, unlabeled_preds,
        batch.pseudo_masks, batch.weights, alpha)
