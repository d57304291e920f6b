"""
Losses of a training step. Everything here works on numpy grids; gradients
are derived analytically in :mod:`ael.ml.train.gradients`.

- :func:`supervised_loss`: mean over images of the per-image mean
  cross-entropy on labeled data.
- :func:`unsupervised_loss_plain`: the same on unlabeled data with pseudo
  labels as targets.
- :func:`sampling_rates`, :func:`sample_pixels`: adaptive equalization
  sampling, a per-pixel Bernoulli draw with class rate tied to bank badness.
- :func:`pixel_weights`: dynamic re-weighting by the most confident class
  probability raised to ``gamma``.
- :func:`unsupervised_loss_ael`: the weighted unsupervised loss.
- :func:`total_loss`: ``L_s + alpha * L_u``.
"""

import logging
from collections import namedtuple

import numpy as np

from ...core import constants
from ...core.grids import SampleIndicator, PixelWeights
from ...core.utils import cross_entropy

LossConfig = namedtuple(
    'LossConfig', ['alpha', 'beta', 'gamma', 'weight_source'])
"""
Loss hyper-parameters.

Args:
    alpha (float): Weight of the unsupervised loss. Defaults to 1.0.
    beta (float): Exponent of the equalization sampling rates. Defaults to 1.0.
    gamma (float): Exponent of the re-weighting. Defaults to 2.0.
    weight_source (str): Which probabilities the re-weighting reads, 'teacher' or
      'student-detached'. Defaults to 'teacher'.
"""
LossConfig.__new__.__defaults__ = (
    constants.DEFAULT_ALPHA, constants.DEFAULT_BETA, constants.DEFAULT_GAMMA,
    constants.WEIGHT_SOURCE_TEACHER)

SamplingRates = namedtuple('SamplingRates', ['s', 'beta'])
"""
Per-class inclusion probabilities ``s`` built with exponent ``beta``.
"""


def validate_loss_config(cfg):
    """
    Raises :class:`LossException` unless every field of ``cfg`` is in range.
    """
    for name in ['alpha', 'beta', 'gamma']:
        value = getattr(cfg, name)
        if not np.isfinite(value) or value < 0:
            raise LossException(f'loss.{name} must be >= 0, got {value}')
    if cfg.weight_source not in constants.ALL_WEIGHT_SOURCES:
        raise LossException(
            f'loss.weight_source must be one of '
            f'{constants.ALL_WEIGHT_SOURCES}, got {cfg.weight_source}')
    return cfg


def _check_pairs(preds, targets):
    if len(preds) == 0:
        raise LossException('Cannot compute a loss on an empty batch!')
    if len(preds) != len(targets):
        raise LossException(
            f'Got {len(preds)} predictions for {len(targets)} targets!')


def _mean_cross_entropy(preds, targets):
    _check_pairs(preds, targets)
    per_image = []
    for p, y in zip(preds, targets):
        loss, valid = cross_entropy(p, y)
        count = valid.sum()
        if count > 0:
            per_image.append(loss.sum() / count)
    if not per_image:
        return 0.0
    return float(np.mean(per_image))


def supervised_loss(preds, gts):
    """
    Mean over images of the mean pixel cross-entropy over non-IGNORE pixels.
    Images without a valid pixel are left out of the outer mean.

    Args:
        preds (list of ProbMap): student predictions on labeled images.
        gts (list of LabelMask): ground-truth masks.

    Returns:
        float: the loss.
    """
    return _mean_cross_entropy(preds, gts)


def unsupervised_loss_plain(preds, pseudo_masks):
    """
    Unweighted unsupervised loss: :func:`supervised_loss` with pseudo labels
    as targets.
    """
    return _mean_cross_entropy(preds, pseudo_masks)


def sampling_rates(bank, beta):
    """
    Per-class sampling rates ``s_c = (b_c / max b) ** beta`` where ``b`` is the
    bank badness clamped to ``BADNESS_CLAMP``. The worst class always has rate 1.

    Args:
        bank (ConfidenceBank): usually a snapshot taken at step start.
        beta (float): exponent; 0 disables the tilt.

    Returns:
        SamplingRates: the rates.
    """
    if beta < 0:
        raise LossException(f'beta must be >= 0, got {beta}')
    badness = np.maximum(bank.badness(), constants.BADNESS_CLAMP)
    s = (badness / badness.max()) ** beta
    return SamplingRates(s, beta)


def sample_pixels(pseudo, rates, rng):
    """
    Keeps every non-IGNORE pixel independently with probability ``s`` of its
    pseudo class.

    Args:
        pseudo (LabelMask): pseudo labels of one image.
        rates (SamplingRates): class rates.
        rng (np.random.Generator): random state.

    Returns:
        SampleIndicator: the kept pixels.
    """
    valid = pseudo.valid
    index = np.where(valid, pseudo.data, 0)
    if np.any(index >= len(rates.s)):
        raise LossException('Pseudo label out of range of the sampling rates!')
    draws = rng.random(pseudo.spatial_shape)
    return SampleIndicator(valid & (draws < rates.s[index]))


def all_pixels(pseudo):
    """
    Indicator with every valid pixel kept (equalization sampling disabled).
    """
    return SampleIndicator(pseudo.valid)


def pixel_weights(probs, indicator, gamma):
    """
    ``w = (max_c p_c) ** gamma`` on sampled pixels, 0 elsewhere. The
    probabilities are treated as constants by the gradient.

    Args:
        probs (ProbMap): teacher (or detached student) probabilities.
        indicator (SampleIndicator): pixels kept by equalization sampling.
        gamma (float): exponent; 0 disables re-weighting.

    Returns:
        PixelWeights: per-pixel weights.
    """
    if gamma < 0:
        raise LossException(f'gamma must be >= 0, got {gamma}')
    probs.check_spatial_match(indicator)
    confidence = probs.data.max(axis=-1) ** gamma
    return PixelWeights(np.where(indicator.data, confidence, 0.0), gamma=gamma)


def unsupervised_loss_ael(preds, pseudo_masks, weights):
    """
    Weighted unsupervised loss: for each image ``sum(w * ce) / sum(w)``, then
    the mean over images with a positive weight sum. If every image has zero
    weight, the loss is 0 and a warning is logged.

    Args:
        preds (list of ProbMap): student predictions on the strong views.
        pseudo_masks (list of LabelMask): pseudo labels on the same views.
        weights (list of PixelWeights): per-pixel weights.

    Returns:
        float: the loss.
    """
    _check_pairs(preds, pseudo_masks)
    if len(weights) != len(preds):
        raise LossException(
            f'Got {len(weights)} weight grids for {len(preds)} predictions!')

    per_image = []
    for p, y, w in zip(preds, pseudo_masks, weights):
        p.check_spatial_match(w)
        loss, valid = cross_entropy(p, y)
        w = w.data * valid
        total = w.sum()
        if total > 0:
            per_image.append(np.sum(w * loss) / total)
    if not per_image:
        logging.warning(
            'Every unlabeled image has zero total weight, unsupervised loss is 0.')
        return 0.0
    return float(np.mean(per_image))


def total_loss(supervised, unsupervised, alpha):
    """
    ``L = L_s + alpha * L_u``.
    """
    return supervised + alpha * unsupervised


class LossException(Exception):
    """
    Exception class for errors when computing losses.
    """
    pass
