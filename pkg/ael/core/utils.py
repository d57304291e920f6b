"""
Elementary per-pixel numerics shared by every module, plus seeding helpers.
"""

import random

import numpy as np
import torch
from scipy.special import logsumexp

from . import constants
from .grids import LogitMap, ProbMap, LabelMask, GridException


def seed(random_seed, set_cudnn=False):
    """
    Seeds all global random states with the same random seed for
    reproducibility. Seeds ``numpy``, ``random`` and ``torch`` random
    generators. Operations in ael take an explicit ``np.random.Generator``;
    this only pins third-party code that reaches for global state.

    Args:
        random_seed (int): integer corresponding to random seed to
          use.
        set_cudnn (bool): Whether or not to set cudnn into determinstic
          mode and off of benchmark mode. Defaults to False.
    """
    torch.manual_seed(random_seed)
    np.random.seed(random_seed)
    random.seed(random_seed)

    if set_cudnn:
        torch.backends.cudnn.deterministic = True
        torch.backends.cudnn.benchmark = False


def make_rng(*seeds):
    """
    Builds a ``np.random.Generator`` from one or more integers. Distinct seed
    tuples give independent streams, e.g. ``make_rng(seed, fold)``.
    """
    return np.random.default_rng(list(seeds) if len(seeds) > 1 else seeds[0])


def softmax(logits):
    """
    Per-pixel softmax over the class axis, stabilized by subtracting the
    per-pixel maximum (inside ``logsumexp``).

    Args:
        logits (LogitMap or np.ndarray): ``(H, W, C)`` scores.

    Returns:
        ProbMap: the per-pixel distributions.
    """
    data = logits.data if isinstance(logits, LogitMap) else np.asarray(
        logits, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise GridException('non-finite logits')
    probs = np.exp(data - logsumexp(data, axis=-1, keepdims=True))
    return ProbMap(probs)


def argmax_mask(probs):
    """
    Hardens a ProbMap to labels. Ties go to the lowest class index, which is
    what ``np.argmax`` does.

    Args:
        probs (ProbMap): per-pixel distributions.

    Returns:
        LabelMask: index of the most probable class at every pixel.
    """
    return LabelMask(np.argmax(probs.data, axis=-1),
                     num_classes=probs.num_classes)


def true_class_probability(probs, labels):
    """
    Gathers ``p_j^{y_j}`` for every pixel. IGNORE pixels get 1 so that any
    log of them is zero.

    Args:
        probs (ProbMap): per-pixel distributions.
        labels (LabelMask): targets with the same height and width.

    Returns:
        tuple: ``(p_true, valid)`` as ``(H, W)`` arrays.
    """
    probs.check_spatial_match(labels)
    valid = labels.valid
    if np.any(labels.data[valid] >= probs.num_classes):
        raise GridException(
            f'Label out of range for {probs.num_classes} classes!')
    index = np.where(valid, labels.data, 0)
    p_true = np.take_along_axis(probs.data, index[..., None], axis=-1)[..., 0]
    p_true = np.where(valid, p_true, 1.0)
    return p_true, valid


def cross_entropy(probs, labels):
    """
    Pixel-wise cross-entropy ``-ln p_j^{y_j}``. The true-class probability is
    clamped to ``PROB_CLAMP`` before the log. IGNORE pixels yield 0 and are
    reported as excluded.

    Args:
        probs (ProbMap): per-pixel predictions.
        labels (LabelMask): targets.

    Returns:
        tuple: ``(loss, valid)`` where ``loss`` is a float ``(H, W)`` grid and
        ``valid`` is a boolean grid of the pixels included.
    """
    p_true, valid = true_class_probability(probs, labels)
    loss = -np.log(np.maximum(p_true, constants.PROB_CLAMP))
    loss = np.where(valid, loss, 0.0)
    return loss, valid


def one_hot(labels, num_classes):
    """
    One-hot encodes a LabelMask as a float ``(H, W, C)`` array; IGNORE pixels
    are all-zero rows.
    """
    valid = labels.valid
    index = np.where(valid, labels.data, 0)
    encoded = np.eye(num_classes, dtype=np.float64)[index]
    encoded[~valid] = 0
    return encoded
