"""
The confidence bank records how well the model currently handles each
category. Per-category indicators are measured on student predictions for
labeled data, smoothed with an exponential moving average, and turned into
sampling probabilities that favor under-performing categories.

Three indicators are available:

- ``confidence``: mean probability of the ground-truth class.
- ``margin``: ground-truth probability minus the second largest probability.
- ``entropy``: entropy of the full predicted distribution (natural log).

For every indicator, pixels are first averaged within an image (over the
pixels whose ground truth is ``c``), then across the images that contain
``c``. A category with no pixels in the batch is reported as unobserved.
"""

import copy
import math

import numpy as np
from scipy.special import entr, softmax

from ..core import constants
from ..core.utils import true_class_probability


def _per_image_class_means(per_pixel, gts, num_classes):
    """
    Returns an ``(N, C)`` array of per-image means of ``per_pixel`` over
    pixels of each ground-truth class, NaN where the class is absent.
    """
    means = np.full((len(gts), num_classes), np.nan)
    for i, (values, gt) in enumerate(zip(per_pixel, gts)):
        valid = gt.valid
        labels = gt.data[valid]
        counts = np.bincount(labels, minlength=num_classes)[:num_classes]
        totals = np.bincount(
            labels, weights=values[valid], minlength=num_classes)[:num_classes]
        present = counts > 0
        means[i, present] = totals[present] / counts[present]
    return means


def _nested_mean(per_pixel, gts, num_classes):
    means = _per_image_class_means(per_pixel, gts, num_classes)
    observed = ~np.all(np.isnan(means), axis=0)
    values = np.zeros(num_classes)
    for c in np.flatnonzero(observed):
        column = means[:, c]
        column = column[~np.isnan(column)]
        # fsum keeps the result independent of image order
        values[c] = math.fsum(column) / len(column)
    return values, observed


def _check_batch(preds, gts):
    if len(preds) == 0:
        raise ConfidenceBankException('empty batch')
    if len(preds) != len(gts):
        raise ConfidenceBankException(
            f'Got {len(preds)} predictions for {len(gts)} masks!')
    num_classes = preds[0].num_classes
    for p, y in zip(preds, gts):
        p.check_spatial_match(y)
        if p.num_classes != num_classes:
            raise ConfidenceBankException('Class count differs within batch!')
    return num_classes


def confidence_indicator(preds, gts):
    """
    Mean ground-truth-class probability per category.

    Args:
        preds (list of ProbMap): student predictions on labeled images.
        gts (list of LabelMask): ground truth for the same images.

    Returns:
        tuple: ``(values, observed)``, both length-C arrays.
    """
    num_classes = _check_batch(preds, gts)
    per_pixel = [true_class_probability(p, y)[0] for p, y in zip(preds, gts)]
    return _nested_mean(per_pixel, gts, num_classes)


def margin_indicator(preds, gts, exclude_target=False):
    """
    Ground-truth-class probability minus the second largest probability.

    Args:
        preds (list of ProbMap): student predictions on labeled images.
        gts (list of LabelMask): ground truth for the same images.
        exclude_target (bool, optional): If True, subtract the largest
          probability among the other classes instead of the second largest
          over all classes. Defaults to False.

    Returns:
        tuple: ``(values, observed)``, both length-C arrays.
    """
    num_classes = _check_batch(preds, gts)
    per_pixel = []
    for p, y in zip(preds, gts):
        p_true, _ = true_class_probability(p, y)
        if exclude_target:
            index = np.where(y.valid, y.data, 0)
            others = p.data.copy()
            np.put_along_axis(others, index[..., None], -np.inf, axis=-1)
            runner_up = others.max(axis=-1)
        else:
            runner_up = np.sort(p.data, axis=-1)[..., -2]
        per_pixel.append(p_true - runner_up)
    return _nested_mean(per_pixel, gts, num_classes)


def entropy_indicator(preds, gts):
    """
    Entropy ``-sum p ln p`` of every pixel's distribution, averaged over the
    pixels of each ground-truth class.

    Args:
        preds (list of ProbMap): student predictions on labeled images.
        gts (list of LabelMask): ground truth for the same images.

    Returns:
        tuple: ``(values, observed)``, both length-C arrays.
    """
    num_classes = _check_batch(preds, gts)
    per_pixel = [entr(p.data).sum(axis=-1) for p in preds]
    return _nested_mean(per_pixel, gts, num_classes)


INDICATORS = {
    constants.CONFIDENCE: confidence_indicator,
    constants.MARGIN: margin_indicator,
    constants.ENTROPY: entropy_indicator,
}


def indicator_range(indicator, num_classes):
    """
    (tuple) Closed interval an indicator's values live in.
    """
    if indicator == constants.CONFIDENCE:
        return 0.0, 1.0
    if indicator == constants.MARGIN:
        return -1.0, 1.0
    if indicator == constants.ENTROPY:
        return 0.0, math.log(num_classes)
    raise ConfidenceBankException(
        f'Unknown indicator {indicator}, expected one of '
        f'{constants.ALL_INDICATORS}')


class ConfidenceBank(object):
    """
    Per-category performance record, updated by EMA once per training step.

    A category's first observation seeds its value directly; later
    observations are blended as ``tau * old + (1 - tau) * new``. Categories not
    observed in a batch are left untouched.

    Args:
        num_classes (int): number of categories C.
        indicator (str, optional): one of ``constants.ALL_INDICATORS``.
          Defaults to 'confidence'.
        tau (float, optional): EMA momentum in ``[0, 1)``. Defaults to 0.999.
        margin_exclude_target (bool, optional): Margin variant, see
          :func:`margin_indicator`. Defaults to False.
    """

    def __init__(self, num_classes, indicator=constants.CONFIDENCE,
                 tau=constants.DEFAULT_TAU, margin_exclude_target=False):
        if not 0 <= tau < 1:
            raise ConfidenceBankException(f'tau must be in [0, 1), got {tau}')
        self.num_classes = num_classes
        self.indicator = indicator
        self.tau = tau
        self.margin_exclude_target = margin_exclude_target
        self.low, self.high = indicator_range(indicator, num_classes)
        self.values = np.zeros(num_classes)
        self.observed = np.zeros(num_classes, dtype=bool)
        self.frozen = False

    def measure(self, preds, gts):
        """
        Computes the configured indicator on a labeled batch and folds it into
        the bank.

        Returns:
            tuple: the batch ``(values, observed)`` that were applied.
        """
        func = INDICATORS[self.indicator]
        if self.indicator == constants.MARGIN:
            values, observed = func(
                preds, gts, exclude_target=self.margin_exclude_target)
        else:
            values, observed = func(preds, gts)
        self.ema_update(values, observed)
        return values, observed

    def ema_update(self, values, observed):
        """
        Applies one EMA step.

        Args:
            values (np.ndarray): batch indicator values, length C.
            observed (np.ndarray): boolean flags, length C.

        Returns:
            ConfidenceBank: self, updated.
        """
        if self.frozen:
            raise ConfidenceBankException('Cannot update a bank snapshot!')
        values = np.asarray(values, dtype=np.float64)
        observed = np.asarray(observed, dtype=bool)
        if values.shape != (self.num_classes,) or observed.shape != values.shape:
            raise ConfidenceBankException(
                f'Expected {self.num_classes} values, got {values.shape}')
        tol = 1e-9
        seen = values[observed]
        if seen.size and (seen.min() < self.low - tol or seen.max() > self.high + tol):
            raise ConfidenceBankException(
                f'{self.indicator} values must lie within '
                f'[{self.low}, {self.high}]')

        first = observed & ~self.observed
        blend = observed & self.observed
        self.values[first] = values[first]
        self.values[blend] = (
            self.tau * self.values[blend] + (1 - self.tau) * values[blend])
        self.values[observed] = np.clip(
            self.values[observed], self.low, self.high)
        self.observed |= observed
        return self

    def snapshot(self):
        """
        Returns a read-only copy for augmentation and sampling to read while
        the training loop keeps updating this bank.
        """
        snap = copy.deepcopy(self)
        snap.values.setflags(write=False)
        snap.observed.setflags(write=False)
        snap.frozen = True
        return snap

    def badness(self):
        """
        Per-category badness: ``1 - value`` for confidence and margin, the raw
        value for entropy. Unobserved categories get the mean badness of the
        observed ones (zero when nothing has been observed yet).
        """
        if self.indicator == constants.ENTROPY:
            bad = self.values.copy()
        else:
            bad = 1 - self.values
        if np.any(self.observed):
            bad[~self.observed] = bad[self.observed].mean()
        else:
            bad[:] = 0
        return bad

    def sampling_probabilities(self):
        """
        Softmax over the badness vector: under-performing categories are
        sampled more often.

        Returns:
            np.ndarray: length-C probabilities summing to one.
        """
        return softmax(self.badness())

    def state_dict(self):
        """
        Serializable state: indicator, tau and one ``(class_id, value,
        observed)`` record per category.
        """
        return {
            'indicator': self.indicator,
            'tau': self.tau,
            'margin_exclude_target': self.margin_exclude_target,
            'records': [
                (c, float(self.values[c]), bool(self.observed[c]))
                for c in range(self.num_classes)
            ],
        }

    def load_state_dict(self, state):
        records = state['records']
        if len(records) != self.num_classes:
            raise ConfidenceBankException(
                f'Bank state has {len(records)} classes, '
                f'expected {self.num_classes}')
        if state['indicator'] != self.indicator or state['tau'] != self.tau:
            raise ConfidenceBankException(
                'Bank state was saved with a different indicator or tau!')
        for c, value, observed in records:
            self.values[c] = value
            self.observed[c] = observed

    @classmethod
    def from_state_dict(cls, num_classes, state):
        bank = cls(num_classes, indicator=state['indicator'], tau=state['tau'],
                   margin_exclude_target=state.get('margin_exclude_target', False))
        bank.load_state_dict(state)
        return bank

    def __repr__(self):
        values = ', '.join(
            f'{v:.4f}' if o else '-' for v, o in zip(self.values, self.observed))
        return f'ConfidenceBank({self.indicator}, tau={self.tau}, [{values}])'


class ConfidenceBankException(Exception):
    """
    Exception class for errors when working with the confidence bank.
    """
    pass
