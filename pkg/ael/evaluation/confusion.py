"""
Per-class IoU from a confusion matrix. Rows index the ground truth, columns
the prediction; IGNORE pixels are never counted.
"""

from collections import namedtuple

import numpy as np
from sklearn.metrics import confusion_matrix

IoUReport = namedtuple(
    'IoUReport', ['per_class', 'present', 'miou', 'miou_tail', 'tail_classes'])
"""
Evaluation summary.

Args:
    per_class (np.ndarray): IoU per class, NaN where the class is absent.
    present (np.ndarray): True where the IoU denominator is positive.
    miou (float): mean IoU over present classes (NaN if none).
    miou_tail (float): mean IoU over present tail classes (NaN if none).
    tail_classes (list of int): the tail classes used.
"""


class ConfusionMatrix(object):
    """
    Accumulates a ``C x C`` matrix of pixel counts. Matrices built from
    disjoint batches can be merged with ``+`` in any order.

    Args:
        num_classes (int): number of categories C.
    """

    def __init__(self, num_classes):
        self.num_classes = num_classes
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    def accumulate(self, pred_mask, gt_mask):
        """
        Adds one count at ``[gt, pred]`` per pixel whose ground truth is not
        IGNORE.

        Args:
            pred_mask (LabelMask): predicted labels.
            gt_mask (LabelMask): ground truth.

        Returns:
            ConfusionMatrix: self.
        """
        pred_mask.check_spatial_match(gt_mask)
        valid = gt_mask.valid & pred_mask.valid
        gt = gt_mask.data[valid]
        pred = pred_mask.data[valid]
        if gt.size == 0:
            return self
        if max(gt.max(), pred.max()) >= self.num_classes:
            raise EvaluationException(
                f'Label out of range for {self.num_classes} classes!')
        self.counts += confusion_matrix(
            gt, pred, labels=np.arange(self.num_classes)).astype(np.int64)
        return self

    @property
    def total(self):
        """
        (int) Number of scored pixels.
        """
        return int(self.counts.sum())

    def __add__(self, other):
        if self.num_classes != other.num_classes:
            raise EvaluationException('Cannot merge matrices of different sizes!')
        merged = ConfusionMatrix(self.num_classes)
        merged.counts = self.counts + other.counts
        return merged

    def __eq__(self, other):
        return (isinstance(other, ConfusionMatrix)
                and np.array_equal(self.counts, other.counts))

    def __repr__(self):
        return f'ConfusionMatrix(num_classes={self.num_classes}, total={self.total})'


def tail_classes(pixel_counts):
    """
    The ``ceil(C / 2)`` classes with the fewest labeled pixels; ties go to
    the lower class id.

    Args:
        pixel_counts (np.ndarray): per-class pixel counts.

    Returns:
        list of int: sorted class ids.
    """
    pixel_counts = np.asarray(pixel_counts)
    num_tail = int(np.ceil(len(pixel_counts) / 2))
    order = np.argsort(pixel_counts, kind='stable')
    return sorted(int(c) for c in order[:num_tail])


def iou_report(cm, tail=None):
    """
    ``IoU_c = TP / (TP + FP + FN)``. Classes with a zero denominator are absent
    and left out of both means.

    Args:
        cm (ConfusionMatrix): accumulated counts.
        tail (list of int, optional): tail classes for ``miou_tail``.
          Defaults to None (``miou_tail`` is NaN).

    Returns:
        IoUReport: the summary.
    """
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    denominator = tp + fp + fn
    present = denominator > 0
    per_class = np.full(cm.num_classes, np.nan)
    per_class[present] = tp[present] / denominator[present]

    miou = float(per_class[present].mean()) if present.any() else float('nan')
    tail = [] if tail is None else sorted(int(c) for c in tail)
    tail_present = [c for c in tail if present[c]]
    miou_tail = (float(per_class[tail_present].mean())
                 if tail_present else float('nan'))
    return IoUReport(per_class, present, miou, miou_tail, tail)


class EvaluationException(Exception):
    """
    Exception class for errors in evaluation.
    """
    pass
