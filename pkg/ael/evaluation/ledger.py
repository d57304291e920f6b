import numpy as np
import pandas as pd

from .confusion import EvaluationException


class SampleLedger(object):
    """
    Per-class cumulative count of pixels that contributed to the unsupervised
    loss (positive weight), grouped by pseudo class. Shows how training is
    tilted between head and tail categories.

    Args:
        num_classes (int): number of categories.
    """

    def __init__(self, num_classes):
        self.num_classes = num_classes
        self.totals = np.zeros(num_classes, dtype=np.int64)
        self.steps = []
        self.history = []

    def update(self, step, pseudo_masks, weights):
        """
        Adds the positive-weight pixel counts of one step. A step without
        any positive weight leaves the ledger unchanged.

        Args:
            step (int): training step, not below the last recorded step.
            pseudo_masks (list of LabelMask): pseudo labels.
            weights (list of PixelWeights or SampleIndicator): aligned weights.

        Returns:
            np.ndarray: the increment.
        """
        if self.steps and step < self.steps[-1]:
            raise EvaluationException(
                f'Ledger steps must not decrease: {step} after {self.steps[-1]}')
        increment = np.zeros(self.num_classes, dtype=np.int64)
        for pseudo, w in zip(pseudo_masks, weights):
            pseudo.check_spatial_match(w)
            keep = (w.data > 0) & pseudo.valid
            increment += np.bincount(
                pseudo.data[keep], minlength=self.num_classes)[:self.num_classes]
        if increment.sum() == 0:
            return increment
        self.totals = self.totals + increment
        self.steps.append(step)
        self.history.append(self.totals.copy())
        return increment

    def tail_share(self, tail):
        """
        (float) Fraction of all counted pixels that belong to ``tail``.
        """
        total = self.totals.sum()
        if total == 0:
            return 0.0
        return float(self.totals[list(tail)].sum() / total)

    def to_frame(self):
        """
        Long-format table with columns ``step, class, count`` holding the
        cumulative count of every class after each recorded step.
        """
        rows = [
            (step, c, int(counts[c]))
            for step, counts in zip(self.steps, self.history)
            for c in range(self.num_classes)
        ]
        return pd.DataFrame(rows, columns=['step', 'class', 'count'])

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False)

    def state_dict(self):
        return {
            'totals': self.totals.tolist(),
            'steps': list(self.steps),
            'history': [h.tolist() for h in self.history],
        }

    def load_state_dict(self, state):
        self.totals = np.array(state['totals'], dtype=np.int64)
        self.steps = list(state['steps'])
        self.history = [np.array(h, dtype=np.int64) for h in state['history']]

    def __repr__(self):
        return f'SampleLedger(totals={self.totals.tolist()})'
