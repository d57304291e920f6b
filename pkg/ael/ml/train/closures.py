import logging
from collections import OrderedDict

import numpy as np

from ...core import constants
from ...core.grids import LabelMask
from ...core.utils import argmax_mask
from ...evaluation.confusion import ConfusionMatrix
from ...datasets import transforms as tfm
from ..networks.pixel_classifier import pixel_features
from . import loss
from .gradients import gradient_from_predictions
from .state import TrainException


class Closure(object):
    """
    Closures are used with ignite Engines to train a model. The engine calls
    the closure once per iteration with the current batch; the closure draws
    its own data, runs the forward passes, computes the losses and updates
    the model. It returns a dictionary of scalars that the handlers of
    :mod:`ael.ml.train.trainer` log.
    """

    def __call__(self, engine, data):
        raise NotImplementedError()


class AELTrainClosure(Closure):
    """
    One step of teacher-student training with adaptive equalization:

    1. Draw ``N_l`` labeled and ``N_u`` unlabeled images uniformly with
       replacement and weakly augment them.
    2. The teacher labels the unlabeled weak views; the presence dictionary
       is updated.
    3. Strong views are built with adaptive CutMix (``acm``) or plain CutMix.
    4. Labeled pairs go through adaptive Copy-Paste (``acp``).
    5. The student predicts on the labeled batch and the strong views; the
       confidence bank is updated from the labeled predictions.
    6. Pixels are sampled by equalization sampling (``aes``, otherwise all
       valid pixels) and weighted by confidence (``dr``, otherwise
       ``gamma = 0``).
    7. ``L_s + alpha * L_u`` is differentiated analytically, the student takes
       one SGD step and the teacher follows by EMA.

    Augmentation and sampling read a snapshot of the bank taken at step start.

    Args:
        state (TrainState): student, teacher and optimizer.
        bank (ConfidenceBank): category-wise performance record.
        presence (PresenceDictionary): categories per unlabeled image.
        ledger (SampleLedger): per-class unsupervised pixel counts.
        labeled (list of dict): labeled items with ``id``, ``image``, ``mask``.
        unlabeled (list of dict): unlabeled items with ``id`` and ``image``.
        loss_cfg (LossConfig): loss settings.
        aug_cfg (AugConfig): augmentation settings.
        components (dict): which of dr/aes/acm/acp are enabled.
        batch_labeled (int): ``N_l``.
        batch_unlabeled (int): ``N_u``.
        rng (np.random.Generator): the run's random state.
    """

    def __init__(self, state, bank, presence, ledger, labeled, unlabeled,
                 loss_cfg, aug_cfg, components, batch_labeled, batch_unlabeled,
                 rng):
        if len(labeled) == 0:
            raise TrainException('Training needs at least one labeled image!')
        self.state = state
        self.bank = bank
        self.presence = presence
        self.ledger = ledger
        self.labeled = labeled
        self.unlabeled = unlabeled
        self.loss_cfg = loss_cfg
        self.aug_cfg = aug_cfg
        self.components = OrderedDict(
            (c, bool(components.get(c, False))) for c in constants.AEL_COMPONENTS)
        self.batch_labeled = batch_labeled
        self.batch_unlabeled = batch_unlabeled if len(unlabeled) > 0 else 0
        self.rng = rng
        self.fire_counts = OrderedDict((c, 0) for c in constants.AEL_COMPONENTS)

    def _weak(self, image, mask):
        return tfm.weak_augment(
            image, mask, self.rng, scale_range=self.aug_cfg.resize_range,
            flip_prob=self.aug_cfg.flip_prob)

    def labeled_batch(self):
        index = self.rng.integers(len(self.labeled), size=self.batch_labeled)
        batch = []
        for i in index:
            item = self.labeled[i]
            batch.append(tfm.LabeledSample(*self._weak(item['image'], item['mask'])))
        return batch

    def unlabeled_batch(self):
        if self.batch_unlabeled == 0:
            return []
        index = self.rng.integers(len(self.unlabeled), size=self.batch_unlabeled)
        batch = []
        for i in index:
            item = self.unlabeled[i]
            image, validity = self._weak(item['image'], None)
            pseudo, probs = self.state.pseudo_label(image)
            pseudo = LabelMask(
                np.where(validity.valid, pseudo.data, constants.IGNORE_INDEX),
                num_classes=self.state.num_classes)
            self.presence.update(item['id'], pseudo)
            batch.append(tfm.UnlabeledSample(image, pseudo, item['id'], probs))
        return batch

    def strong_views(self, batch, snapshot):
        if not batch:
            return []
        if self.components['acm']:
            return [
                tfm.adaptive_cutmix(batch, snapshot, self.presence,
                                    self.aug_cfg, self.rng)
                for _ in batch
            ]
        return [tfm.cutmix(batch, self.aug_cfg, self.rng) for _ in batch]

    def copy_paste(self, batch, snapshot):
        if not self.components['acp']:
            return batch
        pasted = []
        for dst in batch:
            src = batch[self.rng.integers(len(batch))]
            out = tfm.adaptive_copy_paste(src, dst, snapshot, self.aug_cfg, self.rng)
            pasted.append(tfm.LabeledSample(out.image, out.mask))
        return pasted

    def pixel_weights(self, views, student_preds, snapshot):
        if self.components['aes']:
            rates = loss.sampling_rates(snapshot, self.loss_cfg.beta)
            indicators = [
                loss.sample_pixels(v.mask, rates, self.rng) for v in views]
        else:
            indicators = [loss.all_pixels(v.mask) for v in views]

        gamma = self.loss_cfg.gamma if self.components['dr'] else 0.0
        if self.loss_cfg.weight_source == constants.WEIGHT_SOURCE_TEACHER:
            sources = [v.probs for v in views]
        else:
            sources = student_preds
        return [loss.pixel_weights(p, ind, gamma)
                for p, ind in zip(sources, indicators)]

    def step(self):
        """
        Runs one training step.

        Returns:
            dict: scalars describing the step.
        """
        step = self.state.step
        snapshot = self.bank.snapshot()

        labeled = self.labeled_batch()
        unlabeled = self.unlabeled_batch()
        views = self.strong_views(unlabeled, snapshot)
        labeled = self.copy_paste(labeled, snapshot)

        labeled_preds = [self.state.student.predict(s.image) for s in labeled]
        labels = [s.mask for s in labeled]
        view_preds = [self.state.student.predict(v.image) for v in views]
        self.bank.measure(labeled_preds, labels)

        weights = self.pixel_weights(views, view_preds, snapshot)
        pseudo = [v.mask for v in views]

        supervised = loss.supervised_loss(labeled_preds, labels)
        unsupervised = 0.0
        if views:
            unsupervised = loss.unsupervised_loss_ael(view_preds, pseudo, weights)
        total = loss.total_loss(supervised, unsupervised, self.loss_cfg.alpha)

        gradient = gradient_from_predictions(
            [pixel_features(s.image) for s in labeled], labeled_preds, labels,
            [pixel_features(v.image) for v in views], view_preds, pseudo,
            weights, self.loss_cfg.alpha)

        lr = self.state.current_lr()
        self.state.sgd_step(gradient)
        self.state.teacher_update()
        self.ledger.update(step, pseudo, weights)

        # dr, aes and acm act on unlabeled views only
        fired = [c for c, on in self.components.items()
                 if on and (views or c == 'acp')]
        for c in fired:
            self.fire_counts[c] += 1
        logging.debug(
            f'step {step}: components fired: {", ".join(fired) or "none"}')

        output = OrderedDict([
            ('loss', total),
            ('supervised_loss', supervised),
            ('unsupervised_loss', unsupervised),
            ('lr', lr),
        ])
        for c in constants.AEL_COMPONENTS:
            output[f'fired/{c}'] = int(c in fired)
        return output

    def __call__(self, engine, data):
        return self.step()

    def state_dict(self):
        return {
            'rng': self.rng.bit_generator.state,
            'fire_counts': dict(self.fire_counts),
        }

    def load_state_dict(self, state):
        self.rng.bit_generator.state = state['rng']
        self.fire_counts = OrderedDict(
            (c, state['fire_counts'][c]) for c in constants.AEL_COMPONENTS)


class ValidationClosure(Closure):
    """
    Scores one item per iteration: the model's argmax prediction is added to
    a running :class:`ael.evaluation.ConfusionMatrix`.

    Args:
        model (PixelClassifier): the model to evaluate.
    """

    def __init__(self, model):
        self.model = model
        self.confusion = ConfusionMatrix(model.num_classes)

    def __call__(self, engine, data):
        pred = argmax_mask(self.model.predict(data['image']))
        self.confusion.accumulate(pred, data['mask'])
        return {'pixels': self.confusion.total}
