import copy

import numpy as np
import torch
from torch.optim.lr_scheduler import LambdaLR

from ...core import constants
from ...core.utils import argmax_mask
from ..networks import PixelClassifier


def poly_factor(step, max_iter, power=constants.POLY_POWER):
    """
    Poly learning-rate multiplier ``(1 - step / max_iter) ** power``.
    """
    return (1 - step / max_iter) ** power


class TrainState(object):
    """
    Student and teacher classifiers plus the optimizer state of a run. The
    student is updated by plain SGD with a poly learning-rate schedule; the
    teacher is an exponential moving average of the student.

    Args:
        num_classes (int): number of categories.
        max_iter (int): number of SGD steps in the run.
        base_lr (float, optional): learning rate at step 0. Defaults to 0.5.
        teacher_momentum (float, optional): teacher EMA momentum in ``[0, 1)``.
          Defaults to 0.999.
    """

    def __init__(self, num_classes, max_iter, base_lr=0.5,
                 teacher_momentum=constants.DEFAULT_TEACHER_MOMENTUM):
        if max_iter < 1:
            raise TrainException(f'max_iter must be positive, got {max_iter}')
        if not 0 <= teacher_momentum < 1:
            raise TrainException(
                f'teacher_momentum must be in [0, 1), got {teacher_momentum}')
        self.max_iter = max_iter
        self.base_lr = base_lr
        self.teacher_momentum = teacher_momentum
        self.step = 0

        self.student = PixelClassifier(num_classes)
        self.teacher = copy.deepcopy(self.student)
        self.teacher.requires_grad_(False)

        self.optimizer = torch.optim.SGD(self.student.parameters(), lr=base_lr)
        self.scheduler = LambdaLR(
            self.optimizer, lambda k: poly_factor(k, self.max_iter))

    @property
    def num_classes(self):
        return self.student.num_classes

    def current_lr(self):
        """
        (float) Learning rate the next :meth:`sgd_step` will use.
        """
        return self.optimizer.param_groups[0]['lr']

    def sgd_step(self, gradient):
        """
        ``student <- student - lr * gradient`` then advances the schedule.

        Args:
            gradient (np.ndarray): ``(C, F)`` gradient of the objective.

        Raises:
            TrainException: if ``max_iter`` steps were already taken.
        """
        if self.step >= self.max_iter:
            raise TrainException(
                f'Cannot step past max_iter={self.max_iter}!')
        gradient = torch.as_tensor(np.asarray(gradient), dtype=torch.float64)
        if gradient.shape != self.student.weight.shape:
            raise TrainException(
                f'Gradient of shape {tuple(gradient.shape)} does not match '
                f'weights of shape {tuple(self.student.weight.shape)}')
        self.optimizer.zero_grad()
        self.student.weight.grad = gradient.clone()
        self.optimizer.step()
        self.scheduler.step()
        self.step += 1
        return self

    def teacher_update(self):
        """
        ``teacher <- m * teacher + (1 - m) * student``, elementwise.
        """
        with torch.no_grad():
            self.teacher.weight.lerp_(
                self.student.weight, 1 - self.teacher_momentum)
        return self

    def pseudo_label(self, image):
        """
        Teacher prediction on a weak view. No confidence threshold is applied.

        Args:
            image (Image): weakly augmented unlabeled image.

        Returns:
            tuple: ``(LabelMask, ProbMap)``, the argmax mask and the teacher
            probabilities.
        """
        probs = self.teacher.predict(image)
        return argmax_mask(probs), probs

    def state_dict(self):
        return {
            'step': self.step,
            'max_iter': self.max_iter,
            'base_lr': self.base_lr,
            'teacher_momentum': self.teacher_momentum,
            'student': self.student.state_dict(),
            'teacher': self.teacher.state_dict(),
            'optimizer': self.optimizer.state_dict(),
            'scheduler': self.scheduler.state_dict(),
        }

    def load_state_dict(self, state):
        if state['student']['weight'].shape != self.student.weight.shape:
            raise TrainException(
                f"Checkpoint weights have shape "
                f"{tuple(state['student']['weight'].shape)}, expected "
                f"{tuple(self.student.weight.shape)}")
        self.step = state['step']
        self.max_iter = state['max_iter']
        self.base_lr = state['base_lr']
        self.teacher_momentum = state['teacher_momentum']
        self.student.load_state_dict(state['student'])
        self.teacher.load_state_dict(state['teacher'])
        self.optimizer.load_state_dict(state['optimizer'])
        self.scheduler.load_state_dict(state['scheduler'])


class TrainException(Exception):
    """
    Exception class for errors in the training loop.
    """
    pass
