import os
import logging

import numpy as np
import torch
from ignite.engine import Engine

from ael.core import constants
from ael.ml.train import (
    TrainState, ValidationEvents, CheckpointEvents,
    create_train_and_validation_engines, run_steps, add_checkpoint_handler,
    add_validation_handler, add_stdout_handler, add_progress_bar_handler,
    add_tensorboard_handler, save_checkpoint, load_checkpoint)


def _closure(state):
    def train_func(engine, data):
        lr = state.current_lr()
        state.sgd_step(np.ones((state.num_classes, constants.NUM_FEATURES)))
        return {'loss': float(state.step), 'supervised_loss': 1.0,
                'unsupervised_loss': 0.5, 'lr': lr}
    return train_func


def _val_func(engine, data):
    return {'pixels': data}


def test_create_engines():
    state = TrainState(3, 5)
    trainer, validator = create_train_and_validation_engines(
        _closure(state), _val_func)
    assert isinstance(validator, Engine)
    _, no_validator = create_train_and_validation_engines(_closure(state))
    assert no_validator is None

    run_steps(trainer, state)
    assert state.step == 5
    assert trainer.state.iter_history['loss'] == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_run_steps_resumes(caplog):
    state = TrainState(3, 5)
    for _ in range(3):
        state.sgd_step(np.zeros((3, constants.NUM_FEATURES)))
    trainer, _ = create_train_and_validation_engines(_closure(state))
    run_steps(trainer, state)
    assert trainer.state.iteration == 2
    assert state.step == 5

    with caplog.at_level(logging.INFO):
        run_steps(trainer, state)
    assert 'No steps left to run.' in caplog.text


def test_checkpoint_handler(tmp_path):
    state = TrainState(3, 7)
    trainer, _ = create_train_and_validation_engines(_closure(state))
    saved = []

    def save_func(path):
        saved.append(os.path.basename(path))
        save_checkpoint(path, {'step': state.step,
                               'weight': state.student.weight.detach().clone()})

    @trainer.on(CheckpointEvents.CHECKPOINT_SAVED)
    def count_saves(engine):
        engine.state.saves = getattr(engine.state, 'saves', 0) + 1

    add_checkpoint_handler(str(tmp_path), trainer, state, save_func, every=3)
    run_steps(trainer, state)

    folder = tmp_path / 'checkpoints'
    assert sorted(os.listdir(folder)) == [
        'latest.ckpt.pth', 'step3.ckpt.pth', 'step6.ckpt.pth', 'step7.ckpt.pth']
    assert saved.count('latest.ckpt.pth') == 3
    assert trainer.state.saves == 3
    assert trainer.state.checkpoint_step == 7

    latest = load_checkpoint(str(folder / 'latest.ckpt.pth'))
    assert latest['step'] == 7
    assert torch.equal(latest['weight'], state.student.weight)


def test_final_checkpoint_not_duplicated(tmp_path):
    state = TrainState(3, 6)
    trainer, _ = create_train_and_validation_engines(_closure(state))
    saved = []
    add_checkpoint_handler(str(tmp_path), trainer, state,
                           lambda path: saved.append(path), every=3)
    run_steps(trainer, state)
    assert len(saved) == 4


def test_validation_handler():
    state = TrainState(3, 2)
    trainer, validator = create_train_and_validation_engines(
        _closure(state), _val_func)
    fired = []

    @trainer.on(ValidationEvents.VALIDATION_STARTED)
    def started(engine):
        fired.append('started')

    @trainer.on(ValidationEvents.VALIDATION_COMPLETED)
    def completed(engine):
        fired.append('completed')

    add_validation_handler(trainer, validator, [1, 2, 3])
    run_steps(trainer, state)
    assert fired == ['started', 'completed']
    assert trainer.state.validation.iteration == 3
    assert trainer.state.validation.output == {'pixels': 3}


def test_stdout_handler(caplog):
    state = TrainState(3, 5)
    trainer, _ = create_train_and_validation_engines(_closure(state))
    add_stdout_handler(trainer, state, every=2)
    with caplog.at_level(logging.INFO):
        run_steps(trainer, state)
    assert caplog.text.count('STEP SUMMARY') == 3
    assert 'Step: 0005 / 0005' in caplog.text
    assert trainer.state.window == {}


def test_progress_bar_and_tensorboard(tmp_path):
    state = TrainState(3, 3)
    trainer, _ = create_train_and_validation_engines(_closure(state))
    add_progress_bar_handler(trainer)
    add_tensorboard_handler(str(tmp_path / 'tensorboard'), trainer, state)
    run_steps(trainer, state)
    assert trainer.state.metrics['avg_loss'] > 0
    assert os.listdir(tmp_path / 'tensorboard')
