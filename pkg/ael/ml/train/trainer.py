import os
import logging
from datetime import timedelta

import numpy as np
import torch
from ignite.engine import Events, Engine, EventEnum
from ignite.handlers import Timer
from ignite.contrib.handlers import ProgressBar
from ignite.metrics import RunningAverage
from torch.utils.tensorboard import SummaryWriter


class ValidationEvents(EventEnum):
    """
    Events based on validation running
    """
    VALIDATION_STARTED = 'validation_started'
    VALIDATION_COMPLETED = 'validation_completed'


class CheckpointEvents(EventEnum):
    """
    Events based on checkpoints being written
    """
    CHECKPOINT_SAVED = 'checkpoint_saved'


def create_train_and_validation_engines(train_func, val_func=None):
    """
    Helper function for creating an ignite Engine object with helpful defaults.
    This sets up an Engine that has three handlers attached to it:

    - book_keeping: sets up a dictionary that records every output of
      ``train_func`` so the history of a run can be inspected and logged.

    - add_to_iter_history: appends the current iteration's outputs to
      the history.

    - clear_window: the stdout handler summarizes the outputs collected
      since its last report; this empties that window.

    Args:
        train_func (func): Function that provides the closure for training for
          a single step.
        val_func (func, optional): Function that provides the closure for
          evaluating a single item. Defaults to None.

    Returns:
        tuple: ``(trainer, validator)``; ``validator`` is None without
        ``val_func``.
    """
    trainer = Engine(train_func)
    trainer.register_events(*ValidationEvents)
    trainer.register_events(*CheckpointEvents)

    validator = None if val_func is None else Engine(val_func)

    def book_keeping(engine):
        engine.state.iter_history = {}
        engine.state.window = {}

    def add_to_iter_history(engine):
        for key, value in engine.state.output.items():
            engine.state.iter_history.setdefault(key, []).append(value)
            engine.state.window.setdefault(key, []).append(value)

    trainer.add_event_handler(Events.STARTED, book_keeping)
    trainer.add_event_handler(Events.ITERATION_COMPLETED, add_to_iter_history)
    return trainer, validator


def run_steps(trainer, train_state):
    """
    Runs ``trainer`` for the steps ``train_state`` has left. Each iteration
    is one training step; the closure draws its own data.
    """
    remaining = train_state.max_iter - train_state.step
    if remaining <= 0:
        logging.info('No steps left to run.')
        return trainer.state
    return trainer.run(range(remaining), max_epochs=1)


def add_checkpoint_handler(output_folder, trainer, train_state, save_func,
                           every):
    """
    Adds the following handler to the trainer:

    - save_checkpoint: every ``every`` steps (counted by ``train_state.step``
      so that resumed runs keep the same cadence) and when training
      completes, calls ``save_func(path)`` to write
      ``{output_folder}/checkpoints/latest.ckpt.pth`` and
      ``{output_folder}/checkpoints/step{k}.ckpt.pth``. Fires
      ``CheckpointEvents.CHECKPOINT_SAVED`` afterwards.

    Args:
        output_folder (str): run folder.
        trainer (ignite.Engine): Engine for trainer.
        train_state (TrainState): provides the current step.
        save_func (func): writes a checkpoint to the given path.
        every (int): checkpoint period in steps.
    """
    folder = os.path.join(output_folder, 'checkpoints')

    def save(engine):
        os.makedirs(folder, exist_ok=True)
        step = train_state.step
        paths = [os.path.join(folder, 'latest.ckpt.pth'),
                 os.path.join(folder, f'step{step}.ckpt.pth')]
        for path in paths:
            save_func(path)
        engine.state.saved_checkpoint = paths[0]
        engine.state.output_folder = output_folder
        engine.state.checkpoint_step = step
        engine.fire_event(CheckpointEvents.CHECKPOINT_SAVED)

    @trainer.on(Events.ITERATION_COMPLETED)
    def save_checkpoint(engine):
        if train_state.step % every == 0:
            save(engine)

    @trainer.on(Events.COMPLETED)
    def save_final_checkpoint(engine):
        if getattr(engine.state, 'checkpoint_step', None) != train_state.step:
            save(engine)


def add_validation_handler(trainer, validator, val_data):
    """
    Runs ``validator`` over ``val_data`` once training completes and stores
    the validator's final state on ``trainer.state.validation``.
    """
    @trainer.on(Events.COMPLETED)
    def validate(engine):
        engine.fire_event(ValidationEvents.VALIDATION_STARTED)
        engine.state.validation = validator.run(val_data, max_epochs=1)
        engine.fire_event(ValidationEvents.VALIDATION_COMPLETED)


def add_stdout_handler(trainer, train_state, bank=None, every=100):
    """
    This adds the following handler to the trainer engine, and also sets up
    Timers:

    - log_summary_to_stdout: every ``every`` steps, logs the mean of each
      output since the last summary. The output typically looks like this:

      .. code-block:: none

            STEP SUMMARY
            ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
            - Step: 0500 / 2000
            - Learning rate: 0.390280
            - Supervised loss:   0.314159
            - Unsupervised loss: 0.271828
            - Bank: 0.9712 0.6121 0.5410 0.4012 0.3851 0.2907
            - Window took: 00:00:09
            - Time since start: 00:00:36
            ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

    Args:
        trainer (ignite.Engine): Engine for trainer.
        train_state (TrainState): provides step and max_iter.
        bank (ConfidenceBank, optional): logged if given.
        every (int): period in steps.
    """
    overall_timer = Timer(average=False)
    overall_timer.attach(trainer, start=Events.STARTED, pause=Events.COMPLETED)
    window_timer = Timer(average=False)
    window_timer.attach(trainer, start=Events.STARTED)

    @trainer.on(Events.ITERATION_COMPLETED)
    def log_summary_to_stdout(engine):
        step = train_state.step
        if step % every != 0 and step != train_state.max_iter:
            return
        window = engine.state.window
        means = {k: np.mean(v) for k, v in window.items()}
        bank_str = 'N/A' if bank is None else ' '.join(
            f'{v:.4f}' if o else '-' for v, o in zip(bank.values, bank.observed))

        logging_str = (
            f"\n\n"
            f"STEP SUMMARY \n"
            f"~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~ \n"
            f"- Step: {step:04d} / {train_state.max_iter:04d} \n"
            f"- Learning rate: {means.get('lr', float('nan')):04f} \n"
            f"- Supervised loss:   {means.get('supervised_loss', float('nan')):04f} \n"
            f"- Unsupervised loss: {means.get('unsupervised_loss', float('nan')):04f} \n"
            f"- Bank: {bank_str} \n"
            f"- Window took: {timedelta(seconds=int(window_timer.value()))} \n"
            f"- Time since start: {timedelta(seconds=int(overall_timer.value()))} \n"
            f"~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~ \n"
        )
        logging.info(logging_str)
        engine.state.window = {}
        window_timer.reset()


def add_progress_bar_handler(*engines):
    """
    Adds a progress bar to each engine. Keeps track of a running
    average of the loss as well.

    Usage::

    .. code-block:: python

        tr_engine, val_engine = ...
        add_progress_bar_handler(tr_engine)
    """
    for engine in engines:
        output_transform = lambda x: x['loss']
        RunningAverage(output_transform=output_transform).attach(engine, 'avg_loss')
        ProgressBar().attach(engine, ['avg_loss'])


def add_tensorboard_handler(tensorboard_folder, engine, train_state, bank=None):
    """
    Every scalar output of a step is logged to TensorBoard, plus the
    per-class bank values when ``bank`` is given.

    Args:
        tensorboard_folder (str): Where the tensorboard logs should go.
        engine (ignite.Engine): The engine to log.
        train_state (TrainState): provides the step used as x axis.
        bank (ConfidenceBank, optional): bank to log.
    """
    writer = SummaryWriter(tensorboard_folder)

    @engine.on(Events.ITERATION_COMPLETED)
    def log_iteration_to_tensorboard(engine):
        step = train_state.step
        for key, value in engine.state.output.items():
            writer.add_scalar(f'train/{key}', value, step)
        if bank is not None:
            for c in np.flatnonzero(bank.observed):
                writer.add_scalar(f'bank/class{c}', bank.values[c], step)

    @engine.on(Events.COMPLETED)
    def close_writer(engine):
        writer.flush()
        writer.close()


def save_checkpoint(path, payload):
    """
    Writes a checkpoint dictionary with ``torch.save``.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    torch.save(payload, path)
    return path


def load_checkpoint(path):
    """
    Reads a checkpoint written by :func:`save_checkpoint`.
    """
    return torch.load(path, map_location='cpu', weights_only=False)
