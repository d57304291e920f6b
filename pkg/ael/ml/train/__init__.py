"""
Training
--------

.. autofunction:: ael.ml.train.create_train_and_validation_engines

.. autofunction:: ael.ml.train.run_steps

.. autofunction:: ael.ml.train.add_checkpoint_handler

.. autofunction:: ael.ml.train.add_validation_handler

.. autofunction:: ael.ml.train.add_tensorboard_handler

.. autofunction:: ael.ml.train.add_stdout_handler

.. autofunction:: ael.ml.train.add_progress_bar_handler

.. autoclass:: ael.ml.train.ValidationEvents
    :members:
    :undoc-members:

.. autoclass:: ael.ml.train.CheckpointEvents
    :members:
    :undoc-members:

Train state
-----------

.. automodule:: ael.ml.train.state
    :members:
    :autosummary:

Loss functions
--------------

.. automodule:: ael.ml.train.loss
    :members:
    :undoc-members:
    :autosummary:

Gradients
---------

.. automodule:: ael.ml.train.gradients
    :members:
    :autosummary:

Closures
--------

.. automodule:: ael.ml.train.closures
    :members:
    :undoc-members:
    :autosummary:

"""

from .trainer import (
    create_train_and_validation_engines,
    run_steps,
    add_checkpoint_handler,
    add_validation_handler,
    add_tensorboard_handler,
    add_stdout_handler,
    add_progress_bar_handler,
    save_checkpoint,
    load_checkpoint,
    ValidationEvents,
    CheckpointEvents,
)
from .state import TrainState, TrainException, poly_factor

from . import loss
from . import gradients
from . import closures
