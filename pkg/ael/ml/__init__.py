"""
Machine Learning
================

PixelClassifier
---------------

.. autoclass:: ael.ml.PixelClassifier
    :members:
    :autosummary:

Confidence bank
---------------

.. automodule:: ael.ml.confidence
    :members:
    :autosummary:

Training
--------

.. automodule:: ael.ml.train
    :members:
    :autosummary:
"""

from .networks import PixelClassifier, pixel_features
from .confidence import ConfidenceBank, ConfidenceBankException

from . import confidence
from . import train
