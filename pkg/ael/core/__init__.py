"""
Core
====

Grids
-----
.. automodule:: ael.core.grids
    :members:
    :autosummary:

Constants
---------
.. automodule:: ael.core.constants
    :members:
    :autosummary:

General utilities
-----------------
.. automodule:: ael.core.utils
    :members:
    :autosummary:

Reading and writing
-------------------
.. automodule:: ael.core.io
    :members:
    :autosummary:
"""

from .grids import (
    Image,
    LabelMask,
    ProbMap,
    LogitMap,
    SampleIndicator,
    PixelWeights,
    GridException,
)
from . import constants
from . import utils
from . import io

__all__ = [
    'Image',
    'LabelMask',
    'ProbMap',
    'LogitMap',
    'SampleIndicator',
    'PixelWeights',
    'GridException',
    'constants',
    'utils',
    'io',
]
