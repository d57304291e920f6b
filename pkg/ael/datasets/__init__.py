"""
Datasets
========

Base class
----------
.. autoclass:: ael.datasets.BaseDataset
    :members:
    :autosummary:

SceneFolder
-----------
.. autoclass:: ael.datasets.SceneFolder
    :members:
    :autosummary:

OnTheFlyScenes
--------------
.. autoclass:: ael.datasets.OnTheFlyScenes
    :members:
    :autosummary:

Synthetic benchmark
-------------------
.. automodule:: ael.datasets.synthetic
    :members:
    :autosummary:

Partitions
----------
.. automodule:: ael.datasets.partition
    :members:
    :autosummary:

Data transforms
---------------
.. automodule:: ael.datasets.transforms
    :members:
    :autosummary:
"""

from .base_dataset import BaseDataset, DataSetException
from .hooks import SceneFolder, OnTheFlyScenes, read_dataset_info
from . import synthetic
from . import partition
from . import transforms
