# Current ael version
__version__ = '0.1.0'

from .core import Image, LabelMask, ProbMap, LogitMap
from .core import utils, constants

from . import core
from . import datasets
from . import evaluation
from . import ml
from .config import RunConfig
