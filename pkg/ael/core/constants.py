"""
Constants shared by every part of ael: the IGNORE sentinel, numerical clamps,
indicator names and the default hyper-parameters of a run.
"""

__all__ = ['IGNORE_INDEX', 'PROB_CLAMP', 'BADNESS_CLAMP', 'PROB_SUM_TOL',
           'MIN_IMAGE_SIZE', 'NUM_CHANNELS', 'NUM_FEATURES',
           'CONFIDENCE', 'MARGIN', 'ENTROPY', 'ALL_INDICATORS',
           'WEIGHT_SOURCE_TEACHER', 'WEIGHT_SOURCE_STUDENT',
           'ALL_WEIGHT_SOURCES', 'PROTOCOLS', 'NUM_FOLDS', 'AEL_COMPONENTS']

IGNORE_INDEX = 255  #: (int): Mask value for void pixels. Skipped by losses, metrics and the bank.
PROB_CLAMP = 1e-12  #: (float): Lower clamp on the true-class probability inside the log.
BADNESS_CLAMP = 1e-6  #: (float): Lower clamp on per-class badness before normalizing rates.
PROB_SUM_TOL = 1e-6  #: (float): Tolerance on a pixel's probabilities summing to one.

MIN_IMAGE_SIZE = 8  #: (int): Smallest training image height/width.
NUM_CHANNELS = 3  #: (int): Images are always RGB.
NUM_FEATURES = 6  #: (int): Per-pixel features (r, g, b, x/W, y/H, 1).

# ############# Confidence bank indicators ############# #

CONFIDENCE = 'confidence'  #: (str): Mean true-class probability.
MARGIN = 'margin'  #: (str): True-class probability minus the second largest.
ENTROPY = 'entropy'  #: (str): Entropy of the full distribution.
ALL_INDICATORS = [CONFIDENCE, MARGIN, ENTROPY]

# ############# Dynamic re-weighting ############# #

WEIGHT_SOURCE_TEACHER = 'teacher'
WEIGHT_SOURCE_STUDENT = 'student-detached'
ALL_WEIGHT_SOURCES = [WEIGHT_SOURCE_TEACHER, WEIGHT_SOURCE_STUDENT]

# ############# Data ############# #

PROTOCOLS = [2, 4, 8, 16, 32]
"""list(int): Denominators of the labeled-fraction partition protocols."""
NUM_FOLDS = 5  #: (int): Folds generated per protocol.

# ############# Ablation ############# #

AEL_COMPONENTS = ['dr', 'aes', 'acm', 'acp']
"""list(str): The four switchable components, in report column order."""
COMPONENT_GRID_NAMES = ['table4', 'components']
"""list(str): Names accepted for the eight-row component ablation grid."""
ABLATION_SUMMARY = 'table4.csv'  #: (str): File name of the aggregated ablation table.
MIN_ABLATION_SEEDS = 3  #: (int): Seeds per grid row below which an ablation warns.

# ############# Defaults ############# #

DEFAULT_TAU = 0.999  #: (float): Confidence bank EMA momentum.
DEFAULT_TEACHER_MOMENTUM = 0.999  #: (float): Teacher weight EMA momentum.
DEFAULT_R_STAR = 0.005  #: (float): Presence threshold for adaptive CutMix.
DEFAULT_COPY_PASTE_K = 3  #: (int): Categories sampled per Copy-Paste pair.
DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 1.0
DEFAULT_GAMMA = 2.0
POLY_POWER = 0.9  #: (float): Exponent of the poly learning-rate policy.
