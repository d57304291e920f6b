"""
Evaluation
==========

Confusion matrix and IoU
------------------------
.. automodule:: ael.evaluation.confusion
    :members:
    :autosummary:

Sample ledger
-------------
.. autoclass:: ael.evaluation.SampleLedger
    :members:
    :autosummary:

Report card
-----------
.. automodule:: ael.evaluation.report_card
    :members:
    :autosummary:
"""

from .confusion import (
    ConfusionMatrix,
    IoUReport,
    iou_report,
    tail_classes,
    EvaluationException,
)
from .ledger import SampleLedger
from .report_card import (
    report_to_dict,
    report_table,
    aggregate_ablation,
    ablation_table,
    report_card,
)
