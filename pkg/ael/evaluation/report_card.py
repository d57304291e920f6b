import os
import json

import numpy as np
import pandas as pd
import termtables

from ..core import constants
from .confusion import EvaluationException

ABLATION_METRICS = ['miou', 'miou_tail', 'tail_share']


def truncate(values, decs=2):
    return np.trunc(values * 10 ** decs) / (10 ** decs)


def _format_title(title, length, marker=" "):
    pad = (length - len(title)) // 2
    pad = ''.join([marker for _ in range(pad)])
    border = pad + title + pad
    if len(title) % 2:
        border = border + marker
    return border


def _nan_to_none(value):
    value = float(value)
    return None if np.isnan(value) else value


def report_to_dict(report):
    """
    JSON-ready view of an :class:`ael.evaluation.IoUReport`. Absent classes
    have an IoU of None.
    """
    return {
        'per_class_iou': [_nan_to_none(v) for v in report.per_class],
        'present': [bool(p) for p in report.present],
        'miou': _nan_to_none(report.miou),
        'miou_tail': _nan_to_none(report.miou_tail),
        'tail_classes': list(report.tail_classes),
    }


def _format_value(value, decs):
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return 'absent'
    return f'{100 * value:{4 + decs}.{decs}f}'


def report_table(report, decimals=2):
    """
    Renders a report (an IoUReport or the dict of :func:`report_to_dict`) as
    an aligned text table, IoU in percent::

        ┌─────────┬─────────┬──────┐
        │ CLASS   │   IOU   │ TAIL │
        ╞═════════╪═════════╪══════╡
        │ 0       │  97.12  │      │
        ├─────────┼─────────┼──────┤
        ...
        │ mIoU    │  71.40  │      │
        │ mIoU_t  │  55.23  │      │
        └─────────┴─────────┴──────┘
    """
    if not isinstance(report, dict):
        report = report_to_dict(report)
    tail = set(report['tail_classes'])
    data = [
        [str(c), _format_value(v, decimals), '*' if c in tail else '']
        for c, v in enumerate(report['per_class_iou'])
    ]
    data.append(['mIoU', _format_value(report['miou'], decimals), ''])
    data.append(['mIoU_tail', _format_value(report['miou_tail'], decimals), ''])
    header = ['CLASS', _format_title('IOU', 9), 'TAIL']
    return termtables.to_string(
        data, header=header, padding=(0, 1), alignment='lcc')


def aggregate_ablation(results, decimals=2):
    """
    Mean and standard deviation of ablation metrics per flag combination.

    Args:
        results (pd.DataFrame): one row per run with columns ``dr, aes, acm,
          acp, seed`` and the metrics in ``ABLATION_METRICS``.
        decimals (int, optional): decimals of the formatted columns.

    Returns:
        pd.DataFrame: one row per combination with ``seeds``,
        ``<metric>_mean``, ``<metric>_std`` and a formatted ``<metric>``
        column (``mean +/- std`` in percent).
    """
    flags = constants.AEL_COMPONENTS
    missing = [c for c in flags + ABLATION_METRICS if c not in results.columns]
    if missing:
        raise EvaluationException(f'Ablation results lack columns {missing}')

    grouped = results.groupby(flags, sort=False)
    summary = grouped[ABLATION_METRICS].agg(['mean', 'std'])
    summary.columns = [f'{m}_{s}' for m, s in summary.columns]
    summary = summary.fillna({f'{m}_std': 0.0 for m in ABLATION_METRICS})
    summary.insert(0, 'seeds', grouped.size())
    summary = summary.reset_index()

    for m in ABLATION_METRICS:
        means = truncate(100 * summary[f'{m}_mean'], decimals)
        stds = truncate(100 * summary[f'{m}_std'], decimals)
        summary[m] = [
            f'{a:{4 + decimals}.{decimals}f} +/- {b:{3 + decimals}.{decimals}f}'
            for a, b in zip(means, stds)
        ]
    return summary


def ablation_table(summary):
    """
    Renders the output of :func:`aggregate_ablation` with one check mark
    column per component.
    """
    header = [f.upper() for f in constants.AEL_COMPONENTS]
    header += ['SEEDS', 'MIOU', 'MIOU_TAIL', 'TAIL SHARE']
    data = []
    for _, row in summary.iterrows():
        marks = ['x' if bool(row[f]) else '' for f in constants.AEL_COMPONENTS]
        data.append(marks + [
            int(row['seeds']), row['miou'], row['miou_tail'], row['tail_share']])
    return termtables.to_string(
        data, header=header, padding=(0, 1), alignment='c' * len(header))


def report_card(path):
    """
    Human-readable rendering of a run or ablation output. ``path`` may be a
    ``metrics.json``, a ``table4.csv`` or a folder containing either.

    Returns:
        str: the report card.
    """
    if os.path.isdir(path):
        candidates = [os.path.join(path, 'metrics.json'),
                      os.path.join(path, constants.ABLATION_SUMMARY)]
        found = [c for c in candidates if os.path.exists(c)]
        if not found:
            raise EvaluationException(
                f'No metrics.json or {constants.ABLATION_SUMMARY} in {path}')
        return '\n'.join(report_card(c) for c in found)

    if not os.path.exists(path):
        raise EvaluationException(f'No such file: {path}')

    if path.endswith('.csv'):
        summary = pd.read_csv(path)
        line = ablation_table(summary)
        width = line.index('\n')
        return (f"{_format_title(' MEAN +/- STD OVER SEEDS ', width)}\n"
                f"{line}\n")

    with open(path, 'r') as f:
        metrics = json.load(f)
    report = metrics['evaluation'] if 'evaluation' in metrics else metrics
    table = report_table(report)
    width = table.index('\n')
    card = (f"{_format_title(' PER-CLASS IOU ', width)}\n"
            f"{table}\n")
    if 'ledger' in metrics:
        card += (f"Tail share of unsupervised pixels: "
                 f"{100 * metrics['ledger']['tail_share']:.2f}%\n")
    return card
