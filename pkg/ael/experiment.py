"""
Experiment orchestration: one training run, evaluation of a checkpoint and
the component ablation grid. Every output a run writes lives under its
output folder::

    out/
        config.resolved
        metrics.json
        ledger.csv
        checkpoints/latest.ckpt.pth
        checkpoints/step<k>.ckpt.pth
        tensorboard/            # only with train.tensorboard = true

An ablation writes one such folder per cell under ``out/cells/`` plus
``runs.csv`` (one row per cell) and ``table4.csv`` (mean +/- std per flag
combination).
"""

import os
import json
import logging
import itertools
from collections import namedtuple, OrderedDict
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd
from ignite.engine import Engine, Events

from .core import constants, utils
from .config import RunConfig, ConfigException
from .datasets import SceneFolder, read_dataset_info
from .datasets.partition import read_partition
from .datasets.transforms import PresenceDictionary
from .evaluation import (
    SampleLedger, iou_report, tail_classes, report_to_dict, aggregate_ablation,
    EvaluationException)
from .ml import ConfidenceBank, PixelClassifier
from .ml.train import (
    TrainState, create_train_and_validation_engines, run_steps,
    add_checkpoint_handler, add_validation_handler, add_stdout_handler,
    add_progress_bar_handler, add_tensorboard_handler, save_checkpoint,
    load_checkpoint)
from .ml.train.closures import AELTrainClosure, ValidationClosure

Run = namedtuple('Run', [
    'config', 'num_classes', 'state', 'bank', 'presence', 'ledger', 'closure',
    'val_data', 'val_split', 'tail',
])
"""
Everything a training run mutates or reads, built by :func:`build_run`.
"""

COMPONENT_GRID = [
    (0, 0, 0, 0),
    (1, 0, 0, 0),
    (0, 1, 0, 0),
    (0, 0, 1, 0),
    (0, 0, 0, 1),
    (1, 1, 0, 0),
    (1, 1, 1, 0),
    (1, 1, 1, 1),
]
"""list: The component ablation rows, flags ordered as dr, aes, acm, acp."""


def _labeled_pixel_counts(items, num_classes):
    counts = np.zeros(num_classes, dtype=np.int64)
    for item in items:
        mask = item['mask']
        counts += np.bincount(
            mask.data[mask.valid], minlength=num_classes)[:num_classes]
    return counts


def build_run(config):
    """
    Reads the partition and data of ``config`` and sets up the model, the
    confidence bank, the presence dictionary, the ledger and the training
    closure. Nothing is trained.

    Args:
        config (RunConfig): validated or not; validated here.

    Returns:
        Run: the assembled run.

    Raises:
        ConfigException: if ``data.root`` is not set.
    """
    config.validate()
    root = config['data.root']
    if not root:
        raise ConfigException(
            'data.root is not set. Generate a dataset with '
            '`ael synthdata generate --out DIR --count N --seed S` and pass '
            '`--set data.root=DIR`.')

    labeled_ids, unlabeled_ids = read_partition(
        root, config['data.protocol'], config['data.fold'])
    labeled = list(SceneFolder(root, split='train', ids=labeled_ids))
    unlabeled = list(SceneFolder(root, split='train', ids=unlabeled_ids))
    val_split = 'val'
    val_data = list(SceneFolder(root, split=val_split))
    if not val_data:
        logging.warning(
            f'Validation split of {root} is empty, evaluating on train.')
        val_split = 'train'
        val_data = list(SceneFolder(root, split=val_split))

    num_classes = read_dataset_info(root)['scene_config']['num_classes']
    tail = tail_classes(_labeled_pixel_counts(labeled, num_classes))
    logging.info(
        f'{len(labeled)} labeled, {len(unlabeled)} unlabeled and '
        f'{len(val_data)} {val_split} images; tail classes {tail}')

    state = TrainState(
        num_classes, config['max_iter'], base_lr=config['model.base_lr'],
        teacher_momentum=config['model.teacher_momentum'])
    bank = ConfidenceBank(
        num_classes, indicator=config['bank.indicator'], tau=config['bank.tau'],
        margin_exclude_target=config['bank.margin_exclude_target'])
    aug_cfg = config.aug_config()
    presence = PresenceDictionary(num_classes, r_star=aug_cfg.r_star)
    ledger = SampleLedger(num_classes)
    closure = AELTrainClosure(
        state, bank, presence, ledger, labeled, unlabeled,
        config.loss_config(), aug_cfg, config.components(),
        config['batch.labeled'], config['batch.unlabeled'],
        utils.make_rng(config['seed']))
    return Run(config, num_classes, state, bank, presence, ledger, closure,
               val_data, val_split, tail)


def checkpoint_payload(run, last_output=None):
    """
    (dict) Everything needed to resume ``run`` bit-exactly.
    """
    return {
        'config': run.config.to_text(),
        'num_classes': run.num_classes,
        'tail_classes': list(run.tail),
        'train_state': run.state.state_dict(),
        'bank': run.bank.state_dict(),
        'presence': run.presence.state_dict(),
        'ledger': run.ledger.state_dict(),
        'closure': run.closure.state_dict(),
        'last_output': None if last_output is None else dict(last_output),
    }


def restore_run(run, checkpoint):
    """
    Loads a checkpoint dictionary into a freshly built ``run``.

    Returns:
        dict: the last step output stored with the checkpoint (may be None).
    """
    if checkpoint['num_classes'] != run.num_classes:
        raise EvaluationException(
            f"Checkpoint has {checkpoint['num_classes']} classes, data has "
            f"{run.num_classes}")
    run.state.load_state_dict(checkpoint['train_state'])
    run.bank.load_state_dict(checkpoint['bank'])
    run.presence.load_state_dict(checkpoint['presence'])
    run.ledger.load_state_dict(checkpoint['ledger'])
    run.closure.load_state_dict(checkpoint['closure'])
    return checkpoint['last_output']


def evaluate_model(model, data, tail=None):
    """
    Single-scale evaluation of ``model`` over ``data`` (items with ``image``
    and ``mask``).

    Returns:
        IoUReport: the per-class IoU summary.
    """
    if len(data) == 0:
        raise EvaluationException('Cannot evaluate on an empty split!')
    closure = ValidationClosure(model)
    Engine(closure).run(data, max_epochs=1)
    return iou_report(closure.confusion, tail)


def _write_json(path, payload):
    with open(path, 'w') as f:
        json.dump(payload, f, indent=4)


def _metrics(run, report, last_output):
    final = OrderedDict()
    for key in ['loss', 'supervised_loss', 'unsupervised_loss', 'lr']:
        if last_output is not None and key in last_output:
            final[key] = float(last_output[key])
    return OrderedDict([
        ('step', run.state.step),
        ('split', run.val_split),
        ('evaluation', report_to_dict(report)),
        ('final', final),
        ('ledger', OrderedDict([
            ('totals', run.ledger.totals.tolist()),
            ('tail_share', run.ledger.tail_share(run.tail)),
        ])),
        ('fire_counts', dict(run.closure.fire_counts)),
        ('bank', [None if not o else float(v)
                  for v, o in zip(run.bank.values, run.bank.observed)]),
    ])


def train(config, out=None, resume=False):
    """
    Trains a run end to end and writes its outputs.

    Args:
        config (RunConfig): run settings.
        out (str, optional): output folder; defaults to ``config['out']``.
        resume (bool, optional): continue from
          ``out/checkpoints/latest.ckpt.pth``. Defaults to False.

    Returns:
        dict: the contents of ``metrics.json``.
    """
    out = out or config['out']
    if not out:
        raise ConfigException('No output folder given (--out or out = ...)')
    os.makedirs(out, exist_ok=True)
    utils.seed(config['seed'])
    run = build_run(config)
    config.write(os.path.join(out, 'config.resolved'))

    last = {'output': None}
    if resume:
        path = os.path.join(out, 'checkpoints', 'latest.ckpt.pth')
        if not os.path.exists(path):
            raise ConfigException(f'Nothing to resume: {path} does not exist.')
        checkpoint = load_checkpoint(path)
        if RunConfig.from_text(checkpoint['config']) != config:
            logging.warning('Resuming with a config that differs from the '
                            'one stored in the checkpoint.')
        last['output'] = restore_run(run, checkpoint)
        logging.info(f'Resumed from {path} at step {run.state.step}')

    val_closure = ValidationClosure(run.state.student)
    trainer, validator = create_train_and_validation_engines(
        run.closure, val_closure)

    @trainer.on(Events.ITERATION_COMPLETED)
    def keep_output(engine):
        last['output'] = engine.state.output

    add_checkpoint_handler(
        out, trainer, run.state,
        lambda path: save_checkpoint(path, checkpoint_payload(run, last['output'])),
        config['train.checkpoint_every'])
    add_validation_handler(trainer, validator, run.val_data)
    add_stdout_handler(trainer, run.state, run.bank, every=config['train.log_every'])
    if config['train.progress_bar']:
        add_progress_bar_handler(trainer)
    if config['train.tensorboard']:
        add_tensorboard_handler(
            os.path.join(out, 'tensorboard'), trainer, run.state, run.bank)

    run_steps(trainer, run.state)
    if getattr(trainer.state, 'validation', None) is None:
        validator.run(run.val_data, max_epochs=1)
    report = iou_report(val_closure.confusion, run.tail)

    metrics = _metrics(run, report, last['output'])
    _write_json(os.path.join(out, 'metrics.json'), metrics)
    run.ledger.write_csv(os.path.join(out, 'ledger.csv'))
    logging.info(
        f"Finished at step {run.state.step}: mIoU {report.miou:.4f}, "
        f"mIoU_tail {report.miou_tail:.4f}, tail share "
        f"{metrics['ledger']['tail_share']:.4f}")
    return metrics


def evaluate(checkpoint, split='val', data_root=None, out=None):
    """
    Evaluates the student stored in a checkpoint.

    Args:
        checkpoint (str): path to a ``.ckpt.pth`` file.
        split (str, optional): 'train' or 'val'. Defaults to 'val'.
        data_root (str, optional): dataset folder; defaults to the one in the
          checkpoint's config.
        out (str, optional): if given, ``evaluation.json`` is written there.

    Returns:
        IoUReport: the per-class IoU summary.
    """
    if not os.path.exists(checkpoint):
        raise EvaluationException(f'No such checkpoint: {checkpoint}')
    payload = load_checkpoint(checkpoint)
    config = RunConfig.from_text(payload['config'])
    root = data_root or config['data.root']
    dataset = SceneFolder(root, split=split)
    if dataset.num_classes != payload['num_classes']:
        raise EvaluationException(
            f"Checkpoint has {payload['num_classes']} classes but {root} has "
            f"{dataset.num_classes}")

    model = PixelClassifier(payload['num_classes'])
    model.load_state_dict(payload['train_state']['student'])
    report = evaluate_model(model, list(dataset), payload['tail_classes'])
    if out:
        os.makedirs(out, exist_ok=True)
        result = report_to_dict(report)
        result['split'] = split
        result['checkpoint'] = checkpoint
        _write_json(os.path.join(out, 'evaluation.json'), result)
    return report


def _parse_row(row):
    if isinstance(row, str):
        row = row.strip()
        if len(row) != len(constants.AEL_COMPONENTS) or set(row) - {'0', '1'}:
            raise ConfigException(
                f'Grid row {row!r} must be {len(constants.AEL_COMPONENTS)} '
                f'characters of 0/1, ordered {"/".join(constants.AEL_COMPONENTS)}')
        row = [int(ch) for ch in row]
    row = tuple(int(bool(v)) for v in row)
    if len(row) != len(constants.AEL_COMPONENTS):
        raise ConfigException(f'Grid row {row} has the wrong length')
    return row


def ablation_grid(grid):
    """
    Resolves a grid description into flag tuples ordered
    ``(dr, aes, acm, acp)``.

    Args:
        grid (str or list): 'table4' (alias 'components'), 'baseline',
          'all', a comma-separated list of rows such as ``'0000,1111'``,
          or a list of rows. An empty grid is the baseline alone.
          Duplicates are dropped, first occurrence wins.

    Returns:
        list of tuple: the rows.
    """
    if isinstance(grid, str):
        name = grid.strip().lower()
        if name in constants.COMPONENT_GRID_NAMES:
            rows = list(COMPONENT_GRID)
        elif name in ('', 'baseline'):
            rows = []
        elif name == 'all':
            rows = list(itertools.product([0, 1], repeat=len(constants.AEL_COMPONENTS)))
        else:
            rows = [r for r in name.split(',') if r.strip()]
    else:
        rows = list(grid or [])
    rows = [_parse_row(r) for r in rows]
    if not rows:
        rows = [(0,) * len(constants.AEL_COMPONENTS)]
    return list(OrderedDict.fromkeys(rows))


def _cell_name(row, seed):
    flags = '_'.join(f'{c}{v}' for c, v in zip(constants.AEL_COMPONENTS, row))
    return f'{flags}_seed{seed}'


def _nan(value):
    return float('nan') if value is None else float(value)


def _run_cell(job):
    config_text, out = job
    config = RunConfig.from_text(config_text)
    metrics = train(config, out)
    return {
        'miou': _nan(metrics['evaluation']['miou']),
        'miou_tail': _nan(metrics['evaluation']['miou_tail']),
        'tail_share': metrics['ledger']['tail_share'],
    }


def ablate(config, grid='table4', seeds=(0, 1, 2), out=None, num_workers=1):
    """
    Trains every grid row with every seed and aggregates the results.

    Args:
        config (RunConfig): base settings; ``ael.*`` and ``seed`` are set per
          cell.
        grid (str or list): see :func:`ablation_grid`.
        seeds (list of int, optional): Defaults to ``(0, 1, 2)``.
        out (str, optional): output folder; defaults to ``config['out']``.
        num_workers (int, optional): cells trained in parallel processes.
          Defaults to 1.

    Returns:
        pd.DataFrame: the aggregated table written to ``table4.csv``.
    """
    out = out or config['out']
    if not out:
        raise ConfigException('No output folder given (--out or out = ...)')
    seeds = list(OrderedDict.fromkeys(int(s) for s in seeds))
    if not seeds:
        raise ConfigException('At least one seed is needed for an ablation')
    if len(seeds) < constants.MIN_ABLATION_SEEDS:
        logging.warning(
            f'Ablation with {len(seeds)} seed(s); mean +/- std over seeds needs '
            f'at least {constants.MIN_ABLATION_SEEDS}')
    rows = ablation_grid(grid)
    config.validate()

    jobs, keys = [], []
    for row in rows:
        for seed in seeds:
            flags = {f'ael.{c}': bool(v)
                     for c, v in zip(constants.AEL_COMPONENTS, row)}
            cell = config.copy(seed=seed).update(flags)
            cell_out = os.path.join(out, 'cells', _cell_name(row, seed))
            cell['out'] = cell_out
            jobs.append((cell.to_text(), cell_out))
            keys.append((row, seed))
    logging.info(f'Ablation: {len(rows)} rows x {len(seeds)} seeds')

    if num_workers > 1:
        with ProcessPoolExecutor(max_workers=num_workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]

    records = []
    for (row, seed), result in zip(keys, results):
        record = OrderedDict(zip(constants.AEL_COMPONENTS, row))
        record['seed'] = seed
        record.update(result)
        records.append(record)
    runs = pd.DataFrame(records)
    os.makedirs(out, exist_ok=True)
    runs.to_csv(os.path.join(out, 'runs.csv'), index=False)

    summary = aggregate_ablation(runs)
    summary.to_csv(os.path.join(out, constants.ABLATION_SUMMARY), index=False)
    return summary
