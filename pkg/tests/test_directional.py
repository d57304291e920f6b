"""
Multi-seed training experiments on the default benchmark (C = 6, 1/8
partition, 2000 steps). They take tens of minutes, run them with
``pytest tests --runslow``.
"""

import os

import pandas as pd
import pytest

from ael import experiment
from ael.core import constants
from ael.datasets.synthetic import SceneConfig, generate_dataset

SEEDS = [0, 1, 2]
BASELINE = (0, 0, 0, 0)
FULL = (1, 1, 1, 1)
SINGLE_FLAGS = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]


@pytest.fixture(scope='module')
def benchmark(tmp_path_factory):
    root = str(tmp_path_factory.mktemp('benchmark') / 'synthetic')
    generate_dataset(root, 400, 0, cfg=SceneConfig(num_classes=6))
    return root


@pytest.fixture(scope='module')
def ablation(benchmark, tmp_path_factory):
    out = str(tmp_path_factory.mktemp('ablation'))
    config = experiment.RunConfig({
        'data.root': benchmark,
        'data.protocol': 8,
        'max_iter': 2000,
        'train.checkpoint_every': 2000,
    })
    summary = experiment.ablate(
        config, grid='table4', seeds=SEEDS, out=out, num_workers=4)
    runs = pd.read_csv(os.path.join(out, 'runs.csv'))
    return summary, runs


def _row(frame, flags):
    selected = frame
    for c, v in zip(constants.AEL_COMPONENTS, flags):
        selected = selected[selected[c] == v]
    return selected


@pytest.mark.slow
def test_full_ael_tilts_ledger_toward_tail_in_every_seed(ablation):
    _, runs = ablation
    for seed in SEEDS:
        full = _row(runs[runs['seed'] == seed], FULL)['tail_share'].item()
        base = _row(runs[runs['seed'] == seed], BASELINE)['tail_share'].item()
        assert full > base, f'seed {seed}: {full} <= {base}'


@pytest.mark.slow
def test_component_ablation(ablation):
    summary, _ = ablation
    assert len(summary) == 8
    assert summary['seeds'].tolist() == [3] * 8

    base = _row(summary, BASELINE).iloc[0]
    full = _row(summary, FULL).iloc[0]
    assert full['miou_mean'] >= base['miou_mean']
    assert full['miou_tail_mean'] > base['miou_tail_mean']
    assert full['tail_share_mean'] > base['tail_share_mean']

    for flags in SINGLE_FLAGS:
        single = _row(summary, flags).iloc[0]
        assert single['miou_mean'] >= base['miou_mean'] - 0.01, flags
