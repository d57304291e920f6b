"""
This recipe compares how much of the unsupervised loss goes to tail
categories with and without adaptive equalization. It trains the plain
teacher-student baseline and the full method on the same partition for
several seeds, then plots the cumulative per-class pixel counts of the
sample ledger and prints the mean tail share of each setting.
"""
import os
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import termtables

from ael import utils, experiment, RunConfig
from ael.datasets.synthetic import SceneConfig, generate_dataset

# ----------------------------------------------------
# ------------------- SETTING UP ---------------------
# ----------------------------------------------------

utils.seed(0)

logging.basicConfig(
    format='%(asctime)s,%(msecs)d %(levelname)-8s [%(filename)s:%(lineno)d] %(message)s',
    datefmt='%Y-%m-%d:%H:%M:%S', level=logging.INFO)

OUTPUT_DIR = os.path.expanduser('~/.ael/recipes/synthetic/tail_share')
DATA_ROOT = os.path.join(OUTPUT_DIR, 'data')
NUM_WORKERS = max(1, multiprocessing.cpu_count() // 2)
SEEDS = [0, 1, 2]
MAX_ITER = 1000
SETTINGS = {
    'baseline': {'ael.dr': False, 'ael.aes': False, 'ael.acm': False,
                 'ael.acp': False},
    'ael': {'ael.dr': True, 'ael.aes': True, 'ael.acm': True, 'ael.acp': True},
}

if not os.path.exists(os.path.join(DATA_ROOT, 'dataset.json')):
    generate_dataset(DATA_ROOT, 400, 0, cfg=SceneConfig(),
                     num_workers=NUM_WORKERS)

# ----------------------------------------------------
# -------------------- TRAINING ----------------------
# ----------------------------------------------------


def run(job):
    name, seed = job
    config = RunConfig({
        'data.root': DATA_ROOT,
        'max_iter': MAX_ITER,
        'seed': seed,
        'train.checkpoint_every': MAX_ITER,
    }).update(SETTINGS[name])
    out = os.path.join(OUTPUT_DIR, 'runs', f'{name}_seed{seed}')
    metrics = experiment.train(config, out)
    return name, seed, metrics['ledger']['tail_share'], out


jobs = [(name, seed) for name in SETTINGS for seed in SEEDS]
with ProcessPoolExecutor(max_workers=NUM_WORKERS) as pool:
    results = list(pool.map(run, jobs))

# ----------------------------------------------------
# ------------------- REPORTING ----------------------
# ----------------------------------------------------

data = []
for name in SETTINGS:
    shares = [r[2] for r in results if r[0] == name]
    data.append([name, f'{100 * np.mean(shares):.2f}', f'{100 * np.std(shares):.2f}'])
print(termtables.to_string(
    data, header=['SETTING', 'TAIL SHARE (%)', 'STD'], padding=(0, 1),
    alignment='lcc'))

fig, axes = plt.subplots(1, len(SETTINGS), figsize=(6 * len(SETTINGS), 4),
                         sharey=True)
for ax, name in zip(axes, SETTINGS):
    out = [r[3] for r in results if r[0] == name and r[1] == SEEDS[0]][0]
    ledger = pd.read_csv(os.path.join(out, 'ledger.csv'))
    for c, group in ledger.groupby('class'):
        ax.plot(group['step'], group['count'], label=f'class {c}')
    ax.set_title(name)
    ax.set_xlabel('step')
    ax.set_yscale('log')
axes[0].set_ylabel('cumulative unsupervised pixels')
axes[-1].legend()
plt.tight_layout()
plt.savefig(os.path.join(OUTPUT_DIR, 'ledger.png'))
