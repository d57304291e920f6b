"""
Labeled/unlabeled splits of a training set. Protocol ``1/den`` labels
``round(N / den)`` images. The five folds of a protocol come from one
seed-determined permutation: fold ``f`` takes consecutive positions starting
at ``f * floor(N / 5)``, wrapping around, so folds are disjoint whenever
``N / den <= N / 5`` and always distinct.
"""

import os
from collections import namedtuple

import numpy as np

from ..core import constants

Partition = namedtuple('Partition', ['protocol', 'fold', 'labeled', 'unlabeled'])
"""
A split of ``range(N)``: ``labeled`` and ``unlabeled`` are sorted index lists.
"""


def num_labeled(dataset_size, protocol):
    """
    (int) ``round(dataset_size / protocol)``, halves rounded up.
    """
    return int(np.floor(dataset_size / protocol + 0.5))


def make_partition(dataset_size, protocol, fold, seed):
    """
    Splits ``range(dataset_size)`` into labeled and unlabeled indices.

    Args:
        dataset_size (int): number of training images N.
        protocol (int): denominator of the labeled fraction, one of
          ``constants.PROTOCOLS``.
        fold (int): fold in ``[0, 5)``.
        seed (int): permutation seed.

    Returns:
        Partition: the split.

    Raises:
        PartitionException: if the protocol or fold is unknown or the
          denominator exceeds the dataset size.
    """
    if protocol not in constants.PROTOCOLS:
        raise PartitionException(
            f'Unknown protocol 1/{protocol}, expected a denominator in '
            f'{constants.PROTOCOLS}')
    if not 0 <= fold < constants.NUM_FOLDS:
        raise PartitionException(
            f'fold must be in [0, {constants.NUM_FOLDS}), got {fold}')
    if protocol > dataset_size:
        raise PartitionException(
            f'Protocol 1/{protocol} needs at least {protocol} images, '
            f'dataset has {dataset_size}')

    count = num_labeled(dataset_size, protocol)
    order = np.random.default_rng(seed).permutation(dataset_size)
    stride = max(1, dataset_size // constants.NUM_FOLDS)
    positions = (fold * stride + np.arange(count)) % dataset_size
    labeled = np.zeros(dataset_size, dtype=bool)
    labeled[order[positions]] = True
    return Partition(
        protocol=protocol,
        fold=fold,
        labeled=[int(i) for i in np.flatnonzero(labeled)],
        unlabeled=[int(i) for i in np.flatnonzero(~labeled)],
    )


def partition_folder(root, protocol, fold):
    """
    (str) Folder holding the id lists of a protocol and fold.
    """
    return os.path.join(root, 'partitions', f'1_{protocol}', f'fold{fold}')


def write_partition(root, partition, ids):
    """
    Writes ``labeled.txt`` and ``unlabeled.txt`` (one id per line) under
    :func:`partition_folder`.

    Args:
        root (str): dataset folder.
        partition (Partition): split of ``range(len(ids))``.
        ids (list of str): training ids in index order.
    """
    folder = partition_folder(root, partition.protocol, partition.fold)
    os.makedirs(folder, exist_ok=True)
    for name in ['labeled', 'unlabeled']:
        with open(os.path.join(folder, f'{name}.txt'), 'w') as f:
            for index in getattr(partition, name):
                f.write(f'{ids[index]}\n')


def read_partition(root, protocol, fold):
    """
    Reads the id lists written by :func:`write_partition`.

    Returns:
        tuple: ``(labeled_ids, unlabeled_ids)``.

    Raises:
        PartitionException: if the files are missing.
    """
    folder = partition_folder(root, protocol, fold)
    lists = []
    for name in ['labeled', 'unlabeled']:
        path = os.path.join(folder, f'{name}.txt')
        if not os.path.exists(path):
            raise PartitionException(
                f'Missing partition file {path}. Generate the dataset with '
                f'`ael synthdata generate --out {root} --count N --seed S`.')
        with open(path, 'r') as f:
            lists.append([line.strip() for line in f if line.strip()])
    labeled, unlabeled = lists
    if set(labeled) & set(unlabeled):
        raise PartitionException(f'Labeled and unlabeled ids overlap in {folder}')
    return labeled, unlabeled


class PartitionException(Exception):
    """
    Exception class for errors when building or reading partitions.
    """
    pass
