"""
Procedural long-tailed segmentation benchmark. A scene is a background
(class 0) with axis-aligned rectangles and ellipses painted on top in
z-order. Shape classes are drawn with probability proportional to
``(c + 1) ** -a``, so higher class ids are rarer. Every class has a fixed
base color; Gaussian noise is added per pixel.
"""

import os
import json
import logging
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd
from matplotlib.colors import hsv_to_rgb

from ..core import constants
from ..core.grids import Image, LabelMask
from ..core.io import write_image, write_mask
from . import partition as part
from .base_dataset import DataSetException

SceneConfig = namedtuple(
    'SceneConfig',
    ['num_classes', 'image_size', 'tail_exponent', 'shapes_per_scene',
     'color_noise_sigma', 'shape_size_range'])
"""
Scene generator settings.

Args:
    num_classes (int): C, at least 2. Defaults to 6.
    image_size (tuple): ``(height, width)``, each at least 8. Defaults to (64, 64).
    tail_exponent (float): ``a >= 0`` of the class prior. Defaults to 1.5.
    shapes_per_scene (tuple): inclusive range of shape counts. Defaults to (3, 6).
    color_noise_sigma (float): std of the per-pixel color noise. Defaults to 0.05.
    shape_size_range (tuple): shape side length as a fraction of the image
      side. Defaults to (0.15, 0.45).
"""
SceneConfig.__new__.__defaults__ = (6, (64, 64), 1.5, (3, 6), 0.05, (0.15, 0.45))

MANIFEST_COLUMNS = ['id', 'split', 'image', 'mask', 'seed']


def validate_scene_config(cfg):
    """
    Raises :class:`DataSetException` unless ``cfg`` is usable.
    """
    if not 2 <= cfg.num_classes < constants.IGNORE_INDEX:
        raise DataSetException(
            f'num_classes must be in [2, {constants.IGNORE_INDEX}), '
            f'got {cfg.num_classes}')
    if min(cfg.image_size) < constants.MIN_IMAGE_SIZE:
        raise DataSetException(
            f'image_size must be at least {constants.MIN_IMAGE_SIZE} on each '
            f'side, got {cfg.image_size}')
    if cfg.tail_exponent < 0:
        raise DataSetException(
            f'tail_exponent must be >= 0, got {cfg.tail_exponent}')
    low, high = cfg.shapes_per_scene
    if not 0 <= low <= high:
        raise DataSetException(
            f'shapes_per_scene must satisfy 0 <= min <= max, got {(low, high)}')
    if cfg.color_noise_sigma < 0:
        raise DataSetException('color_noise_sigma must be >= 0')
    low, high = cfg.shape_size_range
    if not 0 < low <= high <= 1:
        raise DataSetException(
            f'shape_size_range must satisfy 0 < min <= max <= 1, got {(low, high)}')
    return cfg


def class_prior(cfg):
    """
    (np.ndarray) Shape class probabilities ``p(c) ~ (c + 1) ** -a``.
    """
    weights = (np.arange(cfg.num_classes) + 1.0) ** -cfg.tail_exponent
    return weights / weights.sum()


def class_palette(num_classes):
    """
    Base RGB color per class, hues spread evenly around the color wheel.

    Returns:
        np.ndarray: ``(C, 3)`` colors in ``[0, 1]``.
    """
    hsv = np.stack([
        np.arange(num_classes) / num_classes,
        np.full(num_classes, 0.8),
        np.full(num_classes, 0.9),
    ], axis=-1)
    return hsv_to_rgb(hsv)


def sample_shape_classes(cfg, rng, size):
    """
    Draws ``size`` shape classes from :func:`class_prior`.
    """
    return rng.choice(cfg.num_classes, size=size, p=class_prior(cfg))


def generate_scene(cfg, seed):
    """
    Renders one scene. The same ``(cfg, seed)`` always gives the same scene.

    Args:
        cfg (SceneConfig): generator settings.
        seed (int): scene seed.

    Returns:
        tuple: ``(Image, LabelMask)``.
    """
    validate_scene_config(cfg)
    rng = np.random.default_rng(seed)
    height, width = cfg.image_size

    mask = np.zeros((height, width), dtype=np.int64)
    rows, cols = np.mgrid[0:height, 0:width]

    low, high = cfg.shapes_per_scene
    num_shapes = int(rng.integers(low, high + 1))
    classes = sample_shape_classes(cfg, rng, num_shapes)
    for label in classes:
        is_ellipse = rng.random() < 0.5
        size_low, size_high = cfg.shape_size_range
        shape_h = max(1, int(round(rng.uniform(size_low, size_high) * height)))
        shape_w = max(1, int(round(rng.uniform(size_low, size_high) * width)))
        top = int(rng.integers(height - shape_h + 1))
        left = int(rng.integers(width - shape_w + 1))

        if is_ellipse:
            center_r = top + (shape_h - 1) / 2
            center_c = left + (shape_w - 1) / 2
            inside = (
                ((rows - center_r) / (shape_h / 2)) ** 2 +
                ((cols - center_c) / (shape_w / 2)) ** 2
            ) <= 1
        else:
            inside = (
                (rows >= top) & (rows < top + shape_h) &
                (cols >= left) & (cols < left + shape_w)
            )
        mask[inside] = label

    palette = class_palette(cfg.num_classes)
    noise = rng.normal(0, cfg.color_noise_sigma, size=(height, width, 3))
    image = np.clip(palette[mask] + noise, 0, 1)
    return Image(image), LabelMask(mask, num_classes=cfg.num_classes)


def _write_scene(job):
    cfg, seed, image_path, mask_path = job
    image, mask = generate_scene(cfg, seed)
    write_image(image, image_path)
    write_mask(mask, mask_path)
    return np.bincount(mask.data.ravel(), minlength=cfg.num_classes)


def scene_seeds(seed, count):
    """
    Independent per-scene seeds derived from a dataset seed.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def generate_dataset(out, count, seed, cfg=None, val_fraction=0.2,
                     num_workers=1):
    """
    Writes a synthetic dataset to ``out``:

    - ``images/<id>.png`` and ``masks/<id>.png``
    - ``manifest.csv`` with columns ``id, split, image, mask, seed``
    - ``dataset.json`` with the scene settings and class pixel counts
    - ``partitions/1_<den>/fold<f>/{labeled,unlabeled}.txt`` for every
      protocol whose denominator fits the training split and every fold.

    The first ``count - round(count * val_fraction)`` scenes form the
    training split, the rest the validation split.

    Args:
        out (str): output folder.
        count (int): number of scenes.
        seed (int): dataset seed.
        cfg (SceneConfig, optional): generator settings. Defaults to
          ``SceneConfig()``.
        val_fraction (float, optional): share of scenes held out for
          evaluation. Defaults to 0.2.
        num_workers (int, optional): processes used to render scenes.
          Defaults to 1.

    Returns:
        pd.DataFrame: the manifest.
    """
    cfg = validate_scene_config(cfg if cfg is not None else SceneConfig())
    if count < 1:
        raise DataSetException(f'count must be positive, got {count}')
    if not 0 <= val_fraction < 1:
        raise DataSetException(
            f'val_fraction must be in [0, 1), got {val_fraction}')

    num_val = int(round(count * val_fraction))
    num_train = count - num_val
    if num_train < 1:
        raise DataSetException(
            f'val_fraction {val_fraction} leaves no training scenes out of {count}')
    seeds = scene_seeds(seed, count)
    ids = [f'scene_{i:05d}' for i in range(count)]
    splits = ['train'] * num_train + ['val'] * num_val

    manifest = pd.DataFrame({
        'id': ids,
        'split': splits,
        'image': [os.path.join('images', f'{i}.png') for i in ids],
        'mask': [os.path.join('masks', f'{i}.png') for i in ids],
        'seed': seeds,
    }, columns=MANIFEST_COLUMNS)

    jobs = [
        (cfg, s, os.path.join(out, img), os.path.join(out, msk))
        for s, img, msk in zip(seeds, manifest['image'], manifest['mask'])
    ]
    logging.info(f'Generating {count} scenes into {out}')
    if num_workers > 1:
        with ProcessPoolExecutor(max_workers=num_workers) as pool:
            counts = list(pool.map(_write_scene, jobs))
    else:
        counts = [_write_scene(job) for job in jobs]

    os.makedirs(out, exist_ok=True)
    manifest.to_csv(os.path.join(out, 'manifest.csv'), index=False)

    train_counts = np.sum(counts[:num_train], axis=0)
    info = {
        'scene_config': {k: v for k, v in cfg._asdict().items()},
        'count': count,
        'seed': seed,
        'val_fraction': val_fraction,
        'train_pixel_counts': [int(c) for c in train_counts],
    }
    with open(os.path.join(out, 'dataset.json'), 'w') as f:
        json.dump(info, f, indent=4)

    train_ids = ids[:num_train]
    for protocol in constants.PROTOCOLS:
        if protocol > num_train:
            continue
        for fold in range(constants.NUM_FOLDS):
            partition = part.make_partition(num_train, protocol, fold, seed)
            part.write_partition(out, partition, train_ids)
    return manifest
