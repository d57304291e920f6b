"""
While ael has support for loading data from arbitrary folders, it also
provides hooks for the synthetic benchmark: a folder written by
:func:`ael.datasets.synthetic.generate_dataset`, or scenes rendered in memory
from their seeds.

A folder consumed by :class:`SceneFolder` has this layout::

    root/
        dataset.json        # {"scene_config": {"num_classes": C, ...}, ...}
        manifest.csv        # id,split,image,mask,seed
        images/<id>.png     # 8-bit RGB
        masks/<id>.png      # 8-bit single channel, 255 = IGNORE
        partitions/1_<den>/fold<f>/{labeled,unlabeled}.txt

Any dataset converted to this layout can be trained on.
"""

import os
import json

import pandas as pd

from ..core.io import read_image, read_mask
from .base_dataset import BaseDataset, DataSetException
from .synthetic import SceneConfig, generate_scene


def read_dataset_info(folder):
    """
    Loads ``dataset.json`` of a dataset folder.

    Raises:
        DataSetException: if the folder is not a generated dataset.
    """
    path = os.path.join(folder, 'dataset.json')
    if not os.path.exists(path):
        raise DataSetException(
            f'No dataset found at {folder}. Generate one with '
            f'`ael synthdata generate --out {folder} --count N --seed S`.')
    with open(path, 'r') as f:
        return json.load(f)


class SceneFolder(BaseDataset):
    """
    Images and masks listed in ``manifest.csv``.

    Args:
        folder (str): dataset folder.
        split (str, optional): keep only rows of this split ('train' or 'val').
          Defaults to None (all rows).
        ids (list of str, optional): keep only these ids, in this order.
          Defaults to None.
    """

    def __init__(self, folder, split=None, ids=None):
        self.split = split
        self.ids = ids
        self.info = read_dataset_info(folder)
        num_classes = self.info['scene_config']['num_classes']
        super().__init__(folder, num_classes)
        self.metadata['split'] = split

    def get_items(self, folder):
        manifest_path = os.path.join(folder, 'manifest.csv')
        if not os.path.exists(manifest_path):
            raise DataSetException(f'Missing manifest at {manifest_path}')
        manifest = pd.read_csv(manifest_path, dtype={'id': str})
        if self.split is not None:
            manifest = manifest[manifest['split'] == self.split]
        rows = {row.id: row for row in manifest.itertuples(index=False)}
        if self.ids is None:
            return list(rows.values())
        missing = [i for i in self.ids if i not in rows]
        if missing:
            raise DataSetException(
                f'{len(missing)} ids are not in the manifest of {folder}, '
                f'e.g. {missing[0]}')
        return [rows[i] for i in self.ids]

    def process_item(self, item):
        image = read_image(os.path.join(self.folder, item.image))
        mask = read_mask(os.path.join(self.folder, item.mask),
                         num_classes=self.num_classes)
        image.check_spatial_match(mask)
        return {'id': item.id, 'image': image, 'mask': mask}


class OnTheFlyScenes(BaseDataset):
    """
    Scenes rendered from their seeds when indexed. Useful for tests and for
    quick experiments without writing PNGs.

    Args:
        seeds (list of int): one seed per scene.
        cfg (SceneConfig, optional): generator settings. Defaults to
          ``SceneConfig()``.
    """

    def __init__(self, seeds, cfg=None):
        self.seeds = list(seeds)
        self.scene_config = cfg if cfg is not None else SceneConfig()
        super().__init__(None, self.scene_config.num_classes)

    def get_items(self, folder):
        return [(f'scene_{i:05d}', s) for i, s in enumerate(self.seeds)]

    def process_item(self, item):
        image_id, seed = item
        image, mask = generate_scene(self.scene_config, seed)
        return {'id': image_id, 'image': image, 'mask': mask}
