import os

import numpy as np
import pytest

from ael.datasets import (
    SceneFolder, OnTheFlyScenes, DataSetException, read_dataset_info)
from ael.datasets.synthetic import generate_scene, scene_seeds


def test_scene_folder(scene_dataset, scene_config):
    dataset = SceneFolder(scene_dataset)
    assert len(dataset) == 40
    assert dataset.num_classes == scene_config.num_classes

    train = SceneFolder(scene_dataset, split='train')
    val = SceneFolder(scene_dataset, split='val')
    assert len(train) == 32 and len(val) == 8
    assert val.metadata['split'] == 'val'

    data = train[0]
    assert data['id'] == 'scene_00000'
    assert data['image'].spatial_shape == (16, 16)
    data['image'].check_spatial_match(data['mask'])

    # PNGs hold 8-bit colors and exact labels
    image, mask = generate_scene(scene_config, scene_seeds(0, 1)[0])
    assert np.array_equal(data['mask'].data, mask.data)
    assert np.allclose(data['image'].data, image.data, atol=0.5 / 255 + 1e-12)


def test_scene_folder_ids(scene_dataset):
    ids = ['scene_00003', 'scene_00001']
    dataset = SceneFolder(scene_dataset, split='train', ids=ids)
    assert [d['id'] for d in dataset] == ids

    with pytest.raises(DataSetException):
        SceneFolder(scene_dataset, split='train', ids=['scene_00039'])
    with pytest.raises(DataSetException):
        SceneFolder(scene_dataset, ids=['nope'])


def test_missing_dataset(tmp_path):
    with pytest.raises(DataSetException, match='ael synthdata generate'):
        read_dataset_info(str(tmp_path))
    with pytest.raises(DataSetException, match='ael synthdata generate'):
        SceneFolder(str(tmp_path))


def test_missing_manifest(scene_dataset, tmp_path):
    folder = str(tmp_path / 'copy')
    os.makedirs(folder)
    with open(os.path.join(scene_dataset, 'dataset.json')) as src, \
            open(os.path.join(folder, 'dataset.json'), 'w') as dst:
        dst.write(src.read())
    with pytest.raises(DataSetException, match='manifest'):
        SceneFolder(folder)


def test_on_the_fly(scene_config):
    seeds = scene_seeds(0, 5)
    dataset = OnTheFlyScenes(seeds, cfg=scene_config)
    assert len(dataset) == 5
    assert dataset.num_classes == scene_config.num_classes
    data = dataset[2]
    image, mask = generate_scene(scene_config, seeds[2])
    assert data['id'] == 'scene_00002'
    assert np.array_equal(data['image'].data, image.data)
    assert np.array_equal(data['mask'].data, mask.data)

    default = OnTheFlyScenes([1])
    assert default[0]['image'].spatial_shape == (64, 64)
