import os
import tempfile

import numpy as np
import pytest

import ael
from ael.core import Image, LabelMask, ProbMap
from ael.datasets.synthetic import SceneConfig, generate_dataset



def pytest_addoption(parser):
    parser.addoption(
        '--runslow', action='store_true', default=False,
        help='run the multi-seed training experiments')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: multi-seed training experiment')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


def random_probs(rng, height, width, num_classes, sharpness=3.0):
    logits = sharpness * rng.normal(size=(height, width, num_classes))
    return ael.utils.softmax(logits)


def random_mask(rng, height, width, num_classes, ignore_fraction=0.0):
    data = rng.integers(num_classes, size=(height, width))
    if ignore_fraction > 0:
        data[rng.random((height, width)) < ignore_fraction] = ael.constants.IGNORE_INDEX
    return LabelMask(data, num_classes=num_classes)


def random_image(rng, height, width):
    return Image(rng.random((height, width, 3)))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope='session')
def scene_config():
    return SceneConfig(num_classes=4, image_size=(16, 16))


@pytest.fixture(scope='session')
def scene_dataset(scene_config):
    with tempfile.TemporaryDirectory() as tmp_dir:
        folder = os.path.join(tmp_dir, 'synthetic')
        generate_dataset(folder, 40, 0, cfg=scene_config, val_fraction=0.2)
        yield folder


@pytest.fixture
def small_config(scene_dataset):
    return ael.RunConfig({
        'data.root': scene_dataset,
        'data.protocol': 4,
        'max_iter': 6,
        'batch.labeled': 2,
        'batch.unlabeled': 2,
        'train.checkpoint_every': 3,
        'train.log_every': 2,
    })
