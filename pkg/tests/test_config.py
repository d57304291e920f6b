import pytest

from ael import RunConfig
from ael.config import DEFAULTS, ConfigException


def test_defaults():
    config = RunConfig()
    assert config.as_dict() == DEFAULTS
    assert config['bank.tau'] == 0.999
    assert config['loss.gamma'] == 2.0
    assert list(config.components().items()) == [
        ('dr', True), ('aes', True), ('acm', True), ('acp', True)]
    config.validate()


def test_text_round_trip(tmp_path):
    text = """
    # baseline on fold 2
    data.root = data/synthetic
    data.fold = 2
    ael.dr = false
    loss.gamma = 1     # coerced to float
    """
    config = RunConfig.from_text(text)
    assert config['data.fold'] == 2
    assert config['ael.dr'] is False
    assert config['loss.gamma'] == 1.0
    assert isinstance(config['loss.gamma'], float)

    path = str(tmp_path / 'run.cfg')
    config.write(path)
    assert RunConfig.from_file(path) == config
    assert RunConfig.from_text(config.to_text()) == config


def test_overrides():
    config = RunConfig().apply_overrides(
        ['ael.acp=false', 'max_iter=10', 'bank.indicator=entropy', 'out='])
    assert config['ael.acp'] is False
    assert config['max_iter'] == 10
    assert config['bank.indicator'] == 'entropy'
    assert config['out'] == ''

    copied = config.copy(ael__acp=True, seed=4)
    assert copied['ael.acp'] is True and copied['seed'] == 4
    assert config['ael.acp'] is False
    assert copied != config


@pytest.mark.parametrize('bad', [
    ['nope=1'], ['max_iter=ten'], ['ael.dr=3'], ['max_iter'], ['max_iter=1.5'],
])
def test_bad_overrides(bad):
    with pytest.raises(ConfigException):
        RunConfig().apply_overrides(bad)


def test_bad_lines():
    with pytest.raises(ConfigException):
        RunConfig.from_text('max_iter 10')


@pytest.mark.parametrize('key,value', [
    ('max_iter', 0),
    ('batch.unlabeled', -1),
    ('data.protocol', 3),
    ('data.fold', 5),
    ('bank.indicator', 'accuracy'),
    ('bank.tau', 1.0),
    ('model.teacher_momentum', 1.0),
    ('model.base_lr', 0.0),
    ('loss.beta', -1.0),
    ('loss.weight_source', 'oracle'),
    ('aug.r_star', 0.0),
    ('aug.crop_fraction', 2.0),
])
def test_validate(key, value):
    config = RunConfig({key: value})
    with pytest.raises(ConfigException):
        config.validate()


def test_sub_configs():
    config = RunConfig({'loss.alpha': 0.5, 'aug.copy_paste_k': 2,
                        'aug.resize_min': 0.75})
    assert config.loss_config().alpha == 0.5
    assert config.aug_config().copy_paste_k == 2
    assert config.aug_config().resize_range == (0.75, 2.0)
