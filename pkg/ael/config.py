"""
Run configuration: a flat, ordered ``key = value`` mapping where every key
has a documented default. Files are plain text with ``#`` comments::

    # baseline on fold 2
    data.root = data/synthetic
    data.fold = 2
    ael.dr = false

Values are parsed with ``yaml.safe_load`` and coerced to the type of the
default. Unknown keys and values that do not coerce raise
:class:`ConfigException`.
"""

import copy
from collections import OrderedDict

import yaml

from .core import constants
from .ml.train.loss import LossConfig, validate_loss_config, LossException
from .datasets.transforms import (
    AugConfig, validate_aug_config, TransformException)

DEFAULTS = OrderedDict([
    ('seed', 0),
    ('max_iter', 2000),
    ('out', ''),
    ('batch.labeled', 4),
    ('batch.unlabeled', 4),
    ('data.root', ''),
    ('data.protocol', 8),
    ('data.fold', 0),
    ('model.base_lr', 0.5),
    ('model.teacher_momentum', constants.DEFAULT_TEACHER_MOMENTUM),
    ('bank.indicator', constants.CONFIDENCE),
    ('bank.tau', constants.DEFAULT_TAU),
    ('bank.margin_exclude_target', False),
    ('loss.alpha', constants.DEFAULT_ALPHA),
    ('loss.beta', constants.DEFAULT_BETA),
    ('loss.gamma', constants.DEFAULT_GAMMA),
    ('loss.weight_source', constants.WEIGHT_SOURCE_TEACHER),
    ('aug.r_star', constants.DEFAULT_R_STAR),
    ('aug.copy_paste_k', constants.DEFAULT_COPY_PASTE_K),
    ('aug.scale_jitter_min', 0.5),
    ('aug.scale_jitter_max', 2.0),
    ('aug.crop_fraction', 0.5),
    ('aug.resize_min', 0.5),
    ('aug.resize_max', 2.0),
    ('aug.flip_prob', 0.5),
    ('ael.dr', True),
    ('ael.aes', True),
    ('ael.acm', True),
    ('ael.acp', True),
    ('train.checkpoint_every', 500),
    ('train.log_every', 100),
    ('train.progress_bar', False),
    ('train.tensorboard', False),
])
"""OrderedDict: Every configuration key with its default value."""


def _coerce(key, raw):
    default = DEFAULTS[key]
    text = raw if isinstance(raw, str) else None
    value = raw
    if text is not None:
        try:
            value = yaml.safe_load(text) if text.strip() else ''
        except yaml.YAMLError:
            value = text.strip()

    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
        if value is None:
            return ''
        return text.strip() if text is not None else str(value)
    raise ConfigException(
        f'Cannot read {key} = {raw!r} as {type(default).__name__}')


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


class RunConfig(object):
    """
    The settings of one run. Starts from :data:`DEFAULTS`; ``values`` (a
    mapping) is applied on top.

    Args:
        values (dict, optional): key/value pairs overriding the defaults.
    """

    def __init__(self, values=None):
        self.values = OrderedDict(DEFAULTS)
        if values:
            self.update(values)

    def __getitem__(self, key):
        if key not in self.values:
            raise ConfigException(f'Unknown config key {key}')
        return self.values[key]

    def __setitem__(self, key, value):
        if key not in DEFAULTS:
            raise ConfigException(
                f'Unknown config key {key}. Known keys: {", ".join(DEFAULTS)}')
        self.values[key] = _coerce(key, value)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def update(self, values):
        for key, value in dict(values).items():
            self[key] = value
        return self

    def apply_overrides(self, overrides):
        """
        Applies ``key=value`` strings, as given to ``--set``.
        """
        for item in overrides or []:
            if '=' not in item:
                raise ConfigException(
                    f'Override {item!r} is not of the form key=value')
            key, value = item.split('=', 1)
            self[key.strip()] = value
        return self

    def copy(self, **overrides):
        """
        Copy with overrides given as keyword arguments; dots in keys are
        written as double underscores (``ael__dr=False``).
        """
        other = copy.deepcopy(self)
        other.update({k.replace('__', '.'): v for k, v in overrides.items()})
        return other

    @classmethod
    def from_text(cls, text):
        config = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigException(
                    f'Line {number} is not of the form key = value: {line!r}')
            key, value = line.split('=', 1)
            config[key.strip()] = value
        return config

    @classmethod
    def from_file(cls, path):
        with open(path, 'r') as f:
            return cls.from_text(f.read())

    def to_text(self):
        return ''.join(f'{k} = {_format(v)}\n' for k, v in self.values.items())

    def write(self, path):
        with open(path, 'w') as f:
            f.write(self.to_text())

    def as_dict(self):
        return OrderedDict(self.values)

    def components(self):
        """
        (OrderedDict) Which of dr/aes/acm/acp are enabled.
        """
        return OrderedDict(
            (c, self.values[f'ael.{c}']) for c in constants.AEL_COMPONENTS)

    def loss_config(self):
        """
        (LossConfig) Loss settings; raises ConfigException when out of range.
        """
        cfg = LossConfig(
            alpha=self['loss.alpha'],
            beta=self['loss.beta'],
            gamma=self['loss.gamma'],
            weight_source=self['loss.weight_source'],
        )
        try:
            return validate_loss_config(cfg)
        except LossException as e:
            raise ConfigException(str(e))

    def aug_config(self):
        """
        (AugConfig) Augmentation settings; raises ConfigException when out
        of range.
        """
        cfg = AugConfig(
            r_star=self['aug.r_star'],
            copy_paste_k=self['aug.copy_paste_k'],
            scale_jitter_range=(self['aug.scale_jitter_min'],
                                self['aug.scale_jitter_max']),
            crop_fraction=self['aug.crop_fraction'],
            resize_range=(self['aug.resize_min'], self['aug.resize_max']),
            flip_prob=self['aug.flip_prob'],
        )
        try:
            return validate_aug_config(cfg)
        except TransformException as e:
            raise ConfigException(str(e))

    def validate(self):
        """
        Checks the keys that are not covered by :meth:`loss_config` and
        :meth:`aug_config`.

        Returns:
            RunConfig: self.
        """
        positive = ['max_iter', 'batch.labeled', 'train.checkpoint_every',
                    'train.log_every']
        for key in positive:
            if self[key] < 1:
                raise ConfigException(f'{key} must be positive, got {self[key]}')
        if self['batch.unlabeled'] < 0:
            raise ConfigException('batch.unlabeled must be >= 0')
        if self['data.protocol'] not in constants.PROTOCOLS:
            raise ConfigException(
                f'data.protocol must be one of {constants.PROTOCOLS}, '
                f'got {self["data.protocol"]}')
        if not 0 <= self['data.fold'] < constants.NUM_FOLDS:
            raise ConfigException(
                f'data.fold must be in [0, {constants.NUM_FOLDS})')
        if self['bank.indicator'] not in constants.ALL_INDICATORS:
            raise ConfigException(
                f'bank.indicator must be one of {constants.ALL_INDICATORS}')
        if not 0 <= self['bank.tau'] < 1:
            raise ConfigException('bank.tau must be in [0, 1)')
        if not 0 <= self['model.teacher_momentum'] < 1:
            raise ConfigException('model.teacher_momentum must be in [0, 1)')
        if self['model.base_lr'] <= 0:
            raise ConfigException('model.base_lr must be positive')
        self.loss_config()
        self.aug_config()
        return self

    def __repr__(self):
        return f'RunConfig({dict(self.values)})'


class ConfigException(Exception):
    """
    Exception class for invalid run configurations.
    """
    pass
