"""
Grid value types. Every grid wraps a ``numpy`` array whose first two
dimensions are ``[HEIGHT, WIDTH]``; the array is validated on construction
and stored read-only, so a grid can be shared between workers without copying.
Operations that change a grid build a new one.

- :class:`Image`: ``(H, W, 3)`` float64 in ``[0, 1]``.
- :class:`LabelMask`: ``(H, W)`` int64 category ids or ``IGNORE_INDEX``.
- :class:`ProbMap`: ``(H, W, C)`` per-pixel distributions.
- :class:`LogitMap`: ``(H, W, C)`` finite pre-softmax scores.
- :class:`SampleIndicator`: ``(H, W)`` booleans, pixels kept in the loss.
- :class:`PixelWeights`: ``(H, W)`` float64 in ``[0, 1]``.
"""

import numpy as np

from . import constants

__all__ = ['GridBase', 'Image', 'LabelMask', 'ProbMap', 'LogitMap',
           'SampleIndicator', 'PixelWeights', 'GridException']


class GridBase(object):
    """
    Base class for grid values. Subclasses implement ``_validate``, which
    receives a freshly copied array and returns the array to store (possibly
    cast), or raises :class:`GridException`.

    Args:
        data (np.ndarray): Array whose first two axes are height and width.
    """
    ndim = None

    def __init__(self, data):
        self._data = None
        self.data = data

    @property
    def data(self):
        """
        The underlying read-only ``np.ndarray``.
        """
        return self._data

    @data.setter
    def data(self, value):
        if self._data is not None:
            raise GridException(f'{type(self).__name__} is immutable!')
        value = np.array(value, copy=True)
        if value.ndim != self.ndim:
            raise GridException(
                f'{type(self).__name__} expects {self.ndim} dimensions, '
                f'got shape {value.shape}!')
        if value.shape[0] < 1 or value.shape[1] < 1:
            raise GridException(f'Empty grid of shape {value.shape}!')
        value = self._validate(value)
        value.setflags(write=False)
        self._data = value

    @staticmethod
    def _validate(value):
        raise NotImplementedError('Cannot instantiate GridBase directly!')

    @property
    def height(self):
        return self._data.shape[0]

    @property
    def width(self):
        return self._data.shape[1]

    @property
    def shape(self):
        return self._data.shape

    @property
    def spatial_shape(self):
        """
        (tuple) ``(height, width)``.
        """
        return self._data.shape[:2]

    def check_spatial_match(self, other):
        """
        Raises :class:`GridException` unless ``other`` covers the same pixels.
        """
        if self.spatial_shape != other.spatial_shape:
            raise GridException(
                f'Grid size mismatch: {type(self).__name__}{self.spatial_shape} '
                f'vs {type(other).__name__}{other.spatial_shape}')

    def __repr__(self):
        return f'{type(self).__name__}(shape={self.shape})'


class Image(GridBase):
    """
    RGB image with float values in ``[0, 1]``.
    """
    ndim = 3

    @staticmethod
    def _validate(value):
        if value.shape[-1] != constants.NUM_CHANNELS:
            raise GridException(
                f'Image must have {constants.NUM_CHANNELS} channels, '
                f'got {value.shape[-1]}!')
        value = value.astype(np.float64)
        if not np.all(np.isfinite(value)):
            raise GridException('Image values must be finite!')
        if value.min() < 0 or value.max() > 1:
            raise GridException('Image values must lie within [0, 1]!')
        return value


class LabelMask(GridBase):
    """
    Per-pixel category ids. ``IGNORE_INDEX`` marks void pixels.

    Args:
        data (np.ndarray): Integer array of shape ``(H, W)``.
        num_classes (int, optional): If given, every non-void label must be
          below it. Defaults to None.
    """
    ndim = 2

    def __init__(self, data, num_classes=None):
        self.num_classes = num_classes
        super().__init__(data)

    def _validate(self, value):
        if not np.issubdtype(value.dtype, np.integer):
            if not np.all(np.mod(value, 1) == 0):
                raise GridException('LabelMask values must be integers!')
        value = value.astype(np.int64)
        labels = value[value != constants.IGNORE_INDEX]
        if labels.size and labels.min() < 0:
            raise GridException('LabelMask values must be non-negative!')
        if self.num_classes is not None and labels.size:
            if labels.max() >= self.num_classes:
                raise GridException(
                    f'Label {labels.max()} out of range for '
                    f'{self.num_classes} classes!')
        return value

    @property
    def valid(self):
        """
        (np.ndarray) Boolean grid, True where the label is not IGNORE.
        """
        return self.data != constants.IGNORE_INDEX


class ProbMap(GridBase):
    """
    Per-pixel class distributions: non-negative and summing to one.
    """
    ndim = 3

    @staticmethod
    def _validate(value):
        value = value.astype(np.float64)
        if not np.all(np.isfinite(value)) or value.min() < 0:
            raise GridException('ProbMap values must be finite and non-negative!')
        sums = value.sum(axis=-1)
        if np.max(np.abs(sums - 1)) > constants.PROB_SUM_TOL:
            raise GridException('ProbMap pixels must sum to 1!')
        return value

    @property
    def num_classes(self):
        return self.data.shape[-1]


class LogitMap(GridBase):
    """
    Per-pixel, per-class unnormalized scores.
    """
    ndim = 3

    @staticmethod
    def _validate(value):
        value = value.astype(np.float64)
        if not np.all(np.isfinite(value)):
            raise GridException('non-finite logits')
        return value

    @property
    def num_classes(self):
        return self.data.shape[-1]


class SampleIndicator(GridBase):
    """
    Binary grid: True where a pixel takes part in the unsupervised loss.
    """
    ndim = 2

    @staticmethod
    def _validate(value):
        if value.dtype != bool:
            if not np.all((value == 0) | (value == 1)):
                raise GridException('SampleIndicator must be 0/1 valued!')
        return value.astype(bool)


class PixelWeights(GridBase):
    """
    Per-pixel loss weights in ``[0, 1]``.

    Args:
        data (np.ndarray): Float array of shape ``(H, W)``.
        gamma (float, optional): Exponent the weights were built with.
    """
    ndim = 2

    def __init__(self, data, gamma=None):
        self.gamma = gamma
        super().__init__(data)

    @staticmethod
    def _validate(value):
        value = value.astype(np.float64)
        if not np.all(np.isfinite(value)):
            raise GridException('PixelWeights must be finite!')
        if value.min() < 0 or value.max() > 1:
            raise GridException('PixelWeights must lie within [0, 1]!')
        return value


class GridException(Exception):
    """
    Exception class for errors when building or combining grids.
    """
    pass
