"""
Augmentations used by a training step. Every operation takes an explicit
``np.random.Generator``; identical inputs and generator state give
bit-identical outputs.

- :func:`weak_augment`: random resize and horizontal flip, applied identically
  to an image and its mask.
- :class:`PresenceDictionary`: which categories each unlabeled image shows in
  its pseudo labels, above a pixel-ratio threshold.
- :func:`adaptive_cutmix` / :func:`cutmix`: paste a window of one unlabeled
  image onto another, with the source chosen to contain a category drawn from
  the confidence bank (adaptive) or uniformly (plain).
- :func:`adaptive_copy_paste`: copy every pixel of bank-drawn categories from
  one labeled image onto another after scale jittering.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy import ndimage

from ..core import constants
from ..core.grids import Image, LabelMask, ProbMap

AugConfig = namedtuple(
    'AugConfig',
    ['r_star', 'copy_paste_k', 'scale_jitter_range', 'crop_fraction',
     'resize_range', 'flip_prob'])
"""
Augmentation hyper-parameters.

Args:
    r_star (float): presence ratio threshold in (0, 1). Defaults to 0.005.
    copy_paste_k (int): categories drawn per Copy-Paste pair. Defaults to 3.
    scale_jitter_range (tuple): Copy-Paste jitter factors. Defaults to (0.5, 2.0).
    crop_fraction (float): CutMix window side as a fraction of the image side,
      in (0, 1]. Defaults to 0.5.
    resize_range (tuple): weak augmentation scale range. Defaults to (0.5, 2.0).
    flip_prob (float): weak augmentation flip probability. Defaults to 0.5.
"""
AugConfig.__new__.__defaults__ = (
    constants.DEFAULT_R_STAR, constants.DEFAULT_COPY_PASTE_K, (0.5, 2.0), 0.5,
    (0.5, 2.0), 0.5)

PasteBox = namedtuple('PasteBox', ['top', 'left', 'height', 'width'])
"""Rectangle in pixel coordinates, always inside its image."""

LabeledSample = namedtuple('LabeledSample', ['image', 'mask'])

UnlabeledSample = namedtuple(
    'UnlabeledSample', ['image', 'pseudo', 'image_id', 'probs'])
"""
A weak view of an unlabeled image with its teacher pseudo labels and,
optionally, the teacher probabilities.
"""
UnlabeledSample.__new__.__defaults__ = (None,)

MixedSample = namedtuple(
    'MixedSample',
    ['image', 'mask', 'probs', 'box', 'source_box', 'category', 'source',
     'target'])
"""
Result of CutMix. ``box`` is the pasted region in the output, ``source_box``
the window it came from, ``source``/``target`` are batch indices of the two
inputs and ``category`` the drawn category (None for plain CutMix).
"""

PastedSample = namedtuple(
    'PastedSample', ['image', 'mask', 'categories', 'pasted_pixels'])
"""
Result of Copy-Paste: the composed pair, the categories actually pasted and
the number of overwritten pixels per pasted category.
"""


def validate_aug_config(cfg):
    """
    Raises :class:`TransformException` unless every field of ``cfg`` is in
    range.
    """
    if not 0 < cfg.r_star < 1:
        raise TransformException(f'aug.r_star must be in (0, 1), got {cfg.r_star}')
    if int(cfg.copy_paste_k) != cfg.copy_paste_k or cfg.copy_paste_k < 1:
        raise TransformException(
            f'aug.copy_paste_k must be a positive integer, got {cfg.copy_paste_k}')
    if not 0 < cfg.crop_fraction <= 1:
        raise TransformException(
            f'aug.crop_fraction must be in (0, 1], got {cfg.crop_fraction}')
    for name in ['scale_jitter_range', 'resize_range']:
        low, high = getattr(cfg, name)
        if not 0 < low <= high:
            raise TransformException(
                f'{name} must satisfy 0 < min <= max, got {(low, high)}')
    if not 0 <= cfg.flip_prob <= 1:
        raise TransformException(
            f'aug.flip_prob must be in [0, 1], got {cfg.flip_prob}')
    return cfg


# ############# Geometry ############# #

def _nearest_index(new_size, old_size):
    scale = new_size / old_size
    index = np.floor((np.arange(new_size) + 0.5) / scale).astype(int)
    return np.minimum(index, old_size - 1)


def _resize_image(data, new_h, new_w):
    height, width = data.shape[:2]
    rows = (np.arange(new_h) + 0.5) * (height / new_h) - 0.5
    cols = (np.arange(new_w) + 0.5) * (width / new_w) - 0.5
    coords = np.stack(np.meshgrid(rows, cols, indexing='ij'))
    channels = [
        ndimage.map_coordinates(data[..., ch], coords, order=1, mode='nearest')
        for ch in range(data.shape[-1])
    ]
    return np.clip(np.stack(channels, axis=-1), 0, 1)


def resize_pair(image, mask, scale):
    """
    Rescales an image (bilinear) and its mask (nearest neighbor) by ``scale``.
    The output side is ``max(1, round(side * scale))``.

    Returns:
        LabeledSample: the resized pair.
    """
    image.check_spatial_match(mask)
    height, width = image.spatial_shape
    new_h = max(1, int(round(height * scale)))
    new_w = max(1, int(round(width * scale)))
    if (new_h, new_w) == (height, width):
        return LabeledSample(image, mask)
    rows = _nearest_index(new_h, height)
    cols = _nearest_index(new_w, width)
    new_mask = mask.data[np.ix_(rows, cols)]
    new_image = _resize_image(image.data, new_h, new_w)
    return LabeledSample(
        Image(new_image), LabelMask(new_mask, num_classes=mask.num_classes))


def _fit_axis(image, mask, size, axis):
    current = image.shape[axis]
    if current > size:
        start = (current - size) // 2
        index = np.arange(start, start + size)
        return np.take(image, index, axis=axis), np.take(mask, index, axis=axis)
    if current < size:
        before = (size - current) // 2
        after = size - current - before
        pad = [(0, 0)] * image.ndim
        pad[axis] = (before, after)
        image = np.pad(image, pad, constant_values=0.0)
        mask = np.pad(mask, pad[:2], constant_values=constants.IGNORE_INDEX)
    return image, mask


def center_fit(image, mask, shape):
    """
    Center-crops or pads a pair to ``shape``. Padding is 0 in the image and
    IGNORE in the mask.
    """
    data, labels = image.data, mask.data
    for axis, size in enumerate(shape):
        data, labels = _fit_axis(data, labels, size, axis)
    return LabeledSample(
        Image(data), LabelMask(labels, num_classes=mask.num_classes))


def hflip_pair(image, mask):
    """
    Mirrors an image and its mask left to right.
    """
    return LabeledSample(
        Image(image.data[:, ::-1]),
        LabelMask(mask.data[:, ::-1], num_classes=mask.num_classes))


def weak_augment(image, mask, rng, scale_range=(0.5, 2.0), flip_prob=0.5):
    """
    Weak augmentation: resize by a factor drawn uniformly from
    ``scale_range``, center crop or pad back to the input size, then flip
    horizontally with probability ``flip_prob``.

    When ``mask`` is None (unlabeled images) a placeholder of zeros is
    transformed instead, so the returned mask is 0 where the view shows
    image content and IGNORE on padding.

    Args:
        image (Image): input image.
        mask (LabelMask or None): its labels.
        rng (np.random.Generator): random state. Exactly two draws are made.
        scale_range (tuple, optional): resize factor range. Defaults to
          (0.5, 2.0).
        flip_prob (float, optional): flip probability. Defaults to 0.5.

    Returns:
        tuple: ``(Image, LabelMask)``.
    """
    if mask is None:
        mask = LabelMask(np.zeros(image.spatial_shape, dtype=np.int64))
    image.check_spatial_match(mask)

    scale = rng.uniform(*scale_range)
    flip = rng.random() < flip_prob

    resized = resize_pair(image, mask, scale)
    out = center_fit(resized.image, resized.mask, image.spatial_shape)
    if flip:
        out = hflip_pair(out.image, out.mask)
    return out.image, out.mask


# ############# Presence dictionary ############# #

class PresenceDictionary(object):
    """
    Maps an unlabeled image id to the set of categories whose pseudo-label
    pixel ratio exceeds ``r_star``. IGNORE pixels count in the denominator.
    One writer (the training loop) updates it after teacher inference;
    readers use :meth:`snapshot`.

    Args:
        num_classes (int): number of categories.
        r_star (float, optional): ratio threshold in (0, 1). Defaults to 0.005.
    """

    def __init__(self, num_classes, r_star=constants.DEFAULT_R_STAR):
        if not 0 < r_star < 1:
            raise TransformException(f'r_star must be in (0, 1), got {r_star}')
        self.num_classes = num_classes
        self.r_star = r_star
        self.entries = {}

    def update(self, image_id, pseudo):
        """
        Replaces the entry of ``image_id`` with the categories of ``pseudo``
        whose ratio ``count / (H * W)`` is strictly above ``r_star``.

        Returns:
            frozenset: the new entry.
        """
        labels = pseudo.data[pseudo.valid]
        if labels.size and labels.max() >= self.num_classes:
            raise TransformException(
                f'Pseudo label {labels.max()} out of range for '
                f'{self.num_classes} classes!')
        counts = np.bincount(labels, minlength=self.num_classes)
        ratio = counts / pseudo.data.size
        entry = frozenset(int(c) for c in np.flatnonzero(ratio > self.r_star))
        self.entries[image_id] = entry
        return entry

    def get(self, image_id):
        return self.entries.get(image_id, frozenset())

    def images_with(self, category, candidates=None):
        """
        Ids whose entry contains ``category``, restricted to ``candidates``
        if given, in candidate (or insertion) order.
        """
        ids = self.entries.keys() if candidates is None else candidates
        return [i for i in ids if category in self.get(i)]

    def snapshot(self):
        snap = PresenceDictionary(self.num_classes, self.r_star)
        snap.entries = dict(self.entries)
        return snap

    def state_dict(self):
        return {
            'r_star': self.r_star,
            'entries': {k: sorted(v) for k, v in self.entries.items()},
        }

    def load_state_dict(self, state):
        self.r_star = state['r_star']
        self.entries = {k: frozenset(v) for k, v in state['entries'].items()}

    def __contains__(self, image_id):
        return image_id in self.entries

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f'PresenceDictionary(r_star={self.r_star}, entries={len(self)})'


# ############# Category sampling ############# #

def sample_categories(probs, rng, k=1, replace=True):
    """
    Draws ``k`` categories from sampling probabilities. Without replacement
    at most ``len(probs)`` categories are returned.

    Args:
        probs (np.ndarray): length-C probabilities.
        rng (np.random.Generator): random state.
        k (int, optional): number of draws. Defaults to 1.
        replace (bool, optional): Defaults to True.

    Returns:
        np.ndarray: category ids.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.min() < 0 or abs(probs.sum() - 1) > 1e-6:
        raise TransformException('Sampling probabilities must be a distribution!')
    if not replace:
        k = min(k, int(np.count_nonzero(probs)))
    return rng.choice(len(probs), size=k, replace=replace, p=probs)


# ############# CutMix ############# #

def _window_around(mask, category, height, width, rng):
    """
    Top-left corner of a ``height x width`` window centered on a random pixel
    of ``category`` (any pixel if None or absent), clamped to the mask.
    """
    if category is not None:
        positions = np.argwhere(mask.data == category)
    else:
        positions = np.empty((0, 2), dtype=int)
    if len(positions) > 0:
        row, col = positions[rng.integers(len(positions))]
    else:
        row = rng.integers(mask.height)
        col = rng.integers(mask.width)
    top = int(np.clip(row - height // 2, 0, mask.height - height))
    left = int(np.clip(col - width // 2, 0, mask.width - width))
    return top, left


def _compose(batch, source, target, category, cfg, rng):
    src, dst = batch[source], batch[target]
    src.image.check_spatial_match(src.pseudo)
    dst.image.check_spatial_match(dst.pseudo)

    height = min(max(1, int(round(cfg.crop_fraction * src.image.height))),
                 dst.image.height)
    width = min(max(1, int(round(cfg.crop_fraction * src.image.width))),
                dst.image.width)
    top, left = _window_around(src.pseudo, category, height, width, rng)
    paste_top = int(rng.integers(dst.image.height - height + 1))
    paste_left = int(rng.integers(dst.image.width - width + 1))

    window = (slice(top, top + height), slice(left, left + width))
    region = (slice(paste_top, paste_top + height),
              slice(paste_left, paste_left + width))

    image = dst.image.data.copy()
    image[region] = src.image.data[window]
    mask = dst.pseudo.data.copy()
    mask[region] = src.pseudo.data[window]
    probs = None
    if src.probs is not None and dst.probs is not None:
        probs = dst.probs.data.copy()
        probs[region] = src.probs.data[window]
        probs = ProbMap(probs)

    return MixedSample(
        image=Image(image),
        mask=LabelMask(mask, num_classes=dst.pseudo.num_classes),
        probs=probs,
        box=PasteBox(paste_top, paste_left, height, width),
        source_box=PasteBox(top, left, height, width),
        category=category,
        source=source,
        target=target,
    )


def adaptive_cutmix(batch, bank_snapshot, presence, cfg, rng):
    """
    CutMix tilted toward under-performing categories. A category is drawn
    from the bank's sampling probabilities; the source image is drawn
    uniformly among batch members whose presence entry contains it (any
    batch member if none does) and the target uniformly from the batch. A
    ``crop_fraction`` window centered on a random pixel of the category in
    the source pseudo mask is pasted at a uniform location of the target.
    Image, pseudo mask and probabilities share the same box.

    Args:
        batch (list of UnlabeledSample): weak views with pseudo labels.
        bank_snapshot (ConfidenceBank): read-only bank.
        presence (PresenceDictionary): presence entries for the batch.
        cfg (AugConfig): augmentation settings.
        rng (np.random.Generator): random state.

    Returns:
        MixedSample: the mixed view.

    Raises:
        TransformException: if the batch is empty.
    """
    if len(batch) == 0:
        raise TransformException('Cannot apply CutMix to an empty batch!')
    category = int(sample_categories(
        bank_snapshot.sampling_probabilities(), rng)[0])
    candidates = [
        i for i, sample in enumerate(batch)
        if category in presence.get(sample.image_id)
    ]
    if not candidates:
        logging.debug(f'No image in the batch shows category {category}, '
                      f'drawing the CutMix source uniformly.')
        candidates = list(range(len(batch)))
    source = candidates[rng.integers(len(candidates))]
    target = int(rng.integers(len(batch)))
    return _compose(batch, source, target, category, cfg, rng)


def cutmix(batch, cfg, rng):
    """
    Plain CutMix: source and target drawn uniformly from the batch, window
    centered on a uniformly drawn pixel. Arguments as in
    :func:`adaptive_cutmix`.
    """
    if len(batch) == 0:
        raise TransformException('Cannot apply CutMix to an empty batch!')
    source = int(rng.integers(len(batch)))
    target = int(rng.integers(len(batch)))
    return _compose(batch, source, target, None, cfg, rng)


# ############# Copy-Paste ############# #

def _paste(src_image, src_mask, out_image, out_mask, category, offset):
    rows, cols = np.nonzero(src_mask == category)
    rows_out = rows + offset[0]
    cols_out = cols + offset[1]
    inside = (
        (rows_out >= 0) & (rows_out < out_mask.shape[0]) &
        (cols_out >= 0) & (cols_out < out_mask.shape[1])
    )
    rows, cols = rows[inside], cols[inside]
    rows_out, cols_out = rows_out[inside], cols_out[inside]
    out_image[rows_out, cols_out] = src_image[rows, cols]
    out_mask[rows_out, cols_out] = category
    return int(inside.sum())


def paste_category(src, dst, category, offset):
    """
    Overwrites ``dst`` at every pixel where ``src.mask == category``,
    translated by ``offset = (rows, cols)``. Pixels landing outside ``dst``
    are dropped. IGNORE pixels are never copied.

    Args:
        src (LabeledSample): source pair.
        dst (LabeledSample): target pair.
        category (int): category to copy.
        offset (tuple): ``(row, col)`` translation.

    Returns:
        PastedSample: the composed pair.
    """
    image = dst.image.data.copy()
    mask = dst.mask.data.copy()
    count = _paste(src.image.data, src.mask.data, image, mask, category, offset)
    return PastedSample(
        Image(image), LabelMask(mask, num_classes=dst.mask.num_classes),
        [category] if count else [], [count] if count else [])


def _random_offset(src_mask, category, dst_shape, rng):
    rows, cols = np.nonzero(src_mask == category)
    offset = []
    for coords, size in [(rows, dst_shape[0]), (cols, dst_shape[1])]:
        low, high = coords.min(), coords.max()
        extent = high - low + 1
        start = int(rng.integers(max(size - extent, 0) + 1))
        offset.append(start - int(low))
    return tuple(offset)


def adaptive_copy_paste(src, dst, bank_snapshot, cfg, rng):
    """
    Copy-Paste tilted toward under-performing categories. ``K`` categories
    are drawn without replacement from the bank's sampling probabilities.
    For each one present in the source mask, the source pair is rescaled by a
    factor drawn from ``scale_jitter_range`` and all its pixels of that
    category are pasted onto the target after a random translation that
    places the category's bounding box inside the target (its top-left
    corner when the box is larger). Categories absent from the source are
    skipped.

    Args:
        src (LabeledSample): labeled source pair.
        dst (LabeledSample): labeled target pair.
        bank_snapshot (ConfidenceBank): read-only bank.
        cfg (AugConfig): augmentation settings.
        rng (np.random.Generator): random state.

    Returns:
        PastedSample: the composed pair.
    """
    src = LabeledSample(*src)
    dst = LabeledSample(*dst)
    src.image.check_spatial_match(src.mask)
    dst.image.check_spatial_match(dst.mask)

    categories = sample_categories(
        bank_snapshot.sampling_probabilities(), rng,
        k=cfg.copy_paste_k, replace=False)
    image = dst.image.data.copy()
    mask = dst.mask.data.copy()
    pasted, counts = [], []
    for category in categories:
        category = int(category)
        if not np.any(src.mask.data == category):
            continue
        factor = rng.uniform(*cfg.scale_jitter_range)
        jittered = resize_pair(src.image, src.mask, factor)
        if not np.any(jittered.mask.data == category):
            continue
        offset = _random_offset(jittered.mask.data, category, mask.shape, rng)
        count = _paste(jittered.image.data, jittered.mask.data, image, mask,
                       category, offset)
        if count:
            pasted.append(category)
            counts.append(count)
    return PastedSample(
        Image(image), LabelMask(mask, num_classes=dst.mask.num_classes),
        pasted, counts)


class TransformException(Exception):
    """
    Exception class for errors when applying augmentations.
    """
    pass
