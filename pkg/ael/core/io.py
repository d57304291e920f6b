"""
Reading and writing grids as PNG files. Images are 8-bit RGB, masks are 8-bit
single-channel with IGNORE stored as 255. A grid read from disk and written
back is bit-identical.
"""

import os

import numpy as np
from PIL import Image as PILImage

from .grids import Image, LabelMask, GridException


def write_image(image, path):
    """
    Writes an Image as an 8-bit RGB PNG. Values are rounded to the nearest
    multiple of 1/255.

    Args:
        image (Image): image to write.
        path (str): output path; parent folders are created.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    data = np.round(image.data * 255).astype(np.uint8)
    PILImage.fromarray(data).save(path)


def read_image(path):
    """
    Reads an 8-bit RGB PNG into an Image with values ``k / 255``.
    """
    with PILImage.open(path) as f:
        data = np.asarray(f.convert('RGB'), dtype=np.uint8)
    return Image(data.astype(np.float64) / 255)


def write_mask(mask, path):
    """
    Writes a LabelMask as an 8-bit single-channel PNG.

    Raises:
        GridException: if a label does not fit in 8 bits.
    """
    if mask.data.max() > 255:
        raise GridException('Mask labels must fit in 8 bits to be written!')
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    PILImage.fromarray(mask.data.astype(np.uint8)).save(path)


def read_mask(path, num_classes=None):
    """
    Reads an 8-bit single-channel PNG into a LabelMask. The value 255 is
    ``IGNORE_INDEX``.
    """
    with PILImage.open(path) as f:
        if f.mode not in ('L', 'P'):
            raise GridException(
                f'Expected a single-channel mask at {path}, got mode {f.mode}')
        data = np.asarray(f, dtype=np.uint8)
    return LabelMask(data.astype(np.int64), num_classes=num_classes)
