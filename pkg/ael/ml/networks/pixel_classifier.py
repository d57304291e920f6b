import numpy as np
import torch
from torch import nn

from ...core import constants
from ...core.grids import LogitMap
from ...core.utils import softmax


def pixel_features(image):
    """
    Per-pixel features ``(r, g, b, x / W, y / H, 1)`` where ``x`` is the column
    and ``y`` the row index.

    Args:
        image (Image): input image.

    Returns:
        np.ndarray: float64 array of shape ``(H, W, 6)``.
    """
    height, width = image.spatial_shape
    rows, cols = np.meshgrid(
        np.arange(height) / height, np.arange(width) / width, indexing='ij')
    return np.concatenate([
        image.data,
        cols[..., None],
        rows[..., None],
        np.ones((height, width, 1)),
    ], axis=-1)


class PixelClassifier(nn.Module):
    """
    Linear softmax classifier applied independently at every pixel:
    ``logits = W f`` with ``W`` of shape ``(C, F)``. Weights start at zero.

    Args:
        num_classes (int): number of categories C.
        num_features (int, optional): feature dimension F. Defaults to 6.
    """

    def __init__(self, num_classes, num_features=constants.NUM_FEATURES):
        super().__init__()
        self.weight = nn.Parameter(
            torch.zeros(num_classes, num_features, dtype=torch.float64))

    @property
    def num_classes(self):
        return self.weight.shape[0]

    def forward(self, features):
        """
        Args:
            features (torch.Tensor): ``(..., F)`` float64 features.

        Returns:
            torch.Tensor: ``(..., C)`` logits.
        """
        return features @ self.weight.T

    def logits(self, image):
        """
        Forward pass on an Image, returning a LogitMap.
        """
        features = torch.from_numpy(pixel_features(image))
        with torch.no_grad():
            output = self(features)
        return LogitMap(output.numpy())

    def predict(self, image):
        """
        (ProbMap) Softmax of :meth:`logits`.
        """
        return softmax(self.logits(image))

    def get_weights(self):
        """
        (np.ndarray) A copy of the ``(C, F)`` weight matrix.
        """
        return self.weight.detach().numpy().copy()

    def set_weights(self, weights):
        with torch.no_grad():
            self.weight.copy_(torch.as_tensor(weights, dtype=torch.float64))

    def __repr__(self):
        return (f'PixelClassifier(num_classes={self.num_classes}, '
                f'num_features={self.weight.shape[1]})')
