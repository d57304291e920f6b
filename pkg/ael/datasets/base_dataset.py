from typing import Iterable

import numpy as np
from torch.utils.data import Dataset


class BaseDataset(Dataset, Iterable):
    """
    The BaseDataset class is the starting point for all dataset hooks
    in ael. To subclass BaseDataset, you only have to implement two
    functions:

    - ``get_items``: a function that is passed the folder and generates a
      list of items that will be processed by the next function. The
      number of items in the list will dictate len(dataset). Must return
      a list.
    - ``process_item``: this function processes a single item in the list
      generated by get_items. Must return a dictionary with at least the
      keys ``id``, ``image`` (an Image) and ``mask`` (a LabelMask).

    For examples of subclassing, see ``ael.datasets.hooks``.

    Args:
        folder (str): location that should be processed to produce the list
          of items. May be None for generated datasets.
        num_classes (int): number of categories of the masks.

    Raises:
        DataSetException: Exceptions are raised if the output of the implemented
            functions by the subclass don't match the expected format.
    """

    def __init__(self, folder, num_classes):
        self.folder = folder
        self.num_classes = num_classes
        self.items = self.get_items(self.folder)
        self.metadata = {
            'name': self.__class__.__name__,
            'folder': folder,
            'num_classes': num_classes,
        }

        if not isinstance(self.items, list):
            raise DataSetException("Output of self.get_items must be a list!")

    def get_items(self, folder):
        """
        This function must be implemented by whatever class inherits BaseDataset.
        It should return a list of items in the given folder, each of which is
        processed by process_item to produce an image and its mask.

        Args:
            folder (str): location that should be processed to produce the list of items.

        Returns:
            list: list of items that should be processed
        """
        raise NotImplementedError()

    def __len__(self):
        """
        Gets the length of the dataset (the number of items that will be processed).

        Returns:
            int: Length of the dataset (``len(self.items)``).
        """
        return len(self.items)

    def __getitem__(self, i):
        """
        Processes a single item in ``self.items`` using ``self.process_item``.

        Args:
            i (int): Index of the dataset to return. Indexes ``self.items``.

        Returns:
            dict: Dictionary with keys ``id``, ``image``, ``mask`` and ``index``.
        """
        data = self.process_item(self.items[i])
        if not isinstance(data, dict):
            raise DataSetException(
                "The output of process_item must be a dictionary!")
        for key in ['id', 'image', 'mask']:
            if key not in data:
                raise DataSetException(
                    f"The output of process_item must contain '{key}'!")
        data['index'] = i
        return data

    def __iter__(self):
        """
        Calls ``self.__getitem__`` from ``0`` to ``self.__len__()``.
        Required when inheriting Iterable.

        Yields:
            dict: Dictionary with keys and values corresponding to the
                processed item.
        """
        for i in range(len(self)):
            yield self[i]

    def process_item(self, item):
        """Each item returned by get_items is processed by this function. For
        example, if each item is a row of a manifest, this function loads the
        image and mask files it points to.

        Args:
            item (object): the item that will be processed by this function.
              Input depends on implementation of ``self.get_items``.

        Returns:
            This should return a dictionary that gets processed by the
            training loop.
        """
        raise NotImplementedError()

    def pixel_counts(self, indices=None):
        """
        Per-class pixel counts over the masks of ``indices`` (all items by
        default). IGNORE pixels are not counted.

        Returns:
            np.ndarray: length-C integer counts.
        """
        indices = range(len(self)) if indices is None else indices
        counts = np.zeros(self.num_classes, dtype=np.int64)
        for i in indices:
            mask = self[i]['mask']
            labels = mask.data[mask.valid]
            counts += np.bincount(labels, minlength=self.num_classes)[:self.num_classes]
        return counts


class DataSetException(Exception):
    """
    Exception class for errors when working with data sets in ael.
    """
    pass
