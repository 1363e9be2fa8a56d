"""
This module defines the TimeSeriesDataset class and the preprocessing steps
applied to every dataset before training.
"""
import numpy as np

from errors import EmptyDatasetError, ShapeError


class TimeSeriesDataset:
    """
    Represents N multivariate series of shape T x D with optional labels.

    The sample array is stored read-only; preprocessing functions return new
    datasets instead of modifying this one.

    :param name: The dataset name.
    :type name: str
    :param samples: A real array of shape (N, T, D).
    :type samples: numpy.ndarray
    :param labels: Integer class labels in 0..g-1, defaults to None.
    :type labels: numpy.ndarray, optional
    :param class_names: The original class token of each label id, defaults to None.
    :type class_names: tuple[str], optional
    """
    def __init__(self, name: str, samples, labels=None, class_names=None):
        self.name = name
        self.samples = self.validate_samples(samples)
        self.labels = self.validate_labels(labels, len(self.samples))
        if class_names is None and self.labels is not None:
            class_names = tuple(str(label) for label in range(self.g_hint))
        self.class_names = tuple(class_names) if class_names is not None else None

    @staticmethod
    def validate_samples(samples):
        """
        Validates the sample array and freezes a float64 copy of it.

        :param samples: The array to validate.
        :type samples: array-like
        :raises EmptyDatasetError: If there are no samples.
        :raises ShapeError: If the array is not three-dimensional.
        :raises ValueError: If a sample holds NaN or infinite values.
        :return: A read-only float64 array.
        :rtype: numpy.ndarray
        """
        array = np.array(samples, dtype=np.float64)
        if array.ndim != 3:
            raise ShapeError(f"samples must have shape (N, T, D), got {array.shape}")
        if array.shape[0] == 0:
            raise EmptyDatasetError("dataset has no samples")
        if array.shape[1] == 0 or array.shape[2] == 0:
            raise ShapeError(f"samples must have T >= 1 and D >= 1, got {array.shape}")
        finite = np.isfinite(array).all(axis=(1, 2))
        if not finite.all():
            raise ValueError(f"sample {int(np.flatnonzero(~finite)[0])} holds NaN or infinite values")
        array.setflags(write=False)
        return array

    @staticmethod
    def validate_labels(labels, n_samples):
        """
        Validates that labels form the contiguous set 0..g-1.

        :raises ShapeError: If the label count differs from the sample count.
        :raises ValueError: If the label ids are not contiguous from 0.
        :rtype: numpy.ndarray or None
        """
        if labels is None:
            return None
        array = np.array(labels, dtype=np.int64)
        if array.shape != (n_samples,):
            raise ShapeError(f"expected {n_samples} labels, got shape {array.shape}")
        present = np.unique(array)
        if not np.array_equal(present, np.arange(len(present))):
            raise ValueError(f"labels must be contiguous ids 0..g-1, got {present.tolist()}")
        array.setflags(write=False)
        return array

    @property
    def n_samples(self):
        """Number of samples N."""
        return self.samples.shape[0]

    @property
    def length(self):
        """Series length T."""
        return self.samples.shape[1]

    @property
    def n_dims(self):
        """Number of variates D."""
        return self.samples.shape[2]

    @property
    def g_hint(self):
        """Number of classes in the labels, or None without labels."""
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1

    def with_samples(self, samples, name=None):
        """
        Returns a copy carrying new samples and the same labels.

        :param samples: The replacement sample array.
        :type samples: numpy.ndarray
        :param name: A new name, defaults to the current one.
        :type name: str, optional
        :rtype: TimeSeriesDataset
        """
        return TimeSeriesDataset(name or self.name, samples, self.labels, self.class_names)

    def summary(self):
        """
        Generates a short description of the dataset shape.

        :return: A dictionary with name, N, T, D and g.
        :rtype: dict
        """
        return {"name": self.name, "N": self.n_samples, "T": self.length, "D": self.n_dims, "g": self.g_hint}

    def __repr__(self):
        return f"TimeSeriesDataset(name={self.name!r}, N={self.n_samples}, T={self.length}, D={self.n_dims}, g={self.g_hint})"


def znormalize(dataset: TimeSeriesDataset) -> TimeSeriesDataset:
    """
    Scales every channel of every sample to mean 0 and standard deviation 1.

    Channels with zero variance become all-zero.

    :param dataset: The dataset to normalize.
    :type dataset: TimeSeriesDataset
    :return: A normalized copy.
    :rtype: TimeSeriesDataset
    """
    samples = dataset.samples
    mean = samples.mean(axis=1, keepdims=True)
    std = samples.std(axis=1, keepdims=True)
    centered = samples - mean
    flat = std <= 1e-12
    normalized = np.divide(centered, std, out=np.zeros_like(centered), where=~flat)
    return dataset.with_samples(normalized)


def pad_or_truncate(dataset: TimeSeriesDataset, target_T: int) -> TimeSeriesDataset:
    """
    Brings every sample to length ``target_T``.

    Shorter samples are zero-padded at the end and longer samples lose their tail.

    :param dataset: The dataset to resize.
    :type dataset: TimeSeriesDataset
    :param target_T: The target length, at least 1.
    :type target_T: int
    :raises ValueError: If target_T is below 1.
    :rtype: TimeSeriesDataset
    """
    if target_T < 1:
        raise ValueError(f"target_T must be at least 1, got {target_T}")
    return dataset.with_samples(fit_length(dataset.samples, target_T))


def fit_length(samples, target_T):
    """
    Pads with zeros or truncates an (N, T, D) array along T.

    :rtype: numpy.ndarray
    """
    n, length, dims = samples.shape
    if length >= target_T:
        return samples[:, :target_T, :].copy()
    padded = np.zeros((n, target_T, dims), dtype=np.float64)
    padded[:, :length, :] = samples
    return padded


def concatenate(datasets, name=None):
    """
    Joins several datasets, padding to their common maximum length.

    Class labels are remapped jointly by class name so that a class missing
    from one split keeps a consistent id.

    :param datasets: The datasets to join; all must share D.
    :type datasets: list[TimeSeriesDataset]
    :param name: The name of the result, defaults to the first dataset's name.
    :type name: str, optional
    :raises ShapeError: If the datasets disagree on D.
    :rtype: TimeSeriesDataset
    """
    if not datasets:
        raise EmptyDatasetError("nothing to concatenate")
    dims = {d.n_dims for d in datasets}
    if len(dims) != 1:
        raise ShapeError(f"datasets disagree on the number of variates: {sorted(dims)}")
    target_T = max(d.length for d in datasets)
    samples = np.concatenate([fit_length(d.samples, target_T) for d in datasets])

    labels = class_names = None
    if all(d.labels is not None for d in datasets):
        tokens = [d.class_names[label] for d in datasets for label in d.labels]
        class_names = sort_class_tokens(set(tokens))
        index = {token: i for i, token in enumerate(class_names)}
        labels = np.array([index[token] for token in tokens], dtype=np.int64)
    return TimeSeriesDataset(name or datasets[0].name, samples, labels, class_names)


def sort_class_tokens(tokens):
    """
    Orders class tokens numerically when all of them are numbers, else lexically.

    :rtype: tuple[str]
    """
    tokens = list(tokens)
    try:
        return tuple(sorted(tokens, key=float))
    except ValueError:
        return tuple(sorted(tokens))
