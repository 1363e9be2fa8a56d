"""
This module generates synthetic clustering datasets with controllable
temporal redundancy.

Each cluster has a sinusoidal signature with its own frequency and phase.
All clusters oscillate around zero, so the time average of a series says
nothing about its cluster. A configurable share of the timestamps is replaced
by a constant segment shared by all clusters, which models steady-state
operation records that carry no cluster information.
"""
from dataclasses import asdict, dataclass

import numpy as np

from errors import ArgumentError
from time_series import TimeSeriesDataset


@dataclass
class SyntheticSpec:
    """
    Parameters of a synthetic dataset, as stored in a run manifest.
    """
    n_per_cluster: int = 10
    g: int = 3
    T: int = 64
    D: int = 3
    redundancy_fraction: float = 0.5
    noise_std: float = 0.1
    seed: int = 0

    def build(self):
        """
        Generates the dataset described by this spec.

        :rtype: TimeSeriesDataset
        """
        return generate_synthetic(**asdict(self))

    def to_dict(self):
        """
        :rtype: dict
        """
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """
        :rtype: SyntheticSpec
        """
        return cls(**data)


def redundant_positions(T, redundancy_fraction):
    """
    Returns a boolean vector marking the redundant timestamps.

    The redundant stamps form a leading and a trailing constant segment
    around the informative middle.

    :rtype: numpy.ndarray
    """
    n_redundant = int(round(redundancy_fraction * T))
    lead = n_redundant // 2
    redundant = np.zeros(T, dtype=bool)
    redundant[:lead] = True
    redundant[T - (n_redundant - lead):] = True
    return redundant


def cluster_prototypes(g, T, D, redundancy_fraction, rng):
    """
    Builds the noise-free (g, T, D) prototype of every cluster.

    :rtype: numpy.ndarray
    """
    redundant = redundant_positions(T, redundancy_fraction)
    informative = np.flatnonzero(~redundant)
    steady_level = rng.normal(size=D)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(g, D))

    prototypes = np.empty((g, T, D))
    prototypes[:, redundant, :] = steady_level
    if informative.size:
        position = np.arange(informative.size)[:, None] / max(informative.size, 1)
        for c in range(g):
            frequency = c + 1
            prototypes[c, informative, :] = np.sin(2.0 * np.pi * frequency * position + phases[c][None, :])
    return prototypes


def generate_synthetic(n_per_cluster: int, g: int, T: int, D: int, redundancy_fraction: float,
                       noise_std: float, seed: int) -> TimeSeriesDataset:
    """
    Generates ``g * n_per_cluster`` labeled samples.

    Informative timestamps carry the cluster signature; redundant timestamps
    are identical across clusters up to noise. The output depends only on
    the arguments.

    :param n_per_cluster: Samples per cluster.
    :type n_per_cluster: int
    :param g: Number of clusters, at least 2.
    :type g: int
    :param T: Series length.
    :type T: int
    :param D: Number of variates.
    :type D: int
    :param redundancy_fraction: Share of timestamps in [0, 1] that are redundant.
    :type redundancy_fraction: float
    :param noise_std: Standard deviation of the additive Gaussian noise.
    :type noise_std: float
    :param seed: The random seed.
    :type seed: int
    :raises ArgumentError: If g < 2 or any size or fraction is out of range.
    :rtype: TimeSeriesDataset
    """
    if g < 2:
        raise ArgumentError(f"g must be at least 2, got {g}")
    if min(n_per_cluster, T, D) < 1:
        raise ArgumentError(f"sizes must be positive, got n_per_cluster={n_per_cluster}, T={T}, D={D}")
    if not 0.0 <= redundancy_fraction <= 1.0:
        raise ArgumentError(f"redundancy_fraction must be in [0, 1], got {redundancy_fraction}")
    if noise_std < 0:
        raise ArgumentError(f"noise_std must be nonnegative, got {noise_std}")

    rng = np.random.default_rng(seed)
    prototypes = cluster_prototypes(g, T, D, redundancy_fraction, rng)
    labels = np.repeat(np.arange(g), n_per_cluster)
    samples = prototypes[labels] + noise_std * rng.standard_normal((labels.size, T, D))
    name = f"synthetic_g{g}_T{T}_D{D}_r{redundancy_fraction:g}"
    return TimeSeriesDataset(name, samples, labels)
