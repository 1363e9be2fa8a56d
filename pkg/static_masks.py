"""
This module implements the non-evolving masking baselines.

Static masks are computed once from the raw input before training and then
replace the attention-driven mask in the otherwise unchanged pipeline. All
policies keep exactly max(1, ceil(keep_ratio * T)) timestamps per sample.
"""
from dataclasses import dataclass

import numpy as np
from scipy import fft

from config import ExperimentConfig
from masking import keep_count, ranked_positions, top_k_mask

STATIC_KINDS = ("random", "uniform", "variance", "frequency")


@dataclass(frozen=True)
class StaticMaskPolicy:
    """
    A static masking policy.

    :param kind: One of random, uniform, variance or frequency.
    :type kind: str
    :param keep_ratio: Fraction of timestamps kept, shared with the evolving mask.
    :type keep_ratio: float
    :param seed: Seed of the random policy, defaults to 0.
    :type seed: int, optional
    """
    kind: str
    keep_ratio: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STATIC_KINDS:
            raise ValueError(f"static mask kind must be one of {', '.join(STATIC_KINDS)}, got {self.kind!r}")
        ExperimentConfig.validate_keep_ratio(self.keep_ratio)


def static_mask(X, policy: StaticMaskPolicy):
    """
    Computes the static mask of every sample.

    :param X: Input of shape (N, T, D).
    :type X: numpy.ndarray
    :param policy: The masking policy.
    :type policy: StaticMaskPolicy
    :return: A {0, 1} float mask of shape (N, T).
    :rtype: numpy.ndarray
    """
    X = np.asarray(X, dtype=np.float64)
    n, T, _ = X.shape
    k = keep_count(T, policy.keep_ratio)
    if policy.kind == "random":
        return random_mask(n, T, k, policy.seed)
    if policy.kind == "uniform":
        return uniform_mask(n, T, k)
    if policy.kind == "variance":
        scores = X.var(axis=2)
    else:
        scores = spectral_scores(X, k)
    return top_k_mask(ranked_positions(scores), k)


def random_mask(n, T, k, seed):
    """
    Keeps k uniformly drawn timestamps per sample.

    :rtype: numpy.ndarray
    """
    rng = np.random.default_rng(seed)
    mask = np.zeros((n, T))
    for i in range(n):
        mask[i, rng.choice(T, size=k, replace=False)] = 1.0
    return mask


def uniform_mask(n, T, k):
    """
    Keeps k evenly spaced timestamps floor(i * T / k), starting at index 0.

    :rtype: numpy.ndarray
    """
    positions = (np.arange(k) * T) // k
    mask = np.zeros((n, T))
    mask[:, positions] = 1.0
    return mask


def spectral_scores(X, n_components):
    """
    Scores timestamps by their energy in the band-limited reconstruction.

    The rFFT bins are ranked per sample by magnitude summed over variates;
    the ``n_components`` strongest bins are kept and inverted.

    :param X: Input of shape (N, T, D).
    :type X: numpy.ndarray
    :param n_components: Number of bins kept, capped at T // 2 + 1.
    :type n_components: int
    :return: Scores of shape (N, T).
    :rtype: numpy.ndarray
    """
    T = X.shape[1]
    spectrum = fft.rfft(X, axis=1)
    n_bins = spectrum.shape[1]
    strength = np.abs(spectrum).sum(axis=2)
    keep = top_k_mask(ranked_positions(strength), min(n_components, n_bins)).astype(bool)
    filtered = np.where(keep[:, :, None], spectrum, 0.0)
    reconstruction = fft.irfft(filtered, n=T, axis=1)
    return (reconstruction ** 2).sum(axis=2)
