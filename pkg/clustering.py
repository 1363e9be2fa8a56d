"""
This module clusters the fused embedding with k-means and turns the cluster
labels into a contrastive objective.

k-means runs on a detached NumPy copy of the embedding every epoch; the
contrastive loss is differentiable with respect to the embedding.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import torch

from config import ContrastConfig
from errors import ArgumentError

logger = logging.getLogger(__name__)

COSINE_EPS = 1e-12


@dataclass
class ClusterState:
    """
    The result of one k-means run.

    :param labels: Cluster id of every sample, in 0..g-1.
    :type labels: numpy.ndarray
    :param centroids: Centroids of shape (g, d).
    :type centroids: numpy.ndarray
    :param inertia: Sum of squared distances of the samples to their centroids.
    :type inertia: float
    :param epoch: The training epoch the state belongs to.
    :type epoch: int
    :param n_iter: Lloyd iterations of the winning restart.
    :type n_iter: int
    :param inertia_history: Inertia after every Lloyd update of the winning restart.
    :type inertia_history: list[float]
    """
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    epoch: int = 0
    n_iter: int = 0
    inertia_history: list = field(default_factory=list)

    @property
    def n_clusters(self):
        return len(self.centroids)

    def with_epoch(self, epoch):
        """
        :rtype: ClusterState
        """
        return replace(self, epoch=epoch)


def squared_distances(F, centroids):
    """
    Squared Euclidean distance of every point to every centroid.

    :rtype: numpy.ndarray
    """
    return ((F[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def compute_inertia(F, labels, centroids):
    """
    :rtype: float
    """
    return float(((F - centroids[labels]) ** 2).sum())


def update_centroids(F, labels, centroids):
    """
    Moves every non-empty cluster's centroid to the mean of its members.

    Empty clusters keep their previous centroid.

    :rtype: numpy.ndarray
    """
    updated = centroids.copy()
    for c in range(len(centroids)):
        members = labels == c
        if members.any():
            updated[c] = F[members].mean(axis=0)
    return updated


def kmeans_plusplus(F, g, rng):
    """
    Picks g initial centroids with D^2 weighting.

    :param F: Points of shape (N, d).
    :type F: numpy.ndarray
    :param g: Number of centroids.
    :type g: int
    :param rng: The random generator.
    :type rng: numpy.random.Generator
    :rtype: numpy.ndarray
    """
    n = F.shape[0]
    centroids = np.empty((g, F.shape[1]), dtype=F.dtype)
    centroids[0] = F[rng.integers(n)]
    for i in range(1, g):
        dist_sq = squared_distances(F, centroids[:i]).min(axis=1)
        total = dist_sq.sum()
        if total > 0:
            centroids[i] = F[rng.choice(n, p=dist_sq / total)]
        else:
            centroids[i] = F[rng.integers(n)]
    return centroids


def lloyd(F, g, rng, max_iter):
    """
    Runs one k-means restart until the assignments stop changing.

    :return: Labels, centroids and the inertia after every update.
    :rtype: tuple[numpy.ndarray, numpy.ndarray, list[float]]
    """
    centroids = kmeans_plusplus(F, g, rng)
    labels = None
    history = []
    for _ in range(max_iter):
        new_labels = squared_distances(F, centroids).argmin(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = update_centroids(F, labels, centroids)
        history.append(compute_inertia(F, labels, centroids))
    return labels, centroids, history


def kmeans(F, g: int, seed: int, n_init: int = 10, max_iter: int = 300) -> ClusterState:
    """
    Lloyd's k-means with k-means++ initialization and several restarts.

    The restart with the lowest inertia wins; ties go to the earliest
    restart. Empty clusters of the winner are repaired.

    :param F: Points of shape (N, d).
    :type F: numpy.ndarray
    :param g: Number of clusters, at most N.
    :type g: int
    :param seed: The random seed; equal seeds give equal results.
    :type seed: int
    :param n_init: Number of restarts, defaults to 10.
    :type n_init: int, optional
    :param max_iter: Lloyd iterations per restart, defaults to 300.
    :type max_iter: int, optional
    :raises ArgumentError: If g is not in 1..N.
    :rtype: ClusterState
    """
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    if not 1 <= g <= n:
        raise ArgumentError(f"cannot form {g} clusters from {n} samples")

    best = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        labels, centroids, history = lloyd(F, g, np.random.default_rng(child), max_iter)
        if best is None or history[-1] < best.inertia:
            best = ClusterState(labels, centroids, history[-1], n_iter=len(history), inertia_history=history)
    return repair_empty_clusters(best, F)


def fill_empty_clusters(labels, centroids, F):
    """
    Gives every empty cluster one point taken from a cluster with at least two members.

    The moved point is the one farthest from its current centroid; the empty
    cluster's centroid is reseeded onto it. Works in place.
    """
    g = len(centroids)
    for c in range(g):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels, minlength=g)
        own = ((F - centroids[labels]) ** 2).sum(axis=1)
        donors = np.flatnonzero(counts[labels] > 1)
        point = donors[np.argmax(own[donors])]
        centroids[c] = F[point]
        labels[point] = c


def repair_empty_clusters(state: ClusterState, F) -> ClusterState:
    """
    Reseeds the centroid of every empty cluster and reassigns once.

    :param state: The state to repair.
    :type state: ClusterState
    :param F: The clustered points of shape (N, d).
    :type F: numpy.ndarray
    :return: A state in which every cluster id appears.
    :rtype: ClusterState
    """
    F = np.asarray(F, dtype=np.float64)
    g = state.n_clusters
    if np.all(np.bincount(state.labels, minlength=g) > 0):
        return state

    labels = state.labels.copy()
    centroids = state.centroids.copy()
    fill_empty_clusters(labels, centroids, F)
    labels = squared_distances(F, centroids).argmin(axis=1)
    # duplicate points can empty a cluster again on reassignment
    fill_empty_clusters(labels, centroids, F)
    centroids = update_centroids(F, labels, centroids)
    logger.warning("repaired empty clusters", extra={"n_clusters": g, "epoch": state.epoch})
    return replace(state, labels=labels, centroids=centroids, inertia=compute_inertia(F, labels, centroids))


def cosine_sim(a, b):
    """
    Cosine similarity of two vectors.

    The norm product is floored at 1e-12 so zero vectors give 0.

    :param a: A vector of length d.
    :type a: torch.Tensor
    :param b: A vector of length d.
    :type b: torch.Tensor
    :rtype: torch.Tensor
    """
    return torch.dot(a, b) / (torch.linalg.vector_norm(a) * torch.linalg.vector_norm(b)).clamp_min(COSINE_EPS)


def similarity_matrix(F):
    """
    Pairwise cosine similarities of the rows of F.

    :rtype: torch.Tensor
    """
    norms = torch.linalg.vector_norm(F, dim=1)
    return (F @ F.T) / (norms[:, None] * norms[None, :]).clamp_min(COSINE_EPS)


def sample_positives(labels, seed):
    """
    Draws one same-cluster partner for every anchor.

    Anchors alone in their cluster get -1.

    :param labels: Cluster ids of shape (N,).
    :type labels: numpy.ndarray
    :param seed: Seed of the draw.
    :type seed: int
    :rtype: numpy.ndarray
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    positives = np.full(labels.shape[0], -1, dtype=np.int64)
    for i, label in enumerate(labels):
        partners = np.flatnonzero(labels == label)
        partners = partners[partners != i]
        if partners.size:
            positives[i] = partners[rng.integers(partners.size)]
    return positives


def contrastive_loss(F, labels, cfg: ContrastConfig):
    """
    Clustering-guided contrastive loss with one sampled positive per anchor.

    For anchor i with positive p the loss is
    -log(exp(s_ip / tau) / sum_{j != i} exp(s_ij / tau)), averaged over the
    anchors that have a partner.

    :param F: The fused embedding of shape (N, d).
    :type F: torch.Tensor
    :param labels: Cluster ids of shape (N,).
    :type labels: numpy.ndarray
    :param cfg: Temperature and positive-sampling seed.
    :type cfg: ContrastConfig
    :return: The scalar loss; zero when every cluster is a singleton.
    :rtype: torch.Tensor
    """
    positives = sample_positives(labels, cfg.positive_sampling_seed)
    anchors = np.flatnonzero(positives >= 0)
    if anchors.size == 0:
        logger.warning("every cluster is a singleton; contrastive loss is zero")
        return F.sum() * 0.0

    anchor_index = torch.as_tensor(anchors, device=F.device)
    logits = similarity_matrix(F)[anchor_index] / cfg.temperature
    self_pairs = torch.zeros_like(logits, dtype=torch.bool)
    self_pairs[torch.arange(anchors.size), anchor_index] = True
    logits = logits.masked_fill(self_pairs, float("-inf"))
    positive_logits = logits[torch.arange(anchors.size), torch.as_tensor(positives[anchors], device=F.device)]
    return (torch.logsumexp(logits, dim=1) - positive_logits).mean()
