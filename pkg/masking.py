"""
This module scores timestamp importance with content-aware attention and
turns the scores into evolving binary masks.

The hard mask is not differentiable. During training the mask is used
through a straight-through estimator: the forward value is the hard mask,
the gradient is that of a sigmoid surrogate centred on the threshold.
"""
import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.utils.checkpoint import checkpoint

from errors import NonFiniteError, ShapeError


class TimestampAttention(nn.Module):
    """
    Per-view query and key projections (the attention parameters).

    :param embed_dim: Representation width d.
    :type embed_dim: int
    :param key_dim: Projection width d_k.
    :type key_dim: int
    :param n_views: Number of views V.
    :type n_views: int
    """
    def __init__(self, embed_dim: int, key_dim: int, n_views: int):
        super().__init__()
        self.key_dim = key_dim
        self.queries = nn.ModuleList(nn.Linear(embed_dim, key_dim, bias=False) for _ in range(n_views))
        self.keys = nn.ModuleList(nn.Linear(embed_dim, key_dim, bias=False) for _ in range(n_views))

    def view_params(self, view):
        """
        Returns the (W_Q, W_K) pair of a view as modules.

        :rtype: tuple[nn.Linear, nn.Linear]
        """
        return self.queries[view], self.keys[view]

    def importance(self, view, F_v, chunk=None):
        """
        Scores every timestamp of one view.

        For series longer than ``chunk`` the query rows are processed in
        chunks under activation checkpointing, so the (N, T, T) attention
        tensor is never held in memory at once.

        :param view: The view index.
        :type view: int
        :param F_v: The view representation of shape (N, T, d).
        :type F_v: torch.Tensor
        :param chunk: Maximum number of query rows per chunk, defaults to None.
        :type chunk: int, optional
        :return: Importance of shape (N, T); every row sums to 1.
        :rtype: torch.Tensor
        """
        T = F_v.shape[1]
        if chunk is None or T <= chunk:
            return timestamp_importance(attention_map(F_v, self.view_params(view)))

        W_Q, W_K = self.view_params(view)
        keys = W_K(F_v)
        total = F_v.new_zeros(F_v.shape[0], T)
        for start in range(0, T, chunk):
            queries = W_Q(F_v[:, start:start + chunk])
            total = total + checkpoint(attention_column_sums, queries, keys, self.key_dim, use_reentrant=False)
        return total / T


def attention_logits(queries, keys, key_dim):
    """
    Computes the scaled dot-product logits and checks that they are finite.

    :raises NonFiniteError: If any logit is NaN or infinite, naming the sample.
    :rtype: torch.Tensor
    """
    logits = queries @ keys.transpose(1, 2) / math.sqrt(key_dim)
    finite = torch.isfinite(logits).flatten(1).all(dim=1)
    if not bool(finite.all()):
        sample = int(torch.nonzero(~finite)[0, 0])
        raise NonFiniteError(f"non-finite attention logits for sample {sample}")
    return logits


def attention_column_sums(queries, keys, key_dim):
    """
    Sums a chunk of attention rows over the query axis.

    :rtype: torch.Tensor
    """
    return torch.softmax(attention_logits(queries, keys, key_dim), dim=-1).sum(dim=1)


def attention_map(F_v, params):
    """
    Computes the content-aware attention of one view.

    :param F_v: The view representation of shape (N, T, d).
    :type F_v: torch.Tensor
    :param params: The (W_Q, W_K) projections of the view.
    :type params: tuple[nn.Linear, nn.Linear]
    :raises ShapeError: If F_v does not match the projection width.
    :raises NonFiniteError: If a logit is not finite.
    :return: Row-stochastic attention of shape (N, T, T).
    :rtype: torch.Tensor
    """
    W_Q, W_K = params
    if F_v.dim() != 3 or F_v.shape[2] != W_Q.in_features:
        raise ShapeError(f"expected representation of shape (N, T, {W_Q.in_features}), got {tuple(F_v.shape)}")
    logits = attention_logits(W_Q(F_v), W_K(F_v), W_Q.out_features)
    return torch.softmax(logits, dim=-1)


def timestamp_importance(attn):
    """
    Reduces attention to one score per timestamp: the mean attention it receives as a key.

    :param attn: Row-stochastic attention of shape (N, T, T).
    :type attn: torch.Tensor
    :return: Importance of shape (N, T); each row sums to 1.
    :rtype: torch.Tensor
    """
    return attn.mean(dim=1)


def keep_count(T, keep_ratio):
    """
    Number of timestamps a mask keeps: max(1, ceil(keep_ratio * T)).

    The product is rounded to 9 decimals first so that 0.7 * 10 keeps 7.

    :rtype: int
    """
    return max(1, math.ceil(round(keep_ratio * T, 9)))


def ranked_positions(scores):
    """
    Orders timestamps by decreasing score, earlier index first on ties.

    :param scores: Scores of shape (N, T).
    :type scores: numpy.ndarray
    :return: Index array of shape (N, T).
    :rtype: numpy.ndarray
    """
    return np.argsort(-np.asarray(scores), axis=1, kind="stable")


def top_k_mask(order, k):
    """
    Builds a {0, 1} float mask keeping the first k positions of each ranking row.

    :param order: Rankings of shape (N, T), as returned by ``ranked_positions``.
    :type order: numpy.ndarray
    :rtype: numpy.ndarray
    """
    mask = np.zeros(order.shape, dtype=np.float64)
    np.put_along_axis(mask, order[:, :k], 1.0, axis=1)
    return mask


def threshold_mask(importance, keep_ratio):
    """
    Keeps the max(1, ceil(keep_ratio * T)) most important timestamps per sample.

    The threshold of a sample is the importance of its last kept timestamp,
    i.e. the (1 - keep_ratio) quantile; ties are resolved in favour of the
    earlier timestamp. The thresholds stay attached to the autograd graph.

    :param importance: Importance of shape (N, T).
    :type importance: torch.Tensor
    :param keep_ratio: Fraction of timestamps to keep, in (0, 1].
    :type keep_ratio: float
    :return: The hard mask of shape (N, T) and the per-sample thresholds of shape (N,).
    :rtype: tuple[torch.Tensor, torch.Tensor]
    """
    k = keep_count(importance.shape[1], keep_ratio)
    order = ranked_positions(importance.detach().cpu().numpy())
    mask = top_k_mask(order, k)
    last_kept = torch.as_tensor(order[:, k - 1:k], device=importance.device)
    thresholds = importance.gather(1, last_kept).squeeze(1)
    return torch.as_tensor(mask, dtype=importance.dtype, device=importance.device), thresholds


def apply_mask(X, mask):
    """
    Zeroes the masked timestamps across all variates.

    :param X: Input of shape (N, T, D).
    :type X: torch.Tensor
    :param mask: Mask of shape (N, T).
    :type mask: torch.Tensor
    :raises ShapeError: If the shapes disagree.
    :rtype: torch.Tensor
    """
    if tuple(mask.shape) != tuple(X.shape[:2]):
        raise ShapeError(f"mask shape {tuple(mask.shape)} does not match input {tuple(X.shape)}")
    return X * mask.unsqueeze(-1)


def soft_mask_for_backward(importance, threshold, sharpness):
    """
    The sigmoid surrogate of the hard mask.

    :param importance: Importance of shape (N, T).
    :type importance: torch.Tensor
    :param threshold: Per-sample thresholds of shape (N,).
    :type threshold: torch.Tensor
    :param sharpness: Slope of the sigmoid, positive.
    :type sharpness: float
    :rtype: torch.Tensor
    """
    return torch.sigmoid(sharpness * (importance - threshold.unsqueeze(-1)))


def straight_through(hard, soft):
    """
    Returns a tensor equal to ``hard`` whose gradient is that of ``soft``.

    :rtype: torch.Tensor
    """
    return hard + (soft - soft.detach())


def mask_change_rate(previous, current):
    """
    Fraction of mask entries that flipped between two mask lists.

    :param previous: The earlier masks, or None.
    :type previous: list[torch.Tensor] or None
    :param current: The later masks.
    :type current: list[torch.Tensor]
    :rtype: float
    """
    if previous is None:
        return 0.0
    flipped = sum(int((p != c).sum()) for p, c in zip(previous, current))
    total = sum(c.numel() for c in current)
    return flipped / total


@dataclass
class MaskSet:
    """
    The masks of one epoch with the scores they were thresholded from.

    :param importance: Per-view (N, T) importance, detached.
    :type importance: list[torch.Tensor]
    :param masks: Per-view (N, T) hard masks with values in {0, 1}.
    :type masks: list[torch.Tensor]
    :param keep_ratio: The keep ratio used.
    :type keep_ratio: float
    :param thresholds: Per-view (N,) thresholds, or None for static masks.
    :type thresholds: list[torch.Tensor] or None
    """
    importance: list
    masks: list
    keep_ratio: float
    thresholds: list = None

    def rows(self, epoch):
        """
        Flattens the masks into dump rows.

        :param epoch: The epoch the masks belong to.
        :type epoch: int
        :return: Dictionaries with epoch, view, sample and a 0/1 string.
        :rtype: list[dict]
        """
        rows = []
        for view, mask in enumerate(self.masks):
            for sample, row in enumerate(mask.to(torch.int64).tolist()):
                rows.append({"epoch": epoch, "view": view, "sample": sample,
                             "mask": "".join(str(bit) for bit in row)})
        return rows
