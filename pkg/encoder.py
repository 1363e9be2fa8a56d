"""
This module builds the multiple endogenous views of each input sequence and
fuses them into one embedding per sample.

Every view has its own encoder: a depthwise temporal convolution with a
view-specific kernel width, a linear channel mix from D to d, and ``tanh``.
No parameters are shared between views.
"""
from dataclasses import dataclass

import torch
from torch import nn

from errors import ArgumentError, ShapeError


class ViewEncoder(nn.Module):
    """
    The encoder of a single view.

    :param input_dim: Number of variates D.
    :type input_dim: int
    :param embed_dim: Representation width d.
    :type embed_dim: int
    :param kernel_width: Odd temporal kernel width.
    :type kernel_width: int
    """
    def __init__(self, input_dim: int, embed_dim: int, kernel_width: int):
        super().__init__()
        self.kernel_width = kernel_width
        self.conv = nn.Conv1d(input_dim, input_dim, kernel_width, padding=kernel_width // 2, groups=input_dim)
        self.mix = nn.Linear(input_dim, embed_dim)

    def forward(self, X):
        # (N, T, D) -> (N, D, T) for the convolution and back
        filtered = self.conv(X.transpose(1, 2)).transpose(1, 2)
        return torch.tanh(self.mix(filtered))


class ViewEncoders(nn.Module):
    """
    The V independent view encoders (the encoder parameters of the model).

    View v uses ``view_widths[v]``; ``ExperimentConfig.kernel_width`` assigns them.

    :param input_dim: Number of variates D.
    :type input_dim: int
    :param embed_dim: Representation width d.
    :type embed_dim: int
    :param view_widths: One kernel width per view; its length is the number of views V.
    :type view_widths: list[int]
    """
    def __init__(self, input_dim: int, embed_dim: int, view_widths):
        super().__init__()
        self.input_dim = input_dim
        self.embed_dim = embed_dim
        self.views = nn.ModuleList(
            ViewEncoder(input_dim, embed_dim, width) for width in view_widths
        )

    @property
    def n_views(self):
        return len(self.views)

    def encode_view(self, view, X):
        """
        Encodes X with the encoder of one view.

        :param view: The view index.
        :type view: int
        :param X: Input of shape (N, T, D).
        :type X: torch.Tensor
        :raises ShapeError: If X does not have D variates.
        :return: The representation of shape (N, T, d).
        :rtype: torch.Tensor
        """
        if X.dim() != 3 or X.shape[2] != self.input_dim:
            raise ShapeError(f"expected input of shape (N, T, {self.input_dim}), got {tuple(X.shape)}")
        return self.views[view](X)

    def forward(self, X):
        return encode_views(X, self)


@dataclass
class ViewBundle:
    """
    The per-view representations and their fused embedding.

    :param views: V tensors of shape (N, T, d).
    :type views: list[torch.Tensor]
    :param fused: The fused embedding of shape (N, d).
    :type fused: torch.Tensor
    """
    views: list
    fused: torch.Tensor

    @classmethod
    def from_views(cls, views):
        """
        Bundles views together with their fusion.

        :rtype: ViewBundle
        """
        return cls(list(views), fuse_views(views))


def encode_views(X, params: ViewEncoders):
    """
    Produces one representation per view, each from its own encoder.

    :param X: Input of shape (N, T, D).
    :type X: torch.Tensor
    :param params: The view encoders.
    :type params: ViewEncoders
    :return: V tensors of shape (N, T, d).
    :rtype: list[torch.Tensor]
    """
    return [params.encode_view(v, X) for v in range(params.n_views)]


def fuse_views(views):
    """
    Averages the views and pools over time.

    :param views: V tensors of shape (N, T, d).
    :type views: list[torch.Tensor]
    :raises ArgumentError: If the list is empty.
    :raises ShapeError: If the views differ in shape.
    :return: The fused embedding of shape (N, d).
    :rtype: torch.Tensor
    """
    if not views:
        raise ArgumentError("fuse_views needs at least one view")
    if len({tuple(v.shape) for v in views}) != 1:
        raise ShapeError(f"views differ in shape: {[tuple(v.shape) for v in views]}")
    return torch.stack(views).mean(dim=0).mean(dim=1)
