"""
This module holds the reconstruction pathway: per-view decoders that recover
the original sequence, cross-view transforms that map one view onto another,
and the two losses built on them.

Both losses are summed squared Frobenius norms divided by N.
"""
from torch import nn


class ViewDecoders(nn.Module):
    """
    One linear decoder d -> D per view, applied at every timestamp.

    :param embed_dim: Representation width d.
    :type embed_dim: int
    :param output_dim: Number of variates D.
    :type output_dim: int
    :param n_views: Number of views V.
    :type n_views: int
    """
    def __init__(self, embed_dim: int, output_dim: int, n_views: int):
        super().__init__()
        self.views = nn.ModuleList(nn.Linear(embed_dim, output_dim) for _ in range(n_views))

    def decode(self, view, F_v):
        """
        Reconstructs the input sequence from one view.

        :rtype: torch.Tensor
        """
        return self.views[view](F_v)


class CrossViewTransforms(nn.Module):
    """
    A linear map d -> d for every ordered pair of distinct views.

    :param embed_dim: Representation width d.
    :type embed_dim: int
    :param n_views: Number of views V.
    :type n_views: int
    """
    def __init__(self, embed_dim: int, n_views: int):
        super().__init__()
        self.n_views = n_views
        self.pairs = nn.ModuleDict({
            self.key(i, j): nn.Linear(embed_dim, embed_dim)
            for i in range(n_views) for j in range(n_views) if i != j
        })

    @staticmethod
    def key(i, j):
        """
        The module key of the map from view i to view j.

        :rtype: str
        """
        return f"{i}_to_{j}"

    def transform(self, i, j, F_i):
        """
        Maps the representation of view i into the space of view j.

        :rtype: torch.Tensor
        """
        return self.pairs[self.key(i, j)](F_i)


def intra_loss(X, views, decoders: ViewDecoders):
    """
    Reconstruction error of the original input from every view.

    :param X: The unmasked input of shape (N, T, D).
    :type X: torch.Tensor
    :param views: V representations of shape (N, T, d).
    :type views: list[torch.Tensor]
    :param decoders: The per-view decoders.
    :type decoders: ViewDecoders
    :return: sum_v ||X - R_v(F_v)||_F^2 / N.
    :rtype: torch.Tensor
    """
    total = X.new_zeros(())
    for v, F_v in enumerate(views):
        total = total + (X - decoders.decode(v, F_v)).pow(2).sum()
    return total / X.shape[0]


def inter_loss(views, transforms: CrossViewTransforms):
    """
    Cross-view consistency error over all unordered view pairs, both directions.

    Pairs are visited in a fixed (i, j) order so the sum is reproducible.

    :param views: V representations of shape (N, T, d).
    :type views: list[torch.Tensor]
    :param transforms: The cross-view maps.
    :type transforms: CrossViewTransforms
    :return: sum_{i<j} (L_ij + L_ji) / N; zero for a single view.
    :rtype: torch.Tensor
    """
    total = views[0].new_zeros(())
    for i in range(len(views)):
        for j in range(i + 1, len(views)):
            total = total + (views[j] - transforms.transform(i, j, views[i])).pow(2).sum()
            total = total + (views[i] - transforms.transform(j, i, views[j])).pow(2).sum()
    return total / views[0].shape[0]
