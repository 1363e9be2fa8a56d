"""
This module bundles every trainable block of EMTC into one module.

State-dict keys are indexed by view, e.g. ``encoders.views.0.conv.weight``
or ``transforms.pairs.0_to_1.weight``.
"""
import torch
from torch import nn

from config import ExperimentConfig
from encoder import ViewEncoders
from masking import TimestampAttention
from reconstruction import CrossViewTransforms, ViewDecoders


class EMTCModel(nn.Module):
    """
    The encoders, attention projections, decoders and cross-view transforms.

    Parameters use PyTorch's fan-in scaled uniform initialization and
    float64, drawn from the current global torch seed.

    :param input_dim: Number of variates D.
    :type input_dim: int
    :param config: The experiment configuration.
    :type config: ExperimentConfig
    """
    def __init__(self, input_dim: int, config: ExperimentConfig):
        super().__init__()
        self.input_dim = input_dim
        self.n_views = config.n_views
        self.encoders = ViewEncoders(input_dim, config.embed_dim,
                                     [config.kernel_width(v) for v in range(config.n_views)])
        self.attention = TimestampAttention(config.embed_dim, config.key_dim, config.n_views)
        self.decoders = ViewDecoders(config.embed_dim, input_dim, config.n_views)
        self.transforms = CrossViewTransforms(config.embed_dim, config.n_views)
        self.to(torch.float64)

    def parameter_blocks(self):
        """
        Groups the named parameters by block.

        :return: Block name -> list of (name, parameter).
        :rtype: dict
        """
        blocks = {}
        for name, param in self.named_parameters():
            blocks.setdefault(name.split(".")[0], []).append((name, param))
        return blocks
