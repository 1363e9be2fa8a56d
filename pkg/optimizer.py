"""
This module implements the Adam update used by the trainer.

The update is written out so that its state can be stored in a checkpoint
and restored with ``AdamState.from_state_dict``; a restored run continues
bit for bit. ``cosine_lr`` gives the per-epoch learning rate of the cosine
schedule.
"""
import math
from dataclasses import dataclass, field

import torch

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    """
    The moment estimates of every parameter and the step count.

    :param step: Number of updates applied so far.
    :type step: int
    :param exp_avg: First-moment estimates, one per parameter.
    :type exp_avg: list[torch.Tensor]
    :param exp_avg_sq: Second-moment estimates, one per parameter.
    :type exp_avg_sq: list[torch.Tensor]
    """
    step: int = 0
    exp_avg: list = field(default_factory=list)
    exp_avg_sq: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params):
        """
        Creates zero moments shaped like the given parameters.

        :rtype: AdamState
        """
        return cls(0, [torch.zeros_like(p) for p in params], [torch.zeros_like(p) for p in params])

    def state_dict(self):
        """
        :rtype: dict
        """
        return {"step": self.step, "exp_avg": self.exp_avg, "exp_avg_sq": self.exp_avg_sq}

    @classmethod
    def from_state_dict(cls, data):
        """
        Rebuilds a state written by ``state_dict``; the moments are cloned.

        :rtype: AdamState
        """
        return cls(int(data["step"]), [m.clone() for m in data["exp_avg"]], [v.clone() for v in data["exp_avg_sq"]])


def cosine_lr(step, total, base_lr):
    """
    Learning rate of step ``step`` out of ``total`` under half-cosine decay.

    Starts at ``base_lr`` and decays towards zero at ``total``.

    :rtype: float
    """
    s = step / max(1, total)
    return 0.5 * base_lr * (1 + math.cos(math.pi * s))


@torch.no_grad()
def adam_step(params, grads, state: AdamState, lr: float):
    """
    Applies one bias-corrected Adam update in place.

    Parameters whose gradient is None are left untouched, moments included.

    :param params: The parameters to update.
    :type params: list[torch.Tensor]
    :param grads: Their gradients, or None.
    :type grads: list[torch.Tensor or None]
    :param state: The optimizer state; created on first use when empty.
    :type state: AdamState
    :param lr: The learning rate.
    :type lr: float
    :return: The updated parameters and state.
    :rtype: tuple[list[torch.Tensor], AdamState]
    """
    params = list(params)
    if not state.exp_avg:
        state = AdamState.for_params(params)
    state.step += 1
    bias1 = 1.0 - BETA1 ** state.step
    bias2 = 1.0 - BETA2 ** state.step
    for param, grad, m, v in zip(params, grads, state.exp_avg, state.exp_avg_sq):
        if grad is None:
            continue
        m.mul_(BETA1).add_(grad, alpha=1.0 - BETA1)
        v.mul_(BETA2).addcmul_(grad, grad, value=1.0 - BETA2)
        denom = (v / bias2).sqrt().add_(EPS)
        param.addcdiv_(m, denom, value=-lr / bias1)
    return params, state
