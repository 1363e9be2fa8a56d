import pytest
import torch

from optimizer import BETA1, BETA2, EPS, AdamState, adam_step, cosine_lr


def test_matches_torch_adam():
    torch.manual_seed(0)
    ours = [torch.randn(3, 2, dtype=torch.float64), torch.randn(4, dtype=torch.float64)]
    reference = [p.clone().requires_grad_(True) for p in ours]
    optimizer = torch.optim.Adam(reference, lr=1e-2, betas=(BETA1, BETA2), eps=EPS)
    state = AdamState()
    for _ in range(5):
        grads = [torch.randn_like(p) for p in ours]
        _, state = adam_step(ours, grads, state, 1e-2)
        for p, g in zip(reference, grads):
            p.grad = g.clone()
        optimizer.step()
    for mine, theirs in zip(ours, reference):
        torch.testing.assert_close(mine, theirs.detach(), atol=1e-12, rtol=0)
    assert state.step == 5


def test_first_step_closed_form():
    param = torch.tensor([1.0, -2.0, 0.5], dtype=torch.float64)
    grad = torch.tensor([0.3, -0.1, 2.0], dtype=torch.float64)
    start = param.clone()
    adam_step([param], [grad], AdamState(), 0.1)
    expected = start - 0.1 * grad / (grad.abs() + EPS)
    torch.testing.assert_close(param, expected, atol=1e-9, rtol=0)


def test_zero_gradient_leaves_parameters_and_decays_moments():
    param = torch.tensor([1.0, 2.0], dtype=torch.float64)
    state = AdamState.for_params([param])
    state.exp_avg[0].fill_(0.5)
    state.exp_avg_sq[0].fill_(0.25)
    state.step = 3
    start = param.clone()
    adam_step([param], [torch.zeros(2, dtype=torch.float64)], state, 0.0)
    torch.testing.assert_close(param, start)
    torch.testing.assert_close(state.exp_avg[0], torch.full((2,), 0.5 * BETA1, dtype=torch.float64))
    torch.testing.assert_close(state.exp_avg_sq[0], torch.full((2,), 0.25 * BETA2, dtype=torch.float64))


def test_missing_gradient_is_skipped():
    params = [torch.ones(2, dtype=torch.float64), torch.ones(2, dtype=torch.float64)]
    _, state = adam_step(params, [None, torch.ones(2, dtype=torch.float64)], AdamState(), 0.1)
    torch.testing.assert_close(params[0], torch.ones(2, dtype=torch.float64))
    assert bool((params[1] < 1).all())
    assert torch.count_nonzero(state.exp_avg[0]) == 0


def test_two_steps_reduce_a_quadratic():
    x = torch.tensor([3.0], dtype=torch.float64)
    state = AdamState()
    losses = [float(x ** 2)]
    for _ in range(2):
        _, state = adam_step([x], [2 * x], state, 0.5)
        losses.append(float(x ** 2))
    assert losses[2] < losses[1] < losses[0]


def test_state_dict_holds_the_moments():
    param = torch.zeros(2, dtype=torch.float64)
    _, state = adam_step([param], [torch.ones(2, dtype=torch.float64)], AdamState(), 0.1)
    saved = state.state_dict()
    assert saved["step"] == 1
    torch.testing.assert_close(saved["exp_avg"][0], torch.full((2,), 1 - BETA1, dtype=torch.float64))


def test_restored_state_continues_bit_for_bit(tmp_path):
    torch.manual_seed(1)
    start = [torch.randn(4, 3, dtype=torch.float64)]
    grads = [[torch.randn(4, 3, dtype=torch.float64)] for _ in range(6)]

    straight = [start[0].clone()]
    state = AdamState()
    for g in grads:
        _, state = adam_step(straight, g, state, 1e-2)

    resumed = [start[0].clone()]
    state = AdamState()
    for g in grads[:3]:
        _, state = adam_step(resumed, g, state, 1e-2)
    path = tmp_path / "adam.pt"
    torch.save(state.state_dict(), path)
    state = AdamState.from_state_dict(torch.load(path, weights_only=True))
    for g in grads[3:]:
        _, state = adam_step(resumed, g, state, 1e-2)

    assert state.step == 6
    assert torch.equal(resumed[0], straight[0])


def test_cosine_lr_endpoints():
    assert cosine_lr(0, 10, 0.1) == 0.1
    assert cosine_lr(5, 10, 0.1) == pytest.approx(0.05)
    assert cosine_lr(10, 10, 0.1) == pytest.approx(0.0, abs=1e-15)
