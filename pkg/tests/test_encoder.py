import numpy as np
import pytest
import torch

from config import ExperimentConfig
from encoder import ViewBundle, ViewEncoders, encode_views, fuse_views
from errors import ArgumentError, ShapeError
from model import EMTCModel


def make_encoders(D=2, d=4, widths=(3, 5), V=2):
    config = ExperimentConfig(n_views=V, embed_dim=d, kernel_widths=list(widths))
    return ViewEncoders(D, d, [config.kernel_width(v) for v in range(V)]).to(torch.float64)


def conv_oracle(X, weight, bias):
    """Nested-loop depthwise convolution with zero padding, X of shape (T, D)."""
    T, D = X.shape
    k = weight.shape[-1]
    half = k // 2
    out = np.zeros((T, D))
    for t in range(T):
        for c in range(D):
            total = bias[c]
            for j in range(k):
                s = t + j - half
                if 0 <= s < T:
                    total += weight[c, 0, j] * X[s, c]
            out[t, c] = total
    return out


def test_zero_input_with_zero_biases_gives_zero_views():
    encoders = make_encoders()
    with torch.no_grad():
        for view in encoders.views:
            view.conv.bias.zero_()
            view.mix.bias.zero_()
    views = encode_views(torch.zeros(3, 8, 2, dtype=torch.float64), encoders)
    assert all(torch.count_nonzero(v) == 0 for v in views)


def test_degenerate_encoder_is_elementwise_tanh():
    encoders = make_encoders(D=3, d=3, widths=(1,), V=1)
    view = encoders.views[0]
    with torch.no_grad():
        view.conv.weight.fill_(1.0)
        view.conv.bias.zero_()
        view.mix.weight.copy_(torch.eye(3))
        view.mix.bias.zero_()
    X = torch.randn(2, 5, 3, dtype=torch.float64)
    torch.testing.assert_close(encode_views(X, encoders)[0], torch.tanh(X))


def test_encoder_matches_loop_oracle():
    torch.manual_seed(11)
    encoders = make_encoders(D=2, d=4, widths=(3, 5), V=2)
    X = torch.randn(2, 8, 2, dtype=torch.float64)
    views = encode_views(X, encoders)
    for v, view in enumerate(encoders.views):
        weight = view.conv.weight.detach().numpy()
        bias = view.conv.bias.detach().numpy()
        W = view.mix.weight.detach().numpy()
        b = view.mix.bias.detach().numpy()
        for n in range(2):
            filtered = conv_oracle(X[n].numpy(), weight, bias)
            expected = np.tanh(filtered @ W.T + b)
            np.testing.assert_allclose(views[v][n].detach().numpy(), expected, atol=1e-6)


def test_views_have_their_own_kernel_widths():
    encoders = make_encoders(widths=(3, 5, 9), V=4)
    assert [view.kernel_width for view in encoders.views] == [3, 5, 9, 3]
    assert encoders.views[0].conv.weight is not encoders.views[3].conv.weight


def test_model_encoders_follow_the_configured_widths():
    config = ExperimentConfig(n_views=3, embed_dim=4, key_dim=2, kernel_widths=[5, 7])
    model = EMTCModel(2, config)
    assert [view.kernel_width for view in model.encoders.views] == [config.kernel_width(v) for v in range(3)]
    assert [view.conv.weight.shape[-1] for view in model.encoders.views] == [5, 7, 5]


def test_view_independence():
    encoders = make_encoders(V=3, widths=(3, 5, 9))
    X = torch.randn(2, 8, 2, dtype=torch.float64)
    before = [v.detach().clone() for v in encode_views(X, encoders)]
    with torch.no_grad():
        encoders.views[1].mix.weight.add_(0.5)
    after = encode_views(X, encoders)
    torch.testing.assert_close(after[0], before[0], rtol=0, atol=0)
    torch.testing.assert_close(after[2], before[2], rtol=0, atol=0)
    assert not torch.allclose(after[1], before[1])


def test_sample_permutation_commutes():
    encoders = make_encoders()
    X = torch.randn(4, 8, 2, dtype=torch.float64)
    perm = torch.tensor([2, 0, 3, 1])
    fused = ViewBundle.from_views(encode_views(X, encoders)).fused
    permuted = ViewBundle.from_views(encode_views(X[perm], encoders)).fused
    torch.testing.assert_close(permuted, fused[perm])


def test_wrong_width_rejected():
    with pytest.raises(ShapeError):
        make_encoders(D=2).encode_view(0, torch.zeros(1, 4, 3, dtype=torch.float64))


def test_fuse_single_view_single_step_is_identity():
    F = torch.randn(3, 1, 4, dtype=torch.float64)
    torch.testing.assert_close(fuse_views([F]), F[:, 0, :])


def test_fuse_opposite_views_is_zero():
    F = torch.randn(3, 5, 4, dtype=torch.float64)
    assert torch.count_nonzero(fuse_views([F, -F])) == 0


def test_fuse_matches_summation_oracle():
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal((2, 2, 3, 4))
    fused = fuse_views([torch.from_numpy(a), torch.from_numpy(b)]).numpy()
    expected = np.zeros((2, 4))
    for n in range(2):
        for t in range(3):
            expected[n] += (a[n, t] + b[n, t]) / (2 * 3)
    np.testing.assert_allclose(fused, expected, atol=1e-9)


def test_fuse_gradient_spreads_evenly():
    views = [torch.randn(2, 4, 3, dtype=torch.float64, requires_grad=True) for _ in range(3)]
    fuse_views(views).sum().backward()
    for view in views:
        torch.testing.assert_close(view.grad, torch.full_like(view, 1.0 / (3 * 4)))


def test_fuse_rejects_empty_and_mismatched():
    with pytest.raises(ArgumentError):
        fuse_views([])
    with pytest.raises(ShapeError):
        fuse_views([torch.zeros(1, 2, 3), torch.zeros(1, 3, 3)])
