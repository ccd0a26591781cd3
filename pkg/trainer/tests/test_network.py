import numpy as np
import torch
import torch.nn.functional as F

from organtrain import PointClassifierNet, weight_matrices


def test_output_shape_and_dtype():
    net = PointClassifierNet(20, 8, 2, 5)
    x = torch.randn(7, 20)
    out = net(x)
    assert out.shape == (7, 5)
    assert out.dtype == torch.float32


def test_forward_matches_reference_computation():
    torch.manual_seed(0)
    net = PointClassifierNet(10, 6, 2, 3)
    net.eval()
    x = torch.randn(4, 10)

    h = F.silu(net.proj(x))
    for block in net.blocks:
        t = F.silu(block.ln1(block.fc1(h)))
        u = block.ln2(block.fc2(t))
        h = h + u
    expected = net.head(h)
    torch.testing.assert_close(net(x), expected)


def test_layernorm_matches_manual_standardization():
    torch.manual_seed(1)
    net = PointClassifierNet(10, 6, 1, 2)
    ln = net.blocks[0].ln1
    v = torch.randn(5, 6)
    manual = (v - v.mean(dim=-1, keepdim=True)) / torch.sqrt(
        v.var(dim=-1, unbiased=False, keepdim=True) + 1e-5)
    manual = manual * ln.weight + ln.bias
    torch.testing.assert_close(ln(v), manual)


def test_dropout_active_only_in_training_mode():
    torch.manual_seed(2)
    net = PointClassifierNet(16, 32, 2, 3, dropout=0.5)
    x = torch.randn(8, 16)

    net.eval()
    torch.testing.assert_close(net(x), net(x))

    net.train()
    torch.manual_seed(3)
    a = net(x)
    torch.manual_seed(4)
    b = net(x)
    assert not torch.allclose(a, b)


def test_zero_dropout_makes_train_and_eval_agree():
    torch.manual_seed(5)
    net = PointClassifierNet(12, 8, 3, 4, dropout=0.0)
    x = torch.randn(6, 12)
    net.train()
    train_out = net(x)
    net.eval()
    eval_out = net(x)
    torch.testing.assert_close(train_out, eval_out)


def test_weight_matrices_yields_only_2d_linear_weights():
    net = PointClassifierNet(10, 8, 3, 4)
    mats = list(weight_matrices(net))
    # projection + 2 per block + head
    assert len(mats) == 1 + 2 * 3 + 1
    assert all(m.ndim == 2 for m in mats)
    total_2d = sum(1 for p in net.parameters() if p.ndim == 2)
    assert len(mats) == total_2d
    # norm scales and all biases are 1-D, hence excluded
    ids = {id(m) for m in mats}
    for block in net.blocks:
        assert id(block.ln1.weight) not in ids
        assert id(block.fc1.bias) not in ids


def test_residual_path_keeps_input_contribution():
    # With zeroed block weights each block is the identity, so the logits
    # reduce to head(silu(proj(x))).
    torch.manual_seed(6)
    net = PointClassifierNet(10, 8, 2, 3)
    with torch.no_grad():
        for block in net.blocks:
            for p in block.parameters():
                p.zero_()
    net.eval()
    x = torch.randn(5, 10)
    expected = net.head(F.silu(net.proj(x)))
    torch.testing.assert_close(net(x), expected)


def test_single_vector_and_batch_agree():
    torch.manual_seed(7)
    net = PointClassifierNet(10, 8, 2, 3)
    net.eval()
    x = torch.randn(9, 10)
    batched = net(x)
    singles = torch.stack([net(x[i:i + 1])[0] for i in range(9)])
    np.testing.assert_allclose(batched.detach().numpy(),
                               singles.detach().numpy(), atol=1e-6)
