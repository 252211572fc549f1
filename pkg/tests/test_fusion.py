"""Tests for modality fusion, the MLP classifier, and the loss functions."""

import math

import numpy as np
import pytest
import torch

from trimodal_dti.fusion import (
    BLOCK_ORDER, InteractionClassifier, LossWeights, bce_loss, fuse,
    split_blocks, total_loss,
)


def test_fuse_concatenates_in_declared_order():
    vecs = [torch.full((2,), float(k)) for k in range(6)]
    joint = fuse(*vecs)
    assert joint.shape == (12,)
    assert joint.tolist() == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5]


def test_fuse_zero_inputs_give_zero_vector():
    joint = fuse(*[torch.zeros(3) for _ in range(6)])
    assert torch.equal(joint, torch.zeros(18))


def test_fuse_block_roundtrip():
    rng = np.random.default_rng(0)
    vecs = [torch.as_tensor(rng.normal(size=4)) for _ in range(6)]
    blocks = split_blocks(fuse(*vecs), dim=4)
    for name, vec in zip(BLOCK_ORDER, vecs):
        assert torch.equal(blocks[name], vec)


def test_fuse_rejects_mismatched_dims():
    vecs = [torch.zeros(3)] * 5 + [torch.zeros(4)]
    with pytest.raises(ValueError):
        fuse(*vecs)


def test_fuse_supports_batches():
    vecs = [torch.ones(5, 2) * k for k in range(6)]
    joint = fuse(*vecs)
    assert joint.shape == (5, 12)


def test_classifier_zero_parameters_give_half():
    clf = InteractionClassifier(modal_dim=2, hidden1=4, hidden2=3, dropout=0.0)
    with torch.no_grad():
        for p in clf.parameters():
            p.zero_()
    prob = clf(torch.randn(3, 12))
    assert torch.allclose(prob, torch.full((3,), 0.5))


def test_classifier_large_output_bias_saturates_high():
    clf = InteractionClassifier(modal_dim=2, hidden1=4, hidden2=3, dropout=0.0)
    with torch.no_grad():
        for p in clf.parameters():
            p.zero_()
        clf.net[-1].bias.fill_(20.0)
    prob = clf(torch.randn(2, 12))
    assert (prob > 0.999).all()
    assert (prob < 1.0).all()  # clamped away from exactly 1


def test_classifier_matches_layer_by_layer_oracle():
    torch.manual_seed(0)
    clf = InteractionClassifier(modal_dim=2, hidden1=5, hidden2=4, dropout=0.0
                                ).double().eval()
    x = torch.randn(3, 12, dtype=torch.float64)

    h = x.numpy()
    linears = [m for m in clf.net if isinstance(m, torch.nn.Linear)]
    for k, lin in enumerate(linears):
        h = h @ lin.weight.detach().numpy().T + lin.bias.detach().numpy()
        if k < len(linears) - 1:
            h = np.maximum(h, 0.0)
    expected = 1.0 / (1.0 + np.exp(-h.squeeze(-1)))
    assert np.allclose(clf(x).detach().numpy(), expected, atol=1e-6)


def test_classifier_output_in_open_interval():
    torch.manual_seed(1)
    clf = InteractionClassifier(modal_dim=2, hidden1=4, hidden2=3, dropout=0.0)
    x = torch.randn(50, 12) * 100
    prob = clf(x)
    assert (prob > 0).all() and (prob < 1).all()


def test_bce_confident_correct_is_near_zero():
    y = torch.tensor([1.0])
    p = torch.tensor([1.0 - 1e-7])
    assert float(bce_loss(y, p)) == pytest.approx(0.0, abs=1e-6)


def test_bce_half_probability_is_ln2():
    assert float(bce_loss(torch.tensor([1.0]), torch.tensor([0.5]))) == pytest.approx(
        math.log(2.0), rel=1e-6)


def test_bce_matches_elementwise_oracle():
    y = np.array([1.0, 0.0, 1.0])
    p = np.array([0.8, 0.3, 0.6])
    expected = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
    got = float(bce_loss(torch.as_tensor(y), torch.as_tensor(p)))
    assert got == pytest.approx(expected, abs=1e-9)


def test_bce_clamps_extreme_probabilities():
    val = float(bce_loss(torch.tensor([1.0]), torch.tensor([0.0])))
    assert val == pytest.approx(-math.log(1e-7), rel=1e-5)
    assert math.isfinite(val)


def test_bce_length_mismatch_rejected():
    with pytest.raises(ValueError):
        bce_loss(torch.ones(3), torch.ones(2) * 0.5)


def test_bce_nonnegative():
    rng = np.random.default_rng(2)
    for _ in range(10):
        y = torch.as_tensor(rng.integers(0, 2, size=5).astype(float))
        p = torch.as_tensor(rng.uniform(0.01, 0.99, size=5))
        assert float(bce_loss(y, p)) >= 0.0


def test_total_loss_classifier_only_when_contrastive_weights_zero():
    w = LossWeights(alpha=2.0, beta=0.0, gamma=0.0)
    assert total_loss(0.7, 123.0, 456.0, w) == pytest.approx(1.4)


def test_total_loss_arithmetic():
    w = LossWeights(alpha=1.0, beta=1.0, gamma=1.0)
    assert total_loss(0.5, 0.2, 0.3, w) == pytest.approx(1.0)


def test_total_loss_homogeneous_in_weights():
    w1 = LossWeights(alpha=1.0, beta=0.1, gamma=0.2)
    w2 = LossWeights(alpha=2.0, beta=0.2, gamma=0.4)
    a = total_loss(0.9, 0.8, 0.7, w1)
    b = total_loss(0.9, 0.8, 0.7, w2)
    assert b == pytest.approx(2 * a)


def test_total_loss_linear_in_each_component():
    w = LossWeights(alpha=1.0, beta=0.5, gamma=0.25)
    base = total_loss(1.0, 1.0, 1.0, w)
    assert total_loss(2.0, 1.0, 1.0, w) - base == pytest.approx(w.alpha)
    assert total_loss(1.0, 2.0, 1.0, w) - base == pytest.approx(w.beta)
    assert total_loss(1.0, 1.0, 2.0, w) - base == pytest.approx(w.gamma)


def test_loss_weights_validation():
    with pytest.raises(ValueError):
        LossWeights(alpha=-0.1)
    with pytest.raises(ValueError):
        LossWeights(alpha=0.0, beta=0.0, gamma=0.0)


def test_classifier_gradients_flow():
    torch.manual_seed(3)
    clf = InteractionClassifier(modal_dim=2, hidden1=4, hidden2=3, dropout=0.0).double()
    x = torch.randn(4, 12, dtype=torch.float64)
    y = torch.tensor([1.0, 0.0, 1.0, 0.0], dtype=torch.float64)
    loss = bce_loss(y, clf(x))
    loss.backward()
    grads = [p.grad.abs().sum().item() for p in clf.parameters()]
    assert sum(grads) > 0
