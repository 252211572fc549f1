"""Tests for the cross-modal contrastive losses against a brute-force
enumeration oracle."""

import math

import numpy as np
import pytest
import torch

from trimodal_dti.contrastive import (
    ModalBatch, cosine_matrix, cosine_sim, pairwise_contrastive_loss,
    trimodal_loss, trimodal_loss_from_batch,
)


# ---------------------------------------------------------------------------
# brute-force oracle: no vectorization, explicit sums over (i, j)
# ---------------------------------------------------------------------------

def oracle_cos(x, y):
    return float(np.dot(x, y) / (np.linalg.norm(x) * np.linalg.norm(y)))


def oracle_pairwise(za, zb, tau):
    n = len(za)
    total = 0.0
    for first, second in ((za, zb), (zb, za)):
        for i in range(n):
            numer = math.exp(oracle_cos(first[i], second[i]) / tau)
            denom = 0.0
            for j in range(n):
                denom += math.exp(oracle_cos(first[i], second[j]) / tau)
            for j in range(n):
                if j != i:
                    denom += math.exp(oracle_cos(first[i], first[j]) / tau)
            total += -math.log(numer / denom) / (2 * n)
    return total


def oracle_trimodal(z1, z2, z3, tau):
    return (oracle_pairwise(z1, z2, tau) + oracle_pairwise(z2, z3, tau)
            + oracle_pairwise(z1, z3, tau)) / 3


# ---------------------------------------------------------------------------
# cosine similarity
# ---------------------------------------------------------------------------

def test_cosine_orthogonal_is_zero():
    assert cosine_sim([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)


def test_cosine_positive_scaling_is_one():
    assert cosine_sim([1.0, 2.0], [2.0, 4.0]) == pytest.approx(1.0)


def test_cosine_antipodal_is_minus_one():
    assert cosine_sim([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(-1.0)


def test_cosine_zero_norm_rejected():
    with pytest.raises(ValueError):
        cosine_sim([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        cosine_matrix(torch.zeros(2, 3), torch.ones(2, 3))


# ---------------------------------------------------------------------------
# pairwise loss
# ---------------------------------------------------------------------------

def test_single_sample_loss_is_zero():
    za = torch.tensor([[0.3, -0.7]], dtype=torch.float64)
    zb = torch.tensor([[1.1, 0.4]], dtype=torch.float64)
    assert float(pairwise_contrastive_loss(za, zb, tau=0.5)) == pytest.approx(0.0, abs=1e-12)


def test_identity_rows_frozen_value():
    # Za = Zb = [(1,0), (0,1)], tau=1: each row contributes log(1 + 2/e),
    # computed by hand before implementation.
    z = torch.eye(2, dtype=torch.float64)
    expected = math.log(1.0 + 2.0 / math.e)  # 0.5514447139...
    value = float(pairwise_contrastive_loss(z, z, tau=1.0))
    assert value == pytest.approx(0.5514447139, abs=1e-9)
    assert value == pytest.approx(expected, abs=1e-12)


def test_pairwise_matches_bruteforce_on_random_batches():
    rng = np.random.default_rng(0)
    for n in (2, 3, 4, 6):
        za = rng.normal(size=(n, 5))
        zb = rng.normal(size=(n, 5))
        for tau in (0.1, 0.5, 1.0):
            got = float(pairwise_contrastive_loss(
                torch.as_tensor(za), torch.as_tensor(zb), tau))
            assert got == pytest.approx(oracle_pairwise(za, zb, tau), abs=1e-6)


def test_pairwise_is_symmetric_in_arguments():
    rng = np.random.default_rng(1)
    za = torch.as_tensor(rng.normal(size=(4, 6)))
    zb = torch.as_tensor(rng.normal(size=(4, 6)))
    ab = float(pairwise_contrastive_loss(za, zb, tau=0.2))
    ba = float(pairwise_contrastive_loss(zb, za, tau=0.2))
    assert ab == pytest.approx(ba, abs=1e-10)


def test_row_rescaling_leaves_loss_unchanged():
    rng = np.random.default_rng(2)
    za = rng.normal(size=(4, 5))
    zb = rng.normal(size=(4, 5))
    base = float(pairwise_contrastive_loss(torch.as_tensor(za),
                                           torch.as_tensor(zb), tau=0.3))
    scales_a = rng.uniform(0.1, 9.0, size=(4, 1))
    scales_b = rng.uniform(0.1, 9.0, size=(4, 1))
    scaled = float(pairwise_contrastive_loss(torch.as_tensor(za * scales_a),
                                             torch.as_tensor(zb * scales_b), tau=0.3))
    assert scaled == pytest.approx(base, abs=1e-6)


def test_common_row_permutation_leaves_loss_unchanged():
    rng = np.random.default_rng(3)
    z1, z2, z3 = (rng.normal(size=(5, 4)) for _ in range(3))
    perm = rng.permutation(5)
    base = float(trimodal_loss(torch.as_tensor(z1), torch.as_tensor(z2),
                               torch.as_tensor(z3), tau=0.4))
    permuted = float(trimodal_loss(torch.as_tensor(z1[perm]), torch.as_tensor(z2[perm]),
                                   torch.as_tensor(z3[perm]), tau=0.4))
    assert permuted == pytest.approx(base, abs=1e-10)


def test_loss_decreases_as_positive_similarity_rises():
    # Za rows live in a D > N space so one aligned similarity can vary while
    # every other similarity stays exactly zero.
    n, d = 3, 4
    zb = torch.eye(n, d, dtype=torch.float64)
    previous = None
    for theta in (0.9, 0.6, 0.3, 0.0):  # s_11 = cos(theta) increases
        za = torch.eye(n, d, dtype=torch.float64)
        za[0, 0] = math.cos(theta)
        za[0, 3] = math.sin(theta)
        value = float(pairwise_contrastive_loss(za, zb, tau=0.5))
        if previous is not None:
            assert value < previous
        previous = value


def test_zero_row_rejected():
    za = torch.zeros(2, 3, dtype=torch.float64)
    za[0, 0] = 1.0
    with pytest.raises(ValueError):
        pairwise_contrastive_loss(za, torch.ones(2, 3), tau=0.5)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        pairwise_contrastive_loss(torch.ones(2, 3), torch.ones(3, 3), tau=0.5)


# ---------------------------------------------------------------------------
# tri-modal loss
# ---------------------------------------------------------------------------

def test_trimodal_collapses_when_all_modalities_equal():
    rng = np.random.default_rng(4)
    z = torch.as_tensor(rng.normal(size=(4, 5)))
    tri = float(trimodal_loss(z, z, z, tau=0.7))
    assert tri == pytest.approx(float(pairwise_contrastive_loss(z, z, tau=0.7)),
                                abs=1e-10)


def test_trimodal_is_mean_of_pairwise():
    rng = np.random.default_rng(5)
    z1, z2, z3 = (torch.as_tensor(rng.normal(size=(4, 6))) for _ in range(3))
    tri = float(trimodal_loss(z1, z2, z3, tau=0.25))
    parts = (float(pairwise_contrastive_loss(z1, z2, 0.25))
             + float(pairwise_contrastive_loss(z2, z3, 0.25))
             + float(pairwise_contrastive_loss(z1, z3, 0.25)))
    assert tri == pytest.approx(parts / 3, abs=1e-10)


def test_trimodal_matches_bruteforce_n3():
    rng = np.random.default_rng(6)
    z1, z2, z3 = (rng.normal(size=(3, 4)) for _ in range(3))
    got = float(trimodal_loss(torch.as_tensor(z1), torch.as_tensor(z2),
                              torch.as_tensor(z3), tau=0.5))
    assert got == pytest.approx(oracle_trimodal(z1, z2, z3, 0.5), abs=1e-6)


def test_modal_batch_validation_and_evaluation():
    rng = np.random.default_rng(7)
    z = torch.as_tensor(rng.normal(size=(3, 4)))
    batch = ModalBatch(z1=z, z2=z.clone(), z3=z.clone(), temperature=0.5)
    assert float(trimodal_loss_from_batch(batch)) == pytest.approx(
        float(trimodal_loss(z, z, z, 0.5)), abs=1e-12)
    with pytest.raises(ValueError):
        ModalBatch(z1=z, z2=z, z3=torch.zeros(2, 4), temperature=0.5)
    with pytest.raises(ValueError):
        ModalBatch(z1=z, z2=z, z3=z, temperature=0.0)


def test_trimodal_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    base = rng.normal(size=(3, 4))
    z1 = torch.tensor(base, dtype=torch.float64, requires_grad=True)
    z2 = torch.as_tensor(rng.normal(size=(3, 4)))
    z3 = torch.as_tensor(rng.normal(size=(3, 4)))

    loss = trimodal_loss(z1, z2, z3, tau=0.5)
    loss.backward()

    eps = 1e-6
    for idx in [(0, 0), (1, 2), (2, 3), (0, 3)]:
        perturbed = base.copy()
        perturbed[idx] += eps
        up = oracle_trimodal(perturbed, z2.numpy(), z3.numpy(), 0.5)
        perturbed[idx] -= 2 * eps
        down = oracle_trimodal(perturbed, z2.numpy(), z3.numpy(), 0.5)
        numeric = (up - down) / (2 * eps)
        analytic = z1.grad[idx].item()
        assert abs(numeric - analytic) <= 1e-7 + 1e-4 * max(abs(numeric), abs(analytic))
