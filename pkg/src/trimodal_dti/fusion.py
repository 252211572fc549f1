"""Modality fusion, interaction classifier, and training losses.

The six modality embeddings are concatenated in a fixed block order —
(drug seq, drug 2D, drug 3D, protein seq, protein pockets, protein
contacts) — and a three-layer MLP maps the joint vector to an interaction
probability. Binary cross-entropy (with probability clamping) plus the two
weighted contrastive terms form the total training loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

PROB_EPS = 1e-7

# fixed block order of the joint feature vector
BLOCK_ORDER = ("drug_seq", "drug_2d", "drug_3d",
               "protein_seq", "protein_pockets", "protein_contacts")


def fuse(d1: torch.Tensor, d2: torch.Tensor, d3: torch.Tensor,
         t1: torch.Tensor, t2: torch.Tensor, t3: torch.Tensor) -> torch.Tensor:
    """Concatenate the six modality embeddings into the joint vector F.

    Accepts single vectors (D,) or batches (N, D); all six inputs must share
    one dimension D.
    """
    parts = (d1, d2, d3, t1, t2, t3)
    dims = {p.shape[-1] for p in parts}
    if len(dims) != 1:
        raise ValueError(f"modality dimensions differ: {sorted(dims)}")
    return torch.cat(parts, dim=-1)


def split_blocks(joint: torch.Tensor, dim: int) -> dict[str, torch.Tensor]:
    """Recover the six D-dim blocks of a joint vector."""
    if joint.shape[-1] != 6 * dim:
        raise ValueError(f"joint vector has {joint.shape[-1]} dims, expected {6 * dim}")
    return {name: joint[..., k * dim:(k + 1) * dim]
            for k, name in enumerate(BLOCK_ORDER)}


class InteractionClassifier(nn.Module):
    """Three fully connected layers over the joint vector; sigmoid output."""

    def __init__(self, modal_dim: int = 128, hidden1: int = 512,
                 hidden2: int = 128, dropout: float = 0.2):
        super().__init__()
        self.modal_dim = modal_dim
        self.net = nn.Sequential(
            nn.Linear(6 * modal_dim, hidden1),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(hidden1, hidden2),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(hidden2, 1),
        )

    def logits(self, joint: torch.Tensor) -> torch.Tensor:
        return self.net(joint).squeeze(-1)

    def forward(self, joint: torch.Tensor) -> torch.Tensor:
        prob = torch.sigmoid(self.logits(joint))
        return prob.clamp(PROB_EPS, 1.0 - PROB_EPS)


def bce_loss(labels: torch.Tensor, probs: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy with probabilities clamped to
    [eps, 1 - eps], eps = 1e-7."""
    labels = torch.as_tensor(labels, dtype=probs.dtype if isinstance(probs, torch.Tensor)
                             else torch.float64)
    probs = torch.as_tensor(probs, dtype=labels.dtype)
    if labels.shape != probs.shape:
        raise ValueError(f"label/probability shape mismatch: "
                         f"{tuple(labels.shape)} vs {tuple(probs.shape)}")
    p = probs.clamp(PROB_EPS, 1.0 - PROB_EPS)
    return -(labels * p.log() + (1.0 - labels) * (1.0 - p).log()).mean()


@dataclass
class LossWeights:
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.1

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.alpha == self.beta == self.gamma == 0:
            raise ValueError("at least one loss weight must be positive")


def total_loss(classification, contrastive_drug, contrastive_protein,
               weights: LossWeights):
    """Weighted sum: alpha * classification + beta * drug contrastive +
    gamma * protein contrastive."""
    return (weights.alpha * classification
            + weights.beta * contrastive_drug
            + weights.gamma * contrastive_protein)
