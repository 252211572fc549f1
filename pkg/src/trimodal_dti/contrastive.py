"""Cross-modal contrastive alignment losses.

For two modality matrices Za, Zb (one row per entity, same entity order)
the directional loss treats (i, i) as the positive pair and uses both the
cross-modal row (all j) and the intra-modal row (j != i; the self term is
excluded, since exp(1/tau) would dominate the denominator) as negatives:

    L^a = -(1/(2N)) sum_i log[ exp(s_ii_ab/t) /
            ( sum_j exp(s_ij_ab/t) + sum_{j!=i} exp(s_ij_aa/t) ) ]

The symmetric direction swaps a and b; the pairwise loss is their sum, and
the tri-modal loss averages the three pairwise losses over modality pairs
(1,2), (2,3), (1,3). The 1/N factor keeps the scale batch-size independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

DEFAULT_TEMPERATURE = 0.1


@dataclass
class ModalBatch:
    """Three modality matrices (N x D) with identical entity order."""
    z1: torch.Tensor
    z2: torch.Tensor
    z3: torch.Tensor
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        shapes = {tuple(z.shape) for z in (self.z1, self.z2, self.z3)}
        if len(shapes) != 1:
            raise ValueError(f"modality matrices differ in shape: {shapes}")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


def _as_2d(z) -> torch.Tensor:
    t = z if isinstance(z, torch.Tensor) else torch.as_tensor(z, dtype=torch.float64)
    if t.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {tuple(t.shape)}")
    return t


def _normalize_rows(z: torch.Tensor, what: str) -> torch.Tensor:
    norms = z.norm(dim=1)
    if (norms == 0).any():
        raise ValueError(f"{what} contains a zero-norm row")
    return z / norms[:, None]


def cosine_sim(x, y) -> float:
    x = torch.as_tensor(x, dtype=torch.float64).reshape(-1)
    y = torch.as_tensor(y, dtype=torch.float64).reshape(-1)
    nx, ny = x.norm(), y.norm()
    if nx == 0 or ny == 0:
        raise ValueError("cosine similarity undefined for zero-norm input")
    return float((x @ y) / (nx * ny))


def cosine_matrix(za: torch.Tensor, zb: torch.Tensor) -> torch.Tensor:
    """All-pairs cosine similarities between rows of za and zb."""
    a = _normalize_rows(_as_2d(za), "first matrix")
    b = _normalize_rows(_as_2d(zb), "second matrix")
    return a @ b.T


def _directional_loss(sim_cross: torch.Tensor, sim_intra: torch.Tensor,
                      tau: float) -> torch.Tensor:
    n = sim_cross.shape[0]
    cross = sim_cross / tau
    intra = sim_intra / tau
    positives = cross.diagonal()
    # mask the intra-modal self term out of the denominator
    eye = torch.eye(n, dtype=torch.bool, device=cross.device)
    intra_masked = intra.masked_fill(eye, float("-inf"))
    denom = torch.logsumexp(torch.cat([cross, intra_masked], dim=1), dim=1)
    return -(positives - denom).sum() / (2 * n)


def pairwise_contrastive_loss(za, zb, tau: float = DEFAULT_TEMPERATURE) -> torch.Tensor:
    """Symmetric two-modality contrastive loss L^a + L^b."""
    za, zb = _as_2d(za), _as_2d(zb)
    if za.shape != zb.shape:
        raise ValueError(f"shape mismatch: {tuple(za.shape)} vs {tuple(zb.shape)}")
    if tau <= 0:
        raise ValueError("temperature must be positive")
    sim_ab = cosine_matrix(za, zb)
    sim_aa = cosine_matrix(za, za)
    sim_bb = cosine_matrix(zb, zb)
    loss_a = _directional_loss(sim_ab, sim_aa, tau)
    loss_b = _directional_loss(sim_ab.T, sim_bb, tau)
    return loss_a + loss_b


def trimodal_loss(z1, z2, z3, tau: float = DEFAULT_TEMPERATURE) -> torch.Tensor:
    """Mean of the pairwise losses over modality pairs (1,2), (2,3), (1,3)."""
    l12 = pairwise_contrastive_loss(z1, z2, tau)
    l23 = pairwise_contrastive_loss(z2, z3, tau)
    l13 = pairwise_contrastive_loss(z1, z3, tau)
    return (l12 + l23 + l13) / 3


def trimodal_loss_from_batch(batch: ModalBatch) -> torch.Tensor:
    return trimodal_loss(batch.z1, batch.z2, batch.z3, batch.temperature)
