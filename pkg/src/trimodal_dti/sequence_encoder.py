"""Transformer encoder over embedded token sequences.

Produces the sequence-modality embedding for a drug or protein: content and
position embeddings are summed, passed through a pre-norm multi-head
self-attention stack with PAD masking, mean-pooled over real tokens, and
projected to the shared modality dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .tokenizer import PAD_ID


@dataclass
class TransformerParams:
    num_layers: int = 2
    num_heads: int = 4
    model_dim: int = 128
    feedforward_dim: int = 512
    dropout: float = 0.2

    def __post_init__(self):
        if self.model_dim % self.num_heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} not divisible by num_heads {self.num_heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.num_layers < 1:
            raise ValueError("need at least one layer")


class EncoderBlock(nn.Module):
    """Pre-norm self-attention + feedforward block with residuals."""

    def __init__(self, params: TransformerParams):
        super().__init__()
        d = params.model_dim
        self.norm1 = nn.LayerNorm(d)
        self.attn = nn.MultiheadAttention(
            d, params.num_heads, dropout=params.dropout, batch_first=True)
        self.norm2 = nn.LayerNorm(d)
        self.ff = nn.Sequential(
            nn.Linear(d, params.feedforward_dim),
            nn.ReLU(),
            nn.Dropout(params.dropout),
            nn.Linear(params.feedforward_dim, d),
        )
        self.dropout = nn.Dropout(params.dropout)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        h = self.norm1(x)
        attn_out, _ = self.attn(h, h, h, key_padding_mask=pad_mask,
                                need_weights=False)
        x = x + self.dropout(attn_out)
        x = x + self.dropout(self.ff(self.norm2(x)))
        return x


class TransformerEncoder(nn.Module):
    """Stack of pre-norm encoder blocks. PAD positions are never attended to."""

    def __init__(self, params: TransformerParams):
        super().__init__()
        self.params = params
        self.blocks = nn.ModuleList(EncoderBlock(params) for _ in range(params.num_layers))
        self.final_norm = nn.LayerNorm(params.model_dim)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        if pad_mask.all(dim=-1).any():
            raise ValueError("every sequence needs at least one real token")
        for block in self.blocks:
            x = block(x, pad_mask)
        return self.final_norm(x)


def transformer_encode(embedded: torch.Tensor, pad_mask: torch.Tensor,
                       encoder: TransformerEncoder) -> torch.Tensor:
    """Encode a single (l, dim) sequence; ``pad_mask`` is True at PAD rows."""
    return encoder(embedded.unsqueeze(0), pad_mask.unsqueeze(0)).squeeze(0)


def masked_mean(encoded: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
    """Mean over unmasked positions. Accepts (l, d) or (B, l, d)."""
    keep = (~pad_mask).unsqueeze(-1).to(encoded.dtype)
    count = keep.sum(dim=-2)
    if (count == 0).any():
        raise ValueError("cannot pool a fully masked sequence")
    return (encoded * keep).sum(dim=-2) / count


class SequencePooler(nn.Module):
    """Masked mean over token positions followed by a linear map to the
    shared modality dimension."""

    def __init__(self, model_dim: int, out_dim: int):
        super().__init__()
        self.proj = nn.Linear(model_dim, out_dim)

    def forward(self, encoded: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        return self.proj(masked_mean(encoded, pad_mask))


def pool_sequence(encoded: torch.Tensor, pad_mask: torch.Tensor,
                  pooler: SequencePooler) -> torch.Tensor:
    """Pool a single (l, dim) sequence to a modality vector."""
    return pooler(encoded.unsqueeze(0), pad_mask.unsqueeze(0)).squeeze(0)


class SequenceEncoder(nn.Module):
    """Token ids -> modality embedding.

    Combines the content+position embedding tables, the transformer stack and
    the pooling projection. Input ids use PAD at padded positions.
    """

    def __init__(self, vocab_size: int, max_len: int,
                 params: TransformerParams | None = None, out_dim: int = 128):
        super().__init__()
        self.params = params or TransformerParams()
        self.max_len = max_len
        self.content = nn.Embedding(vocab_size, self.params.model_dim, padding_idx=PAD_ID)
        self.position = nn.Embedding(max_len, self.params.model_dim)
        self.encoder = TransformerEncoder(self.params)
        self.pooler = SequencePooler(self.params.model_dim, out_dim)

    def embed(self, ids: torch.Tensor) -> torch.Tensor:
        length = ids.shape[-1]
        if length > self.max_len:
            raise IndexError(f"sequence length {length} exceeds max_len {self.max_len}")
        positions = torch.arange(length, device=ids.device)
        return self.content(ids) + self.position(positions)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        if pad_mask is None:
            pad_mask = ids == PAD_ID
        encoded = self.encoder(self.embed(ids), pad_mask)
        return self.pooler(encoded, pad_mask)
