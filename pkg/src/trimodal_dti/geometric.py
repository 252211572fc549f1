"""Geometric encoder over 3D molecular graphs.

Nodes carry rotation-invariant scalar channels and rotation-equivariant
vector channels (rows are 3-vectors). A geometric vector perceptron (GVP)
mixes the two: scalars see the norms of linearly mixed vector channels,
and vector outputs are gated by a nonlinearity of their own norms, which
keeps every vector channel equivariant under rigid rotations.

Message passing concatenates node and edge channels, runs a small GVP
stack, averages messages over incoming edges, and applies a residual
layer normalization. The molecule embedding is the global add pool of the
final scalar channels, projected to the shared modality dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .errors import IntegrityError
from .ingest import Molecular3DGraph

NORM_EPS = 1e-16


def safe_norm(v: torch.Tensor, dim: int = -1, keepdim: bool = False) -> torch.Tensor:
    """L2 norm with a tiny floor inside the sqrt so gradients at zero stay
    finite."""
    return torch.sqrt(v.square().sum(dim=dim, keepdim=keepdim) + NORM_EPS)


@dataclass
class GVPDims:
    in_scalar: int
    in_vector: int
    out_scalar: int
    out_vector: int
    vector_hidden: int | None = None  # defaults to max(in_vector, out_vector)


class GVP(nn.Module):
    """Geometric vector perceptron.

    Scalar path: s' = ReLU(W_v · concat(row_norms(W_h V), s) + b).
    Vector path: V_u = W_u W_h V; V' = sigmoid(row_norms(V_u)) ⊙ V_u.
    All vector-channel matrices act on the channel dimension only, never on
    the 3 spatial coordinates.
    """

    def __init__(self, dims: GVPDims, scalar_activation: bool = True):
        super().__init__()
        self.dims = dims
        h = dims.vector_hidden or max(dims.in_vector, dims.out_vector)
        self.wh = nn.Linear(dims.in_vector, h, bias=False)
        self.wu = nn.Linear(h, dims.out_vector, bias=False)
        self.wv = nn.Linear(h + dims.in_scalar, dims.out_scalar)
        self.scalar_activation = scalar_activation

    def forward(self, s: torch.Tensor, v: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if s.shape[-1] != self.dims.in_scalar or v.shape[-2] != self.dims.in_vector:
            raise ValueError(
                f"expected scalar dim {self.dims.in_scalar} and vector dim "
                f"{self.dims.in_vector}, got {s.shape[-1]} and {v.shape[-2]}")
        vh = self.wh(v.transpose(-1, -2)).transpose(-1, -2)
        vh_norms = safe_norm(vh, dim=-1)
        s_out = self.wv(torch.cat([vh_norms, s], dim=-1))
        if self.scalar_activation:
            s_out = torch.relu(s_out)
        vu = self.wu(vh.transpose(-1, -2)).transpose(-1, -2)
        gate = torch.sigmoid(safe_norm(vu, dim=-1, keepdim=True))
        return s_out, gate * vu


class GVPStack(nn.Module):
    """Sequential GVP layers used as the message function."""

    def __init__(self, dims: list[GVPDims]):
        super().__init__()
        self.layers = nn.ModuleList(GVP(d) for d in dims)

    def forward(self, s, v):
        for layer in self.layers:
            s, v = layer(s, v)
        return s, v


def gvp_message(stack: GVPStack, node_s: torch.Tensor, node_v: torch.Tensor,
                edge_s: torch.Tensor, edge_v: torch.Tensor
                ) -> tuple[torch.Tensor, torch.Tensor]:
    """Message from node j along edge (j -> i): the GVP stack applied to the
    concatenated node and edge channels."""
    return stack(torch.cat([node_s, edge_s], dim=-1),
                 torch.cat([node_v, edge_v], dim=-2))


class VectorChannelNorm(nn.Module):
    """Direction-preserving normalization of vector channels: divides every
    channel by the RMS of the channel norms."""

    def forward(self, v: torch.Tensor) -> torch.Tensor:
        rms = torch.sqrt(v.square().sum(dim=-1).mean(dim=-1, keepdim=True) + NORM_EPS)
        return v / rms.unsqueeze(-1)


class MessagePassingLayer(nn.Module):
    """One GVP-GNN layer: per-edge messages, incoming-edge mean, residual
    add, then layer normalization of both channel types."""

    def __init__(self, scalar_dim: int, vector_dim: int, edge_scalar_dim: int,
                 edge_vector_dim: int, num_message_layers: int = 2):
        super().__init__()
        dims = [GVPDims(scalar_dim + edge_scalar_dim, vector_dim + edge_vector_dim,
                        scalar_dim, vector_dim)]
        for _ in range(num_message_layers - 1):
            dims.append(GVPDims(scalar_dim, vector_dim, scalar_dim, vector_dim))
        self.message = GVPStack(dims)
        self.scalar_norm = nn.LayerNorm(scalar_dim)
        self.vector_norm = VectorChannelNorm()

    def forward(self, s: torch.Tensor, v: torch.Tensor, edges: torch.Tensor,
                edge_s: torch.Tensor, edge_v: torch.Tensor
                ) -> tuple[torch.Tensor, torch.Tensor]:
        n = s.shape[0]
        if edges.numel():
            src, dst = edges[:, 0], edges[:, 1]
            msg_s, msg_v = gvp_message(self.message, s[src], v[src],
                                       edge_s, edge_v)
            sum_s = torch.zeros_like(s).index_add_(0, dst, msg_s)
            sum_v = torch.zeros_like(v).index_add_(0, dst, msg_v)
            counts = torch.zeros(n, dtype=s.dtype, device=s.device
                                 ).index_add_(0, dst, torch.ones_like(dst, dtype=s.dtype))
            denom = counts.clamp(min=1.0)
            mean_s = sum_s / denom[:, None]
            mean_v = sum_v / denom[:, None, None]
        else:
            mean_s, mean_v = torch.zeros_like(s), torch.zeros_like(v)
        s = self.scalar_norm(s + mean_s)
        v = self.vector_norm(v + mean_v)
        return s, v


def gvp_node_update(layer: MessagePassingLayer, s_i: torch.Tensor,
                    v_i: torch.Tensor, messages: list[tuple[torch.Tensor, torch.Tensor]]
                    ) -> tuple[torch.Tensor, torch.Tensor]:
    """Residual update of a single node from an explicit message list.
    An empty list contributes a zero message term."""
    if messages:
        mean_s = torch.stack([m[0] for m in messages]).mean(dim=0)
        mean_v = torch.stack([m[1] for m in messages]).mean(dim=0)
    else:
        mean_s, mean_v = torch.zeros_like(s_i), torch.zeros_like(v_i)
    return (layer.scalar_norm(s_i + mean_s),
            layer.vector_norm(v_i + mean_v))


class Drug3DEncoder(nn.Module):
    """3D molecular graph -> modality embedding.

    Input GVP lifts the raw node channels to hidden widths, a stack of
    message-passing layers refines them, and the final scalar channels are
    summed over nodes and projected to the modality dimension.
    """

    def __init__(self, node_scalar_dim: int = 27, node_vector_dim: int = 1,
                 edge_scalar_dim: int = 17, edge_vector_dim: int = 1,
                 scalar_hidden: int = 64, vector_hidden: int = 16,
                 num_mp_layers: int = 3, num_message_layers: int = 2,
                 out_dim: int = 128):
        super().__init__()
        self.input_gvp = GVP(GVPDims(node_scalar_dim, node_vector_dim,
                                     scalar_hidden, vector_hidden))
        self.mp_layers = nn.ModuleList(
            MessagePassingLayer(scalar_hidden, vector_hidden, edge_scalar_dim,
                                edge_vector_dim, num_message_layers)
            for _ in range(num_mp_layers))
        self.readout = nn.Linear(scalar_hidden, out_dim)

    def forward(self, node_s: torch.Tensor, node_v: torch.Tensor,
                edges: torch.Tensor, edge_s: torch.Tensor,
                edge_v: torch.Tensor) -> torch.Tensor:
        if node_s.shape[0] == 0:
            raise IntegrityError("cannot encode an empty 3D graph")
        s, v = self.input_gvp(node_s, node_v)
        for layer in self.mp_layers:
            s, v = layer(s, v, edges, edge_s, edge_v)
        return self.readout(s.sum(dim=0))

    def node_states(self, node_s, node_v, edges, edge_s, edge_v):
        """Final per-node channels, exposed for equivariance checks."""
        s, v = self.input_gvp(node_s, node_v)
        for layer in self.mp_layers:
            s, v = layer(s, v, edges, edge_s, edge_v)
        return s, v

    def encode(self, graph: Molecular3DGraph) -> torch.Tensor:
        dtype = next(self.parameters()).dtype
        tensors = graph_tensors(graph, dtype)
        return self(*tensors)


def graph_tensors(graph: Molecular3DGraph, dtype=torch.float32):
    """Unpack a Molecular3DGraph into the tensors the encoder consumes."""
    return (
        torch.as_tensor(np.asarray(graph.node_scalars), dtype=dtype),
        torch.as_tensor(np.asarray(graph.node_vectors), dtype=dtype),
        torch.as_tensor(np.asarray(graph.edges), dtype=torch.long),
        torch.as_tensor(np.asarray(graph.edge_scalars), dtype=dtype),
        torch.as_tensor(np.asarray(graph.edge_vectors), dtype=dtype),
    )
