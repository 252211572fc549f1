"""Topological graph encoders.

Three encoders share this module: a GCN over the drug 2D graph, a
topology-adaptive (multi-hop) graph convolution with global attention
pooling over protein pocket graphs, and a GCN over the residue contact
graph. All of them pool node states into a single vector in the shared
modality dimension.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .errors import IntegrityError
from .ingest import (
    DRUG_ATOM_FEATURES, POCKET_ATOM_FEATURES, RESIDUE_FEATURES,
    Molecular2DGraph, PocketGraph, ResidueContactGraph,
)


def _as_tensor(array, dtype=torch.float32) -> torch.Tensor:
    if isinstance(array, torch.Tensor):
        return array.to(dtype)
    return torch.as_tensor(np.asarray(array), dtype=dtype)


def gcn_norm(adjacency) -> torch.Tensor:
    """Symmetrically normalized adjacency with self loops:
    D̃^{-1/2} (A + I) D̃^{-1/2}."""
    a = _as_tensor(adjacency, torch.float64)
    a_tilde = a + torch.eye(a.shape[0], dtype=a.dtype)
    deg = a_tilde.sum(dim=1)
    inv_sqrt = deg.pow(-0.5)
    return (inv_sqrt[:, None] * a_tilde * inv_sqrt[None, :]).to(torch.float32)


def tagcn_norm(adjacency) -> torch.Tensor:
    """Symmetrically normalized adjacency without self loops. Zero-degree
    nodes get a zero row/column instead of a division by zero, so their
    propagation terms vanish."""
    a = _as_tensor(adjacency, torch.float64)
    deg = a.sum(dim=1)
    inv_sqrt = torch.where(deg > 0, deg.pow(-0.5), torch.zeros_like(deg))
    return (inv_sqrt[:, None] * a * inv_sqrt[None, :]).to(torch.float32)


def gcn_layer(adj_with_self_loops, z, weight, bias) -> torch.Tensor:
    """One graph convolution: ReLU(D̃^{-1/2} Ã D̃^{-1/2} Z W + b).

    ``adj_with_self_loops`` is Ã = A + I (unnormalized); the symmetric
    normalization is applied here.
    """
    a_tilde = _as_tensor(adj_with_self_loops, torch.float64)
    z = _as_tensor(z, torch.float64)
    weight = _as_tensor(weight, torch.float64)
    bias = _as_tensor(bias, torch.float64)
    if a_tilde.shape[0] != z.shape[0] or z.shape[1] != weight.shape[0]:
        raise ValueError(
            f"dimension mismatch: adjacency {tuple(a_tilde.shape)}, "
            f"Z {tuple(z.shape)}, W {tuple(weight.shape)}")
    deg = a_tilde.sum(dim=1)
    inv_sqrt = deg.pow(-0.5)
    norm = inv_sqrt[:, None] * a_tilde * inv_sqrt[None, :]
    return torch.relu(norm @ z @ weight + bias)


class GCNLayer(nn.Module):
    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.linear = nn.Linear(in_dim, out_dim)

    def forward(self, norm_adj: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        return torch.relu(norm_adj @ self.linear(z))


class TAGCNLayer(nn.Module):
    """Multi-hop graph convolution: ReLU(Σ_{k=1..K} S^k X W_k + b) with
    S the normalized adjacency without self loops."""

    def __init__(self, in_dim: int, out_dim: int, hops: int = 2):
        super().__init__()
        if hops < 1:
            raise ValueError("need at least one hop")
        self.hops = hops
        self.hop_weights = nn.ParameterList(
            nn.Parameter(torch.empty(in_dim, out_dim)) for _ in range(hops))
        # fan-in uniform init (as in nn.Linear); a nonzero bias also keeps
        # isolated nodes (zero adjacency rows) off the ReLU kink
        bound = 1.0 / (in_dim ** 0.5)
        self.bias = nn.Parameter(torch.empty(out_dim).uniform_(-bound, bound))
        for w in self.hop_weights:
            nn.init.xavier_uniform_(w)

    def forward(self, norm_adj: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        out = self.bias.expand(x.shape[0], -1).clone()
        propagated = x
        for w in self.hop_weights:
            propagated = norm_adj @ propagated
            out = out + propagated @ w
        return torch.relu(out)


def tagcn_layer(adjacency, x, hop_weights, bias) -> torch.Tensor:
    """Functional multi-hop convolution from explicit per-hop weights."""
    norm = tagcn_norm(adjacency).to(torch.float64)
    x = _as_tensor(x, torch.float64)
    out = _as_tensor(bias, torch.float64).expand(x.shape[0], -1).clone()
    propagated = x
    for w in hop_weights:
        propagated = norm @ propagated
        out = out + propagated @ _as_tensor(w, torch.float64)
    return torch.relu(out)


class AttentionPool(nn.Module):
    """Gated sum over nodes: Σ_i sigmoid(gate(x_i)) · transform(x_i)."""

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.gate = nn.Linear(in_dim, 1)
        self.transform = nn.Linear(in_dim, out_dim)

    def forward(self, node_feats: torch.Tensor) -> torch.Tensor:
        gates = torch.sigmoid(self.gate(node_feats))
        return (gates * self.transform(node_feats)).sum(dim=0)


class Drug2DEncoder(nn.Module):
    """75-dim atom features -> projection -> GCN stack -> mean pool -> D."""

    def __init__(self, out_dim: int = 128, atom_dim: int = 128,
                 num_layers: int = 2):
        super().__init__()
        if num_layers < 1:
            raise ValueError("need at least one graph convolution layer")
        self.input_proj = nn.Linear(DRUG_ATOM_FEATURES, atom_dim)
        self.layers = nn.ModuleList(
            GCNLayer(atom_dim, atom_dim) for _ in range(num_layers))
        self.output_proj = nn.Linear(atom_dim, out_dim)

    def forward(self, node_features: torch.Tensor, norm_adj: torch.Tensor) -> torch.Tensor:
        if node_features.shape[0] == 0:
            raise IntegrityError("cannot encode an empty 2D graph")
        z = self.input_proj(node_features)
        for layer in self.layers:
            z = layer(norm_adj, z)
        return self.output_proj(z.mean(dim=0))

    def encode(self, graph: Molecular2DGraph) -> torch.Tensor:
        dtype = next(self.parameters()).dtype
        feats = _as_tensor(graph.node_features, dtype)
        return self(feats, gcn_norm(graph.adjacency).to(dtype))


class PocketEncoder(nn.Module):
    """Per-pocket TAGCN stack + gated attention pooling, pocket vectors
    averaged, then a fully connected layer to the modality dimension."""

    def __init__(self, out_dim: int = 128, hidden_dim: int = 64,
                 num_layers: int = 2, hops: int = 2):
        super().__init__()
        dims = [POCKET_ATOM_FEATURES] + [hidden_dim] * num_layers
        self.layers = nn.ModuleList(
            TAGCNLayer(dims[i], dims[i + 1], hops) for i in range(num_layers))
        self.pool = AttentionPool(hidden_dim, hidden_dim)
        self.fc = nn.Linear(hidden_dim, out_dim)

    def encode_pocket(self, node_features: torch.Tensor,
                      norm_adj: torch.Tensor) -> torch.Tensor:
        x = node_features
        for layer in self.layers:
            x = layer(norm_adj, x)
        return self.pool(x)

    def forward(self, pockets: list[tuple[torch.Tensor, torch.Tensor]]) -> torch.Tensor:
        if not pockets:
            raise IntegrityError("protein has no pocket graphs")
        vectors = [self.encode_pocket(f, a) for f, a in pockets]
        return self.fc(torch.stack(vectors).mean(dim=0))

    def encode(self, pockets: list[PocketGraph]) -> torch.Tensor:
        dtype = next(self.parameters()).dtype
        prepared = [
            (_as_tensor(p.node_features, dtype), tagcn_norm(p.adjacency).to(dtype))
            for p in pockets
        ]
        return self(prepared)


class ResidueGraphEncoder(nn.Module):
    """Residue one-hots -> embedding -> GCN stack -> mean pool -> D."""

    def __init__(self, out_dim: int = 128, hidden_dim: int = 128,
                 num_layers: int = 2):
        super().__init__()
        self.embed = nn.Linear(RESIDUE_FEATURES, hidden_dim)
        self.layers = nn.ModuleList(
            GCNLayer(hidden_dim, hidden_dim) for _ in range(num_layers))
        self.output_proj = nn.Linear(hidden_dim, out_dim)

    def forward(self, residue_onehot: torch.Tensor, norm_adj: torch.Tensor) -> torch.Tensor:
        if residue_onehot.shape[0] == 0:
            raise IntegrityError("cannot encode an empty residue graph")
        z = self.embed(residue_onehot)
        for layer in self.layers:
            z = layer(norm_adj, z)
        return self.output_proj(z.mean(dim=0))

    def encode(self, graph: ResidueContactGraph) -> torch.Tensor:
        dtype = next(self.parameters()).dtype
        adj = edges_to_adjacency(graph.edges, graph.num_residues)
        return self(_as_tensor(graph.residue_onehot, dtype), gcn_norm(adj).to(dtype))


def edges_to_adjacency(edges: np.ndarray, num_nodes: int) -> np.ndarray:
    adj = np.zeros((num_nodes, num_nodes), dtype=np.float32)
    for s, d in edges:
        adj[int(s), int(d)] = 1.0
    return adj
