"""End-to-end interaction model.

Six encoders produce the per-entity modality embeddings; a minibatch of
(drug, protein) pairs is scored by fusing the six blocks and running the
MLP classifier, while the two tri-modal contrastive losses are computed
over the unique entities appearing in the batch.

Ablation variants either disable contrastive pairs or zero out modality
blocks of the joint vector before classification (knocked-out modalities
contribute nothing to the prediction and drop out of the alignment loss).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .contrastive import pairwise_contrastive_loss
from .errors import IntegrityError
from .fusion import InteractionClassifier, fuse
from .geometric import Drug3DEncoder, graph_tensors
from .graph_encoders import (
    Drug2DEncoder, PocketEncoder, ResidueGraphEncoder, edges_to_adjacency,
    gcn_norm, tagcn_norm,
)
from .ingest import DrugRecord, ProteinRecord
from .sequence_encoder import SequenceEncoder, TransformerParams
from .tokenizer import PAD_ID, Vocabulary, tokenize

MODALITY_PAIRS = ((1, 2), (2, 3), (1, 3))

ABLATION_VARIANTS = ("all", "no_CL", "no_L12", "no_L23", "no_L13",
                     "seq_only", "graph_only", "struct3d_only")


@dataclass(frozen=True)
class AblationVariant:
    """Which contrastive pairs stay active and which modality blocks of the
    joint vector are zeroed."""
    name: str
    contrastive_pairs: tuple[tuple[int, int], ...] = MODALITY_PAIRS
    zero_modalities: tuple[int, ...] = ()  # modality indices 1..3, both entities

    @classmethod
    def from_name(cls, name: str) -> "AblationVariant":
        table = {
            "all": cls("all"),
            "no_CL": cls("no_CL", contrastive_pairs=()),
            "no_L12": cls("no_L12", contrastive_pairs=((2, 3), (1, 3))),
            "no_L23": cls("no_L23", contrastive_pairs=((1, 2), (1, 3))),
            "no_L13": cls("no_L13", contrastive_pairs=((1, 2), (2, 3))),
            "seq_only": cls("seq_only", contrastive_pairs=(), zero_modalities=(2, 3)),
            "graph_only": cls("graph_only", contrastive_pairs=(), zero_modalities=(1, 3)),
            "struct3d_only": cls("struct3d_only", contrastive_pairs=(), zero_modalities=(1, 2)),
        }
        if name not in table:
            raise ValueError(
                f"unknown ablation variant {name!r}; expected one of {ABLATION_VARIANTS}")
        return table[name]


@dataclass
class DrugTensors:
    token_ids: list[int]
    feats_2d: torch.Tensor
    norm_adj_2d: torch.Tensor
    graph_3d: tuple  # (node_s, node_v, edges, edge_s, edge_v)


@dataclass
class ProteinTensors:
    token_ids: list[int]
    pockets: list[tuple[torch.Tensor, torch.Tensor]]
    residue_onehot: torch.Tensor
    norm_adj_residues: torch.Tensor


def prepare_drug_tensors(record: DrugRecord, vocab: Vocabulary,
                         max_len: int) -> DrugTensors:
    if record.graph3d is None:
        raise IntegrityError(f"drug {record.drug_id} has no 3D conformer")
    seq = tokenize(record.smiles, vocab, max_len)
    return DrugTensors(
        token_ids=seq.token_ids,
        feats_2d=torch.as_tensor(record.graph2d.node_features, dtype=torch.float32),
        norm_adj_2d=gcn_norm(record.graph2d.adjacency),
        graph_3d=graph_tensors(record.graph3d),
    )


def prepare_protein_tensors(record: ProteinRecord, vocab: Vocabulary,
                            max_len: int) -> ProteinTensors:
    if record.residue_graph is None:
        raise IntegrityError(f"protein {record.protein_id} has no residue graph")
    if not record.pockets:
        raise IntegrityError(f"protein {record.protein_id} has no pockets")
    seq = tokenize(record.sequence, vocab, max_len)
    adj = edges_to_adjacency(record.residue_graph.edges,
                             record.residue_graph.num_residues)
    return ProteinTensors(
        token_ids=seq.token_ids,
        pockets=[(torch.as_tensor(p.node_features, dtype=torch.float32),
                  tagcn_norm(p.adjacency)) for p in record.pockets],
        residue_onehot=torch.as_tensor(record.residue_graph.residue_onehot,
                                       dtype=torch.float32),
        norm_adj_residues=gcn_norm(adj),
    )


def _pad_ids(id_lists: list[list[int]], device, dtype=torch.long):
    length = max(len(ids) for ids in id_lists)
    batch = torch.full((len(id_lists), length), PAD_ID, dtype=dtype, device=device)
    mask = torch.ones((len(id_lists), length), dtype=torch.bool, device=device)
    for row, ids in enumerate(id_lists):
        batch[row, :len(ids)] = torch.as_tensor(ids, dtype=dtype)
        mask[row, :len(ids)] = False
    return batch, mask


@dataclass
class BatchOutput:
    probs: torch.Tensor                # (B,)
    contrastive_drug: torch.Tensor     # scalar
    contrastive_protein: torch.Tensor  # scalar
    drug_modalities: dict[int, torch.Tensor] = field(default_factory=dict)
    protein_modalities: dict[int, torch.Tensor] = field(default_factory=dict)


class TriModalNet(nn.Module):
    """The six modality encoders plus the fusion classifier."""

    def __init__(self, config: ModelConfig, drug_vocab_size: int,
                 protein_vocab_size: int):
        super().__init__()
        self.config = config
        d = config.modal_dim
        seq_params = TransformerParams(
            num_layers=config.seq_layers, num_heads=config.seq_heads,
            model_dim=config.seq_model_dim, feedforward_dim=config.seq_ff_dim,
            dropout=config.dropout)
        self.drug_seq = SequenceEncoder(drug_vocab_size, config.drug_max_len,
                                        seq_params, out_dim=d)
        self.protein_seq = SequenceEncoder(protein_vocab_size, config.protein_max_len,
                                           seq_params, out_dim=d)
        self.drug_2d = Drug2DEncoder(out_dim=d, atom_dim=config.gcn_hidden,
                                     num_layers=config.gcn_layers)
        self.drug_3d = Drug3DEncoder(
            scalar_hidden=config.gvp_scalar_hidden,
            vector_hidden=config.gvp_vector_hidden,
            num_mp_layers=config.gvp_mp_layers,
            num_message_layers=config.gvp_message_layers,
            out_dim=d)
        self.protein_pockets = PocketEncoder(out_dim=d, hidden_dim=config.tagcn_hidden,
                                             num_layers=config.tagcn_layers,
                                             hops=config.tagcn_hops)
        self.protein_contacts = ResidueGraphEncoder(out_dim=d,
                                                    hidden_dim=config.gcn_hidden,
                                                    num_layers=config.gcn_layers)
        self.classifier = InteractionClassifier(
            modal_dim=d, hidden1=config.clf_hidden1, hidden2=config.clf_hidden2,
            dropout=config.dropout)

    @property
    def device(self):
        return next(self.parameters()).device

    def encode_drugs(self, drugs: list[DrugTensors]) -> dict[int, torch.Tensor]:
        """Modality matrices (one row per drug) keyed by modality index."""
        ids, mask = _pad_ids([d.token_ids for d in drugs], self.device)
        m1 = self.drug_seq(ids, mask)
        m2 = torch.stack([self.drug_2d(d.feats_2d, d.norm_adj_2d) for d in drugs])
        m3 = torch.stack([self.drug_3d(*d.graph_3d) for d in drugs])
        return {1: m1, 2: m2, 3: m3}

    def encode_proteins(self, proteins: list[ProteinTensors]) -> dict[int, torch.Tensor]:
        ids, mask = _pad_ids([p.token_ids for p in proteins], self.device)
        m1 = self.protein_seq(ids, mask)
        m2 = torch.stack([self.protein_pockets(p.pockets) for p in proteins])
        m3 = torch.stack([self.protein_contacts(p.residue_onehot, p.norm_adj_residues)
                          for p in proteins])
        return {1: m1, 2: m2, 3: m3}

    def _contrastive(self, modalities: dict[int, torch.Tensor],
                     pairs: tuple[tuple[int, int], ...]) -> torch.Tensor:
        if not pairs or modalities[1].shape[0] < 1:
            return torch.zeros((), device=self.device)
        losses = [pairwise_contrastive_loss(modalities[a], modalities[b],
                                            self.config.temperature)
                  for a, b in pairs]
        return torch.stack(losses).mean()

    def forward(self, drugs: list[DrugTensors], proteins: list[ProteinTensors],
                drug_index: list[int], protein_index: list[int],
                variant: AblationVariant | None = None) -> BatchOutput:
        """Score pairs (drug_index[k], protein_index[k]) over unique entity
        lists ``drugs`` and ``proteins``."""
        variant = variant or AblationVariant.from_name("all")
        dm = self.encode_drugs(drugs)
        pm = self.encode_proteins(proteins)

        loss_d = self._contrastive(dm, variant.contrastive_pairs)
        loss_p = self._contrastive(pm, variant.contrastive_pairs)

        for m in variant.zero_modalities:
            dm = dict(dm)
            pm = dict(pm)
            dm[m] = torch.zeros_like(dm[m])
            pm[m] = torch.zeros_like(pm[m])

        di = torch.as_tensor(drug_index, dtype=torch.long, device=self.device)
        pi = torch.as_tensor(protein_index, dtype=torch.long, device=self.device)
        joint = fuse(dm[1][di], dm[2][di], dm[3][di],
                     pm[1][pi], pm[2][pi], pm[3][pi])
        probs = self.classifier(joint)
        return BatchOutput(probs=probs, contrastive_drug=loss_d,
                           contrastive_protein=loss_p,
                           drug_modalities=dm, protein_modalities=pm)


def collate_pairs(samples, drug_tensors: dict[str, DrugTensors],
                  protein_tensors: dict[str, ProteinTensors]):
    """Deduplicate the entities of a minibatch.

    Returns (drugs, proteins, drug_index, protein_index, labels) where the
    index lists map each sample to its row in the unique-entity lists.
    """
    drug_rows: dict[str, int] = {}
    protein_rows: dict[str, int] = {}
    drugs, proteins, di, pi, labels = [], [], [], [], []
    for s in samples:
        if s.drug_id not in drug_rows:
            drug_rows[s.drug_id] = len(drugs)
            drugs.append(drug_tensors[s.drug_id])
        if s.protein_id not in protein_rows:
            protein_rows[s.protein_id] = len(proteins)
            proteins.append(protein_tensors[s.protein_id])
        di.append(drug_rows[s.drug_id])
        pi.append(protein_rows[s.protein_id])
        labels.append(float(s.label))
    return drugs, proteins, di, pi, torch.tensor(labels, dtype=torch.float32)
