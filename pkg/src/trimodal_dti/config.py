"""Model and training configuration.

One flat dataclass carries every hyperparameter; the JSON config file
mirrors the field names exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ParseError


@dataclass
class ModelConfig:
    # shared modality embedding dimension
    modal_dim: int = 128

    # tokenizer
    drug_vocab_size: int = 2048
    protein_vocab_size: int = 8192
    min_pair_freq: int = 5
    drug_max_len: int = 256
    protein_max_len: int = 1024

    # sequence encoders
    seq_layers: int = 2
    seq_heads: int = 4
    seq_model_dim: int = 128
    seq_ff_dim: int = 512
    dropout: float = 0.2

    # 2D drug graph / residue contact graph encoders
    gcn_layers: int = 2
    gcn_hidden: int = 128

    # pocket encoder
    tagcn_layers: int = 2
    tagcn_hops: int = 2
    tagcn_hidden: int = 64

    # 3D geometric encoder
    gvp_mp_layers: int = 3
    gvp_scalar_hidden: int = 64
    gvp_vector_hidden: int = 16
    gvp_message_layers: int = 2

    # classifier
    clf_hidden1: int = 512
    clf_hidden2: int = 128

    # losses
    temperature: float = 0.1
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = 0.1

    # optimization
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    weight_decay: float = 0.0
    patience: int = 10

    seed: int = 0

    def __post_init__(self):
        if self.modal_dim <= 0:
            raise ValueError("modal_dim must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def load(cls, path: str | Path) -> "ModelConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid config JSON ({exc})") from None
        if not isinstance(payload, dict):
            raise ParseError(f"{path}: config must be a JSON object")
        return cls.from_dict(payload)
