"""Frequency-based subword tokenization for SMILES strings and protein
sequences, plus the additive content+position embedding lookup.

Vocabularies start from the character alphabet of a corpus and grow by
iteratively merging the most frequent adjacent token pair (ties broken
lexicographically). At tokenize time the learned merges are replayed in
training order, which makes segmentation deterministic and independent of
any longest-match heuristics.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

DRUG_VOCAB_SIZE = 2048
PROTEIN_VOCAB_SIZE = 8192
MIN_PAIR_FREQ = 5
DRUG_MAX_LEN = 256
PROTEIN_MAX_LEN = 1024


@dataclass
class Vocabulary:
    token_to_id: dict[str, int]
    merge_rules: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        ids = sorted(self.token_to_id.values())
        if ids != list(range(len(ids))):
            raise ValueError("token ids must be dense from 0")
        if self.token_to_id.get(PAD_TOKEN) != PAD_ID or self.token_to_id.get(UNK_TOKEN) != UNK_ID:
            raise ValueError(f"vocabulary must map {PAD_TOKEN}->0 and {UNK_TOKEN}->1")
        for left, right in self.merge_rules:
            for part in (left, right):
                if part not in self.token_to_id:
                    raise ValueError(f"merge rule references unknown token {part!r}")
            if left + right not in self.token_to_id:
                raise ValueError(f"merged token {left + right!r} missing from vocabulary")

    def __len__(self) -> int:
        return len(self.token_to_id)

    def save(self, path: str | Path) -> None:
        payload = {
            "tokens": self.token_to_id,
            "merges": [[l, r] for l, r in self.merge_rules],
        }
        Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid vocabulary JSON ({exc})") from None
        if "tokens" not in payload or "merges" not in payload:
            raise ParseError(f"{path}: vocabulary JSON needs 'tokens' and 'merges'")
        return cls(token_to_id=dict(payload["tokens"]),
                   merge_rules=[tuple(m) for m in payload["merges"]])


@dataclass
class TokenSequence:
    token_ids: list[int]
    tokens: list[str]

    @property
    def length(self) -> int:
        return len(self.token_ids)


def train_vocab(corpus: list[str], target_size: int,
                min_pair_freq: int = MIN_PAIR_FREQ) -> Vocabulary:
    """Learn a subword vocabulary by iterative pair merging.

    Stops when the vocabulary reaches ``target_size`` or no adjacent pair
    occurs at least ``min_pair_freq`` times. Ties between equally frequent
    pairs resolve to the lexicographically smaller pair.
    """
    if not corpus:
        raise ValueError("cannot train a vocabulary on an empty corpus")
    alphabet = sorted({ch for text in corpus for ch in text})
    if not alphabet:
        raise ValueError("corpus contains only empty strings")

    token_to_id = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    for ch in alphabet:
        token_to_id[ch] = len(token_to_id)

    sequences = [list(text) for text in corpus if text]
    merges: list[tuple[str, str]] = []
    while len(token_to_id) < target_size:
        counts: Counter[tuple[str, str]] = Counter()
        for seq in sequences:
            for a, b in zip(seq, seq[1:]):
                counts[(a, b)] += 1
        if not counts:
            break
        best_freq = max(counts.values())
        if best_freq < min_pair_freq:
            break
        best = min(pair for pair, c in counts.items() if c == best_freq)
        merges.append(best)
        token_to_id[best[0] + best[1]] = len(token_to_id)
        sequences = [_apply_merge(seq, best) for seq in sequences]

    return Vocabulary(token_to_id=token_to_id, merge_rules=merges)


def _apply_merge(seq: list[str], rule: tuple[str, str]) -> list[str]:
    left, right = rule
    out: list[str] = []
    i = 0
    while i < len(seq):
        if i + 1 < len(seq) and seq[i] == left and seq[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def tokenize(sequence: str, vocab: Vocabulary, max_len: int) -> TokenSequence:
    """Segment a string with the learned merges (replayed in training order),
    map to ids, and truncate to ``max_len``. Unknown characters become UNK."""
    if not sequence:
        raise ValueError("cannot tokenize an empty sequence")
    tokens = [ch if ch in vocab.token_to_id else UNK_TOKEN for ch in sequence]
    for rule in vocab.merge_rules:
        tokens = _apply_merge(tokens, rule)
    tokens = tokens[:max_len]
    ids = [vocab.token_to_id.get(t, UNK_ID) for t in tokens]
    return TokenSequence(token_ids=ids, tokens=tokens)


def pad_batch(sequences: list[TokenSequence], max_len: int | None = None
              ) -> tuple[np.ndarray, np.ndarray]:
    """Stack token sequences into an id matrix and a PAD mask.

    Returns ``(ids, pad_mask)`` with shape (B, L); ``pad_mask`` is True at
    padded positions.
    """
    if not sequences:
        raise ValueError("empty batch")
    length = max(s.length for s in sequences)
    if max_len is not None:
        length = min(length, max_len)
    ids = np.full((len(sequences), length), PAD_ID, dtype=np.int64)
    pad_mask = np.ones((len(sequences), length), dtype=bool)
    for row, seq in enumerate(sequences):
        n = min(seq.length, length)
        ids[row, :n] = seq.token_ids[:n]
        pad_mask[row, :n] = False
    return ids, pad_mask


def embed_tokens(token_ids, content_table, position_table):
    """Row i of the result is ``content_table[token_ids[i]] + position_table[i]``.

    Works on numpy arrays or torch tensors; raises ``IndexError`` when an id
    or position exceeds the tables.
    """
    n = len(token_ids)
    vocab_size = content_table.shape[0]
    for tid in token_ids:
        if not 0 <= int(tid) < vocab_size:
            raise IndexError(f"token id {int(tid)} outside vocabulary of {vocab_size}")
    if n > position_table.shape[0]:
        raise IndexError(
            f"sequence length {n} exceeds position table of {position_table.shape[0]}")
    if isinstance(content_table, np.ndarray):
        idx = np.asarray(token_ids, dtype=np.int64)
        return content_table[idx] + position_table[:n]
    import torch
    idx = torch.as_tensor(token_ids, dtype=torch.long, device=content_table.device)
    return content_table[idx] + position_table[:n]
