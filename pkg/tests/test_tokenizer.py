"""Tests for subword vocabulary training, tokenization and embedding."""

import numpy as np
import pytest

from trimodal_dti import tokenizer
from trimodal_dti.tokenizer import (
    PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN,
    TokenSequence, Vocabulary, embed_tokens, pad_batch, tokenize, train_vocab,
)


def test_first_merge_is_most_frequent_pair():
    vocab = train_vocab(["ABAB", "ABAB"], target_size=5, min_pair_freq=1)
    # pair (A,B) occurs 4 times, (B,A) only 2 times
    assert vocab.merge_rules[0] == ("A", "B")
    assert "AB" in vocab.token_to_id


def test_no_merges_when_target_size_at_alphabet():
    vocab = train_vocab(["ABAB"], target_size=2, min_pair_freq=1)
    assert vocab.merge_rules == []
    assert set(vocab.token_to_id) == {PAD_TOKEN, UNK_TOKEN, "A", "B"}


def test_tie_break_is_lexicographic():
    # "AB" and "CD" both occur twice and never overlap
    vocab = train_vocab(["ABCD", "ABCD"], target_size=7, min_pair_freq=2)
    assert vocab.merge_rules[0] == ("A", "B")


def test_min_pair_freq_stops_training():
    vocab = train_vocab(["ABCD"], target_size=100, min_pair_freq=2)
    assert vocab.merge_rules == []  # every pair occurs once


def test_specials_fixed_and_ids_dense():
    vocab = train_vocab(["XYZ"], target_size=10, min_pair_freq=1)
    assert vocab.token_to_id[PAD_TOKEN] == PAD_ID
    assert vocab.token_to_id[UNK_TOKEN] == UNK_ID
    assert sorted(vocab.token_to_id.values()) == list(range(len(vocab)))


def test_training_is_deterministic():
    corpus = ["CCO", "CCN", "CCCC", "c1ccccc1"]
    a = train_vocab(corpus, target_size=12, min_pair_freq=1)
    b = train_vocab(corpus, target_size=12, min_pair_freq=1)
    assert a.token_to_id == b.token_to_id
    assert a.merge_rules == b.merge_rules


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train_vocab([], target_size=10)


def test_tokenize_applies_merges_in_order():
    vocab = train_vocab(["ABAB", "ABAB"], target_size=5, min_pair_freq=1)
    seq = tokenize("ABAB", vocab, max_len=16)
    assert seq.tokens == ["AB", "AB"]
    assert seq.length == 2


def test_tokenize_without_applicable_merges_is_per_character():
    vocab = train_vocab(["ABAB"], target_size=2, min_pair_freq=1)
    seq = tokenize("BABA", vocab, max_len=16)
    assert seq.tokens == ["B", "A", "B", "A"]


def test_unknown_characters_become_unk():
    vocab = train_vocab(["AB"], target_size=4, min_pair_freq=5)
    seq = tokenize("AZB", vocab, max_len=16)
    assert seq.tokens == ["A", UNK_TOKEN, "B"]
    assert seq.token_ids[1] == UNK_ID


def test_tokenize_truncates_to_max_len():
    vocab = train_vocab(["ABCDEF"], target_size=8, min_pair_freq=5)
    seq = tokenize("ABCDEF", vocab, max_len=3)
    assert seq.tokens == ["A", "B", "C"]


def test_empty_sequence_rejected():
    vocab = train_vocab(["AB"], target_size=4)
    with pytest.raises(ValueError):
        tokenize("", vocab, max_len=8)


def test_detokenize_roundtrip_up_to_unk():
    corpus = ["CCO", "CCCNC", "OCCO"]
    vocab = train_vocab(corpus, target_size=10, min_pair_freq=2)
    for text in corpus:
        seq = tokenize(text, vocab, max_len=64)
        assert "".join(seq.tokens) == text


def test_merge_replay_matches_sequential_semantics():
    # training order: first (A,B) -> AB, then (AB,C) -> ABC
    vocab = Vocabulary(
        token_to_id={PAD_TOKEN: 0, UNK_TOKEN: 1, "A": 2, "B": 3, "C": 4,
                     "AB": 5, "ABC": 6},
        merge_rules=[("A", "B"), ("AB", "C")],
    )
    assert tokenize("ABCABC", vocab, max_len=16).tokens == ["ABC", "ABC"]
    assert tokenize("BABC", vocab, max_len=16).tokens == ["B", "ABC"]


def test_vocabulary_validates_merge_parts():
    with pytest.raises(ValueError):
        Vocabulary(token_to_id={PAD_TOKEN: 0, UNK_TOKEN: 1, "A": 2},
                   merge_rules=[("A", "B")])


def test_vocabulary_json_roundtrip(tmp_path):
    vocab = train_vocab(["ABABAB", "ABAB"], target_size=6, min_pair_freq=1)
    path = tmp_path / "vocab.json"
    vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded.token_to_id == vocab.token_to_id
    assert loaded.merge_rules == vocab.merge_rules
    # the serialized form uses the documented keys
    import json
    payload = json.loads(path.read_text())
    assert set(payload) == {"tokens", "merges"}


def test_pad_batch_masks_padding():
    a = TokenSequence(token_ids=[2, 3, 4], tokens=["a", "b", "c"])
    b = TokenSequence(token_ids=[2], tokens=["a"])
    ids, pad_mask = pad_batch([a, b])
    assert ids.shape == (2, 3)
    assert ids[1].tolist() == [2, PAD_ID, PAD_ID]
    assert pad_mask.tolist() == [[False, False, False], [False, True, True]]


def test_embed_tokens_adds_content_and_position():
    content = np.arange(12, dtype=np.float64).reshape(4, 3)
    position = np.full((5, 3), 0.5)
    out = embed_tokens([2, 1], content, position)
    assert np.allclose(out[0], content[2] + 0.5)
    assert np.allclose(out[1], content[1] + 0.5)


def test_embed_tokens_zero_positions_is_pure_content():
    content = np.random.default_rng(0).normal(size=(6, 4))
    out = embed_tokens([3, 5], content, np.zeros((8, 4)))
    assert np.allclose(out, content[[3, 5]])


def test_embed_tokens_distinguishes_positions():
    content = np.zeros((3, 2))
    position = np.array([[1.0, 0.0], [0.0, 1.0]])
    out = embed_tokens([2, 2], content, position)
    assert not np.allclose(out[0], out[1])


def test_embed_tokens_bounds_checked():
    content = np.zeros((3, 2))
    position = np.zeros((2, 2))
    with pytest.raises(IndexError):
        embed_tokens([5], content, position)
    with pytest.raises(IndexError):
        embed_tokens([0, 1, 2], content, position)
