"""Tests for evaluation metrics (against brute-force oracles and the
reference sklearn implementations) and dataset splitting."""

import numpy as np
import pytest

from trimodal_dti.config import ModelConfig
from trimodal_dti.errors import ParseError
from trimodal_dti.metrics import (
    DatasetSplit, MetricError, average_precision, compute_metrics,
    make_splits, precision_at, roc_auc,
)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def oracle_auc_pair_counting(labels, scores):
    """Exhaustive concordant/tied pair enumeration."""
    pos = [s for l, s in zip(labels, scores) if l == 1]
    neg = [s for l, s in zip(labels, scores) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


# ---------------------------------------------------------------------------
# AUC
# ---------------------------------------------------------------------------

def test_perfect_ranking_auc_and_aupr_are_one():
    labels = [1, 1, 0, 0]
    scores = [0.9, 0.8, 0.2, 0.1]
    assert roc_auc(labels, scores) == pytest.approx(1.0)
    assert average_precision(labels, scores) == pytest.approx(1.0)


def test_constant_scores_auc_half():
    assert roc_auc([1, 0, 1, 0], [0.7, 0.7, 0.7, 0.7]) == pytest.approx(0.5)


def test_reference_fixture_values():
    labels = [1, 0, 1, 0]
    scores = [0.9, 0.8, 0.4, 0.1]
    m = compute_metrics(labels, scores, threshold=0.5)
    assert m.auc == pytest.approx(0.75)       # 3 of 4 pairs concordant
    assert m.precision == pytest.approx(0.5)  # predictions {0.9, 0.8} -> one TP
    assert m.aupr == pytest.approx(5.0 / 6.0)


def test_auc_matches_pair_counting_on_random_inputs():
    rng = np.random.default_rng(0)
    for trial in range(30):
        n = int(rng.integers(4, 50))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        # quantized scores force plenty of ties
        scores = rng.integers(0, 6, size=n) / 5.0
        assert roc_auc(labels, scores) == pytest.approx(
            oracle_auc_pair_counting(labels, scores), abs=1e-12)


def test_auc_aupr_match_sklearn():
    from sklearn.metrics import average_precision_score, roc_auc_score
    rng = np.random.default_rng(1)
    for trial in range(20):
        n = int(rng.integers(5, 60))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.uniform(size=n).round(2)
        assert roc_auc(labels, scores) == pytest.approx(
            roc_auc_score(labels, scores), abs=1e-10)
        assert average_precision(labels, scores) == pytest.approx(
            average_precision_score(labels, scores), abs=1e-10)


def test_single_class_labels_rejected():
    with pytest.raises(MetricError):
        roc_auc([1, 1, 1], [0.2, 0.5, 0.9])
    with pytest.raises(MetricError):
        average_precision([0, 0], [0.2, 0.5])


def test_precision_zero_predicted_positives_warns():
    with pytest.warns(UserWarning, match="no predicted positives"):
        value = precision_at([1, 0], [0.1, 0.2], threshold=0.5)
    assert value == 0.0


def test_metrics_always_in_unit_interval():
    rng = np.random.default_rng(2)
    for trial in range(20):
        n = int(rng.integers(4, 30))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.uniform(size=n)
        m = compute_metrics(labels, scores)
        assert 0.0 <= m.auc <= 1.0
        assert 0.0 <= m.aupr <= 1.0
        assert 0.0 <= m.precision <= 1.0


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

def test_split_sizes_100():
    (split,) = make_splits(100, seed=0)
    assert (len(split.train), len(split.val), len(split.test)) == (80, 10, 10)


def test_split_sizes_human_dataset():
    (split,) = make_splits(4965, seed=1)
    assert (len(split.train), len(split.val), len(split.test)) == (3972, 496, 497)


def test_split_determinism():
    a = make_splits(200, seed=7, repeats=3)
    b = make_splits(200, seed=7, repeats=3)
    for x, y in zip(a, b):
        assert x.train == y.train and x.val == y.val and x.test == y.test


def test_repeats_differ():
    a, b = make_splits(100, seed=3, repeats=2)
    assert a.train != b.train


def test_splits_disjoint_and_covering_over_100_seeds():
    for seed in range(100):
        (split,) = make_splits(53, seed=seed)
        groups = (split.train, split.val, split.test)
        union = set().union(*map(set, groups))
        assert sum(map(len, groups)) == 53
        assert union == set(range(53))


def test_fixed_scheme_carves_validation_fifth():
    train_idx = list(range(50))
    test_idx = list(range(50, 70))
    for seed in range(100):
        (split,) = make_splits(70, scheme="gpcr_fixed", seed=seed,
                               train_indices=train_idx, test_indices=test_idx)
        assert len(split.val) == 10
        assert len(split.train) == 40
        assert sorted(split.test) == test_idx
        assert set(split.train) | set(split.val) == set(train_idx)
        assert not set(split.train) & set(split.val)


def test_fixed_scheme_rejects_overlap():
    with pytest.raises(ValueError):
        make_splits(10, scheme="gpcr_fixed", train_indices=[0, 1, 2, 3, 4, 5],
                    test_indices=[5, 6])


def test_too_small_dataset_rejected():
    with pytest.raises(ValueError):
        make_splits(9)


def test_split_validates_disjointness():
    with pytest.raises(ValueError):
        DatasetSplit(train=[0, 1], val=[1], test=[2], seed=0, scheme="repeated_8_1_1")


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def test_config_roundtrip(tmp_path):
    cfg = ModelConfig(modal_dim=32, learning_rate=5e-4, seed=11)
    path = tmp_path / "config.json"
    cfg.save(path)
    assert ModelConfig.load(path) == cfg


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"modal_dim": 16, "not_a_field": 1}')
    with pytest.raises(ParseError, match="not_a_field"):
        ModelConfig.load(path)


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(modal_dim=0)
    with pytest.raises(ValueError):
        ModelConfig(learning_rate=0.0)
