"""Evaluation metrics and dataset splitting.

AUC uses the Mann-Whitney rank statistic with tie correction (average
ranks); AUPR is average precision by step integration of the
precision-recall curve; Precision counts predicted positives at a fixed
threshold. Splits are seeded random 8:1:1 partitions (train floor, val
floor, test remainder) or a fixed train/test assignment with a validation
fifth carved out of train.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class MetricError(ValueError):
    """Raised when a metric is undefined for the given inputs."""


@dataclass
class Metrics:
    auc: float
    aupr: float
    precision: float

    def as_dict(self) -> dict[str, float]:
        return {"auc": self.auc, "aupr": self.aupr, "precision": self.precision}


def _validate(labels, scores):
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have the same length")
    if labels.size == 0:
        raise MetricError("cannot compute metrics on an empty batch")
    if not np.isin(labels, (0.0, 1.0)).all():
        raise ValueError("labels must be binary")
    return labels, scores


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty_like(scores)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def roc_auc(labels, scores) -> float:
    labels, scores = _validate(labels, scores)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC undefined: labels contain a single class")
    ranks = _average_ranks(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(labels, scores) -> float:
    labels, scores = _validate(labels, scores)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise MetricError("AUPR undefined: labels contain a single class")
    order = np.argsort(-scores, kind="mergesort")
    labels = labels[order]
    scores = scores[order]

    ap = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    i = 0
    while i < len(labels):
        # process all samples sharing one score value as a single threshold
        j = i
        while j + 1 < len(labels) and scores[j + 1] == scores[i]:
            j += 1
        tp += int(labels[i:j + 1].sum())
        seen += j - i + 1
        recall = tp / n_pos
        precision = tp / seen
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j + 1
    return float(ap)


def precision_at(labels, scores, threshold: float = 0.5) -> float:
    labels, scores = _validate(labels, scores)
    predicted = scores >= threshold
    if not predicted.any():
        warnings.warn("no predicted positives at threshold; precision set to 0")
        return 0.0
    tp = float(labels[predicted].sum())
    return tp / float(predicted.sum())


def compute_metrics(labels, scores, threshold: float = 0.5) -> Metrics:
    return Metrics(
        auc=roc_auc(labels, scores),
        aupr=average_precision(labels, scores),
        precision=precision_at(labels, scores, threshold),
    )


# ---------------------------------------------------------------------------
# dataset splits
# ---------------------------------------------------------------------------

SPLIT_SCHEMES = ("repeated_8_1_1", "gpcr_fixed")


@dataclass
class DatasetSplit:
    train: list[int]
    val: list[int]
    test: list[int]
    seed: int
    scheme: str

    def __post_init__(self):
        groups = [set(self.train), set(self.val), set(self.test)]
        total = sum(len(g) for g in groups)
        union = set().union(*groups)
        if total != len(union):
            raise ValueError("split groups must be pairwise disjoint")
        if self.scheme not in SPLIT_SCHEMES:
            raise ValueError(f"unknown split scheme {self.scheme!r}")

    @property
    def indices(self) -> set[int]:
        return set(self.train) | set(self.val) | set(self.test)


def make_splits(n: int, scheme: str = "repeated_8_1_1", seed: int = 0,
                repeats: int = 1, train_indices=None, test_indices=None
                ) -> list[DatasetSplit]:
    """Build one split per repeat.

    repeated_8_1_1: each repeat is an independent seeded permutation cut at
    floor(0.8 n) / floor(0.1 n) / remainder.
    gpcr_fixed: train/test memberships are given; a seeded fifth of train
    becomes validation.
    """
    if scheme == "repeated_8_1_1":
        if n < 10:
            raise ValueError(f"need at least 10 samples for an 8:1:1 split, got {n}")
        splits = []
        for r in range(repeats):
            rng = np.random.default_rng(seed + r)
            perm = rng.permutation(n)
            n_train = int(0.8 * n)
            n_val = int(0.1 * n)
            splits.append(DatasetSplit(
                train=perm[:n_train].tolist(),
                val=perm[n_train:n_train + n_val].tolist(),
                test=perm[n_train + n_val:].tolist(),
                seed=seed + r, scheme=scheme))
        return splits

    if scheme == "gpcr_fixed":
        if train_indices is None or test_indices is None:
            raise ValueError("gpcr_fixed scheme needs train_indices and test_indices")
        train_indices = list(train_indices)
        test_set = set(test_indices)
        if set(train_indices) & test_set:
            raise ValueError("train and test indices overlap")
        if len(train_indices) < 5:
            raise ValueError("need at least 5 training samples to carve validation")
        splits = []
        for r in range(repeats):
            rng = np.random.default_rng(seed + r)
            perm = rng.permutation(len(train_indices))
            n_val = len(train_indices) // 5
            val = [train_indices[i] for i in perm[:n_val]]
            train = [train_indices[i] for i in perm[n_val:]]
            splits.append(DatasetSplit(train=train, val=val,
                                       test=sorted(test_set),
                                       seed=seed + r, scheme=scheme))
        return splits

    raise ValueError(f"unknown split scheme {scheme!r}")
