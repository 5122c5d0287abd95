"""Labelled sample container and split helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """n samples of (feature vector, label in {-1, +1}).

    Arrays are validated once at construction and treated as immutable
    afterwards.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D array of shape (n, p)")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError("labels must be 1-D with one entry per feature row")
        if features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("need at least one sample and one feature")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite entries")
        labels = labels.astype(np.int64, copy=True)
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must take values in {-1, +1}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.labels == -1))

    def has_both_classes(self) -> bool:
        return self.n_positive > 0 and self.n_negative > 0

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])


def stratified_split(data: Dataset, train_fraction: float, rng: np.random.Generator):
    """Split into (train, test), keeping the class mix on both sides.

    Each class is shuffled and cut at round(train_fraction * count); classes
    with at least two members contribute at least one sample to each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    train_parts, test_parts = [], []
    for label in (-1, 1):
        idx = np.flatnonzero(data.labels == label)
        if idx.size == 0:
            continue
        idx = idx[rng.permutation(idx.size)]
        k = int(round(train_fraction * idx.size))
        if idx.size >= 2:
            k = min(max(k, 1), idx.size - 1)
        train_parts.append(idx[:k])
        test_parts.append(idx[k:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts)) if any(t.size for t in test_parts) else np.empty(0, dtype=np.int64)
    if test_idx.size == 0:
        raise ValueError("split left the test set empty")
    return data.subset(train_idx), data.subset(test_idx)
