"""Kernel evaluation and Gram-matrix construction.

Supported families: linear <x,y>, polynomial (<x,y> + coef0)^degree, and
gaussian exp(-gamma * ||x - y||^2).  Squared distances are formed as
||x||^2 + ||y||^2 - 2<x,y> and clamped at zero so round-off never produces
a negative distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

FAMILIES = ("linear", "polynomial", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    degree: int = 3
    coef0: float = 1.0
    bandwidth_gamma: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "gaussian":
            g = self.bandwidth_gamma
            if g is None or not np.isfinite(g) or g <= 0:
                raise ValueError("gaussian kernel requires bandwidth_gamma > 0")
        if self.family == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError("polynomial kernel requires integer degree >= 1")
            if not np.isfinite(self.coef0):
                raise ValueError("coef0 must be finite")


def _check_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a 1-D feature vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries in feature vector")
    return x


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of feature vectors."""
    x = _check_vector(x)
    y = _check_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    dot = float(x @ y)
    if spec.family == "linear":
        return dot
    if spec.family == "polynomial":
        return float((dot + spec.coef0) ** spec.degree)
    sq = max(float(x @ x) + float(y @ y) - 2.0 * dot, 0.0)
    return float(np.exp(-spec.bandwidth_gamma * sq))


def _as_features(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.features
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a Dataset or an (n, p) array")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite entries in features")
    return x


def gram_matrix(spec: KernelSpec, data) -> np.ndarray:
    """Symmetric n x n matrix of pairwise kernel values.

    The inner-product block is symmetrised once so K[i, j] == K[j, i]
    exactly; the gaussian diagonal is exactly 1 because the squared
    distance of a point to itself cancels to 0 before the exp.
    """
    X = _as_features(data)
    G = X @ X.T
    G = (G + G.T) * 0.5
    if spec.family == "linear":
        return G
    if spec.family == "polynomial":
        return (G + spec.coef0) ** spec.degree
    sq_norms = np.diag(G).copy()
    sq = sq_norms[:, None] + sq_norms[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.bandwidth_gamma * sq)


def kernel_matrix(spec: KernelSpec, X, Y) -> np.ndarray:
    """Cross-kernel matrix k(X[i], Y[j]) of shape (len(X), len(Y))."""
    X = _as_features(X)
    Y = _as_features(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    G = X @ Y.T
    if spec.family == "linear":
        return G
    if spec.family == "polynomial":
        return (G + spec.coef0) ** spec.degree
    sq = np.einsum("ij,ij->i", X, X)[:, None] + np.einsum("ij,ij->i", Y, Y)[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.bandwidth_gamma * sq)
