"""Logistic-regression comparator with a threshold-sweep ROC curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .roc import RocCurve

MAX_ITER = 100
GRAD_TOL = 1e-8
RIDGE = 1e-10


@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray  # intercept first, then one slope per feature
    converged: bool
    iterations: int


def _design(X: np.ndarray) -> np.ndarray:
    return np.hstack((np.ones((X.shape[0], 1)), X))


def _log_likelihood(Z, labels, beta):
    # labels are +/-1, so log p(A_i | x_i) = -log(1 + exp(-A_i z_i))
    return -float(np.sum(np.logaddexp(0.0, -labels * (Z @ beta))))


def fit_logistic(train: Dataset) -> LogisticModel:
    """Maximise the binomial log-likelihood by damped Newton iterations.

    Stops at gradient sup-norm < 1e-8 or 100 iterations; under perfect
    separation the likelihood keeps improving without convergence and the
    best iterate is returned with converged=False.  Step halving keeps the
    log-likelihood non-decreasing; a tiny ridge guards rank-deficient
    Hessians.
    """
    if not train.has_both_classes():
        raise ValueError("logistic fit requires both classes")
    Z = _design(train.features)
    labels = train.labels.astype(np.float64)
    y01 = (labels + 1.0) / 2.0
    beta = np.zeros(Z.shape[1])
    ll = _log_likelihood(Z, labels, beta)
    converged = False
    steps = 0
    while steps < MAX_ITER:
        z = Z @ beta
        prob = _expit(z)
        grad = Z.T @ (y01 - prob)
        if np.max(np.abs(grad)) < GRAD_TOL:
            # a tiny gradient with saturated probabilities on perfectly
            # separated data is float underflow, not a stationary point
            separated = np.all(labels * z > 0) and np.any((prob == 0.0) | (prob == 1.0))
            converged = not separated
            break
        w = prob * (1.0 - prob)
        H = Z.T @ (w[:, None] * Z) + RIDGE * np.eye(Z.shape[1])
        direction = np.linalg.solve(H, grad)
        step = 1.0
        improved = False
        while step > 1e-12:
            candidate = beta + step * direction
            ll_new = _log_likelihood(Z, labels, candidate)
            if ll_new >= ll:
                beta = candidate
                ll = ll_new
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        steps += 1
    return LogisticModel(coefficients=beta, converged=converged, iterations=steps)


def _expit(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_proba(model: LogisticModel, X) -> np.ndarray:
    X = X.features if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)
    return _expit(_design(X) @ model.coefficients)


def classify_at(model: LogisticModel, X, threshold: float = 0.5) -> np.ndarray:
    return np.where(predict_proba(model, X) >= threshold, 1, -1)


def logistic_roc(model: LogisticModel, test: Dataset) -> RocCurve:
    """ROC points from sweeping the threshold over all distinct predictions.

    Point at threshold t classifies +1 when the predicted probability is
    >= t.  The curve reuses RocCurve with ascending thresholds in the alpha
    slot, so AUC, operating-point selection and the band machinery apply
    unchanged.
    """
    scores = predict_proba(model, test)
    labels = test.labels
    n_pos = int(np.count_nonzero(labels == 1))
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("se/sp undefined: test set must contain both classes")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = labels[order] == 1
    tps = np.cumsum(pos)
    fps = np.cumsum(~pos)
    group_end = np.flatnonzero(np.concatenate((s[1:] != s[:-1], [True])))
    tpf = tps[group_end] / n_pos
    fpf = fps[group_end] / n_neg
    thresholds = s[group_end]
    # reverse so thresholds ascend as RocCurve requires
    return RocCurve(alphas=thresholds[::-1], fpf=fpf[::-1], tpf=tpf[::-1])
