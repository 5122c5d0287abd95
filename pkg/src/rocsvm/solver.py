"""Cost-weighted SVM training via SMO-style dual ascent.

The fitted decision function minimises the empirical hinge loss, with each
sample weighted by cost_weight(label, alpha_weight), plus a squared-norm
penalty lambda_ * ||f||^2.  In dual form each multiplier mu_i is boxed by
C * cost_weight(A_i, alpha), where C = 1 / (2 n lambda_); the bias is left
unpenalised and recovered from KKT-interior support vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _smo
from ._accel import active_backend
from .data import Dataset
from .kernels import KernelSpec, gram_matrix, kernel_matrix

GAP_TOLERANCE = 1e-3  # duality gap allowed is GAP_TOLERANCE * (primal + 1)


class ConvergenceError(RuntimeError):
    """Raised when the update budget runs out; carries the best iterate."""

    def __init__(self, message: str, model=None, kkt_residual: float | None = None):
        super().__init__(message)
        self.model = model
        self.kkt_residual = kkt_residual


@dataclass(frozen=True)
class TrainConfig:
    alpha_weight: float
    lambda_: float
    kernel: KernelSpec
    kkt_tolerance: float = 1e-3
    max_passes: int | None = None  # None means 10 * n

    def __post_init__(self):
        if not 0.0 <= self.alpha_weight <= 1.0:
            raise ValueError("alpha_weight must lie in [0, 1]")
        if not (np.isfinite(self.lambda_) and self.lambda_ > 0):
            raise ValueError("lambda_ must be positive")
        if not (np.isfinite(self.kkt_tolerance) and self.kkt_tolerance > 0):
            raise ValueError("kkt_tolerance must be positive")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be a positive integer")


@dataclass
class WsvmModel:
    """Fitted decision function f(x) = sum_i dual_coefs[i] k(x_i, x) + bias."""

    dual_coefs: np.ndarray  # signed: label_i * multiplier_i, full training length
    bias: float
    support_indices: np.ndarray
    kernel: KernelSpec
    alpha_weight: float
    lambda_: float
    train_features: np.ndarray
    kkt_residual: float
    dual_objective: float
    n_updates: int
    linear_weights: np.ndarray | None = None
    objective_trace: list | None = field(default=None, repr=False)

    @property
    def multipliers(self) -> np.ndarray:
        return np.abs(self.dual_coefs)


def cost_weight(label: int, alpha_weight: float) -> float:
    """Misclassification cost: alpha for label +1, (1 - alpha) for label -1."""
    if label == 1:
        return float(alpha_weight)
    if label == -1:
        return float(1.0 - alpha_weight)
    raise ValueError(f"label must be +1 or -1, got {label!r}")


def box_caps(labels: np.ndarray, alpha_weight: float, lambda_: float) -> np.ndarray:
    """Per-sample dual upper bounds C * cost_weight(label, alpha)."""
    n = labels.shape[0]
    C = 1.0 / (2.0 * n * lambda_)
    return C * np.where(labels == 1, alpha_weight, 1.0 - alpha_weight)


def _feasible_warm_start(warm_start, y, caps):
    """Clip seed multipliers into the box, then restore sum(y * mu) = 0.

    The pair updates preserve the equality constraint, so a seed violating
    it would never become feasible.  The surplus side is scaled down, which
    keeps every multiplier inside its box.
    """
    mu = np.clip(np.asarray(warm_start, dtype=np.float64), 0.0, caps)
    surplus = float(y @ mu)
    if surplus > 0.0:
        total = mu[y > 0].sum()
        mu[y > 0] *= (total - surplus) / total
    elif surplus < 0.0:
        total = mu[y < 0].sum()
        mu[y < 0] *= (total + surplus) / total
    return mu


def _bias_from_gradient(mu, G, y, caps, alpha_weight):
    v = -(y * G)
    slack = np.maximum(1e-12, 1e-8 * caps)
    interior = (mu > slack) & (mu < caps - slack)
    if interior.any():
        return float(np.mean(v[interior]))
    pos = y > 0.0
    up = (pos & (mu < caps)) | (~pos & (mu > 0.0))
    low = (~pos & (mu < caps)) | (pos & (mu > 0.0))
    if up.any() and low.any():
        return 0.5 * (float(np.max(v[up])) + float(np.min(v[low])))
    if low.any():  # no room to raise any multiplier: any bias below min works
        return float(np.min(v[low]))
    if up.any():
        return float(np.max(v[up]))
    # all caps zero: the cost function ignores one class entirely
    return -1.0 if alpha_weight <= 0.5 else 1.0


def _gap_and_primal(mu, G, y, caps, bias):
    xi = np.maximum(0.0, -G - y * bias)
    mu_g = float(mu @ G)
    gap = mu_g + float(caps @ xi)
    primal = 0.5 * (mu_g + float(np.sum(mu))) + float(caps @ xi)
    return gap, primal


def fit(data: Dataset, cfg: TrainConfig, *, gram: np.ndarray | None = None,
        warm_start: np.ndarray | None = None, record_passes: bool = False) -> WsvmModel:
    """Train a weighted SVM.

    Parameters
    ----------
    data : Dataset
        Training samples; both classes required unless alpha_weight is 0 or 1.
    cfg : TrainConfig
    gram : ndarray, optional
        Precomputed gram_matrix(cfg.kernel, data); avoids recomputation when
        many fits share one training set.
    warm_start : ndarray, optional
        Multipliers from a related fit; clipped into the new box.
    record_passes : bool
        Keep the dual objective once per n updates (numpy backend only).

    Raises
    ------
    ValueError
        On degenerate single-class data with 0 < alpha_weight < 1.
    ConvergenceError
        When the update budget is exhausted before reaching kkt_tolerance.
    """
    n = data.n
    if n < 2:
        raise ValueError("training requires at least two samples")
    if 0.0 < cfg.alpha_weight < 1.0 and not data.has_both_classes():
        raise ValueError("degenerate training set: both classes required when 0 < alpha_weight < 1")
    K = gram_matrix(cfg.kernel, data) if gram is None else gram
    if K.shape != (n, n):
        raise ValueError("gram matrix shape does not match the dataset")
    y = data.labels.astype(np.float64)
    caps = box_caps(data.labels, cfg.alpha_weight, cfg.lambda_)
    if warm_start is not None:
        mu = _feasible_warm_start(warm_start, y, caps)
    else:
        mu = np.zeros(n)
    if cfg.max_passes is not None:
        base_budget = cfg.max_passes * n
    else:
        # 10n sweeps, with a floor so small hard problems (large caps on a
        # rank-deficient gram) are not cut off mid-zigzag
        base_budget = max(10 * n * n, 1_000_000)
    backend = active_backend()
    tol = cfg.kkt_tolerance
    budget = base_budget
    used = 0
    rounds = 0
    best = None  # last iterate meeting cfg.kkt_tolerance
    trace_all = [] if record_passes else None
    while True:
        mu, G, upd, residual, status, trace = _smo.solve(
            K, y, caps, tol, budget - used, mu, backend, record_passes)
        used += upd
        if trace_all is not None and trace:
            trace_all.extend(trace)
        bias = _bias_from_gradient(mu, G, y, caps, cfg.alpha_weight)
        gap, primal = _gap_and_primal(mu, G, y, caps, bias)
        if status == _smo.CONVERGED:
            best = (mu.copy(), G.copy(), bias, residual)
            if gap <= GAP_TOLERANCE * (primal + 1.0) or rounds >= 5:
                break
            # pair criterion met but the gap is loose: tighten with fresh budget
            rounds += 1
            tol *= 0.25
            budget += base_budget
            continue
        if best is not None or residual <= cfg.kkt_tolerance:
            break
        partial = _build_model(data, cfg, mu, G, bias, residual, used, trace_all)
        raise ConvergenceError(
            f"no convergence after {used} pair updates (KKT residual {residual:.3g})",
            model=partial, kkt_residual=float(residual))
    if best is not None:
        mu, G, bias, residual = best
    return _build_model(data, cfg, mu, G, bias, residual, used, trace_all)


def _build_model(data, cfg, mu, G, bias, residual, n_updates, trace):
    y = data.labels.astype(np.float64)
    dual_coefs = y * mu
    linear_w = data.features.T @ dual_coefs if cfg.kernel.family == "linear" else None
    return WsvmModel(
        dual_coefs=dual_coefs,
        bias=float(bias),
        support_indices=np.flatnonzero(mu > 0.0),
        kernel=cfg.kernel,
        alpha_weight=cfg.alpha_weight,
        lambda_=cfg.lambda_,
        train_features=data.features,
        kkt_residual=float(max(residual, 0.0)),
        dual_objective=_smo.dual_objective_from_gradient(mu, G),
        n_updates=int(n_updates),
        linear_weights=linear_w,
        objective_trace=trace,
    )


def decision_values(model: WsvmModel, X) -> np.ndarray:
    """f(x) for each row of X."""
    X = X.features if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.train_features.shape[1]:
        raise ValueError("dimension mismatch between query points and training features")
    if model.linear_weights is not None:
        return X @ model.linear_weights + model.bias
    sv = model.support_indices
    if sv.size == 0:
        return np.full(X.shape[0], model.bias)
    Kx = kernel_matrix(model.kernel, X, model.train_features[sv])
    return Kx @ model.dual_coefs[sv] + model.bias


def decision_value(model: WsvmModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a single feature vector")
    return float(decision_values(model, x[None, :])[0])


def classify(model: WsvmModel, X) -> np.ndarray:
    """sign(f(x)) with sign(0) = +1."""
    return np.where(decision_values(model, X) >= 0.0, 1, -1)


def decision_matrix(models, X) -> np.ndarray:
    """Decision values of several models at X, shape (len(X), len(models)).

    Models fitted on the same training set (as in a weight sweep) share one
    cross-kernel block, which makes evaluating large truth sets cheap.
    """
    X = X.features if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)
    if not models:
        raise ValueError("no models given")
    first = models[0]
    shared = all(m.train_features is first.train_features and m.kernel == first.kernel for m in models)
    if not shared:
        return np.column_stack([decision_values(m, X) for m in models])
    biases = np.array([m.bias for m in models])
    if first.linear_weights is not None:
        W = np.column_stack([m.linear_weights for m in models])
        return X @ W + biases
    coefs = np.column_stack([m.dual_coefs for m in models])
    Kx = kernel_matrix(first.kernel, X, first.train_features)
    return Kx @ coefs + biases


def primal_objective(model: WsvmModel, data: Dataset) -> float:
    """0.5 ||f||^2 + sum_i cap_i * hinge_i, recomputed from scratch."""
    caps = box_caps(data.labels, model.alpha_weight, model.lambda_)
    f = decision_values(model, data)
    xi = np.maximum(0.0, 1.0 - data.labels * f)
    sv = model.support_indices
    if sv.size:
        Ksv = kernel_matrix(model.kernel, model.train_features[sv], model.train_features[sv])
        norm_sq = float(model.dual_coefs[sv] @ Ksv @ model.dual_coefs[sv])
    else:
        norm_sq = 0.0
    return 0.5 * norm_sq + float(caps @ xi)


def duality_gap(model: WsvmModel, data: Dataset) -> float:
    """primal - dual; nonnegative up to round-off at an optimum."""
    return primal_objective(model, data) - model.dual_objective
