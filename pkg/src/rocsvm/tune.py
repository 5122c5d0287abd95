"""Cross-validated selection of the penalty (and gaussian bandwidth) at alpha = 0.5.

The selected pair is reused across the whole weight grid; per-weight tuning
is deliberately not supported.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .kernels import KernelSpec, gram_matrix
from .solver import ConvergenceError, TrainConfig, classify, fit

TUNE_ALPHA = 0.5


def default_lambda_grid(n: int) -> list[float]:
    """2^k / (2n) for k = -8..8, i.e. box caps C from 2^8 down to 2^-8."""
    return [2.0**k / (2.0 * n) for k in range(-8, 9)]


def default_gamma_grid(p: int) -> list[float]:
    """2^k / p for k = -4..4 around the 1/p heuristic."""
    return [2.0**k / p for k in range(-4, 5)]


@dataclass(frozen=True)
class TuneGrid:
    lambda_candidates: tuple = ()
    gamma_candidates: tuple = ()
    n_folds: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError("n_folds must be at least 2")
        object.__setattr__(self, "lambda_candidates", tuple(sorted(self.lambda_candidates)))
        object.__setattr__(self, "gamma_candidates", tuple(sorted(self.gamma_candidates)))
        if any(l <= 0 for l in self.lambda_candidates) or any(g <= 0 for g in self.gamma_candidates):
            raise ValueError("candidates must be positive")


@dataclass
class TuneResult:
    lambda_: float
    kernel: KernelSpec
    cv_errors: list = field(default_factory=list)  # dicts: lambda, gamma, error
    n_folds_used: int = 0


def stratified_folds(labels: np.ndarray, n_folds: int, rng: np.random.Generator):
    """Round-robin fold assignment per class after a seeded shuffle."""
    folds = [[] for _ in range(n_folds)]
    for label in (-1, 1):
        idx = np.flatnonzero(labels == label)
        idx = idx[rng.permutation(idx.size)]
        for rank, sample in enumerate(idx):
            folds[rank % n_folds].append(sample)
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def cv_tune(train: Dataset, kernel_family: str, grid: TuneGrid | None = None,
            rng: np.random.Generator | None = None) -> TuneResult:
    """Pick (lambda, kernel) minimising the mean CV weighted error at alpha = 0.5.

    Folds are stratified by label.  Ties break toward the smaller lambda,
    then the smaller gamma.  With heavy imbalance the fold count is reduced
    (with a warning) so every fold keeps both classes.
    """
    if not train.has_both_classes():
        raise ValueError("tuning requires both classes")
    grid = grid or TuneGrid()
    lambdas = grid.lambda_candidates or tuple(default_lambda_grid(train.n))
    if kernel_family == "gaussian":
        gammas = grid.gamma_candidates or tuple(default_gamma_grid(train.p))
    else:
        gammas = (None,)
    min_class = min(train.n_positive, train.n_negative)
    n_folds = min(grid.n_folds, min_class)
    if n_folds < grid.n_folds:
        warnings.warn(f"reducing folds from {grid.n_folds} to {n_folds} to keep classes in every fold")
    if n_folds < 2 or train.n < n_folds:
        raise ValueError("not enough samples per class for cross-validation")
    if rng is None:
        from .rngs import make_rng

        rng = make_rng(grid.rng_seed)
    folds = stratified_folds(train.labels, n_folds, rng)
    all_idx = np.arange(train.n)
    fold_errors = {(lam, gam): [] for gam in gammas for lam in lambdas}
    for fold in folds:
        val_mask = np.zeros(train.n, dtype=bool)
        val_mask[fold] = True
        fit_data = train.subset(all_idx[~val_mask])
        val_data = train.subset(fold)
        for gam in gammas:
            kernel = _make_kernel(kernel_family, gam)
            gram = gram_matrix(kernel, fit_data)
            mu_prev = None
            # descending lambda = ascending cap, so warm starts stay feasible
            for lam in sorted(lambdas, reverse=True):
                cfg = TrainConfig(alpha_weight=TUNE_ALPHA, lambda_=lam, kernel=kernel)
                try:
                    model = fit(fit_data, cfg, gram=gram, warm_start=mu_prev)
                except ConvergenceError as err:
                    # score the carried best iterate; an extreme candidate
                    # that cannot be solved cleanly earns its bad CV error
                    model = err.model
                mu_prev = model.multipliers
                miss = classify(model, val_data) != val_data.labels
                fold_errors[(lam, gam)].append(0.5 * float(np.mean(miss)))
    means = {key: float(np.mean(vals)) for key, vals in fold_errors.items()}
    report = [{"lambda": lam, "gamma": gam, "cv_error": means[(lam, gam)]}
              for gam in gammas for lam in lambdas]
    # ties resolved toward smaller lambda, then smaller gamma.  CV errors are
    # fold averages, so "tied" means indistinguishable at the Monte Carlo
    # resolution of the folds: within one standard error of the minimum.
    best_key = min(means, key=lambda key: (means[key], key[0], key[1] or 0.0))
    errs = fold_errors[best_key]
    tol = float(np.std(errs, ddof=1) / np.sqrt(len(errs))) if len(errs) > 1 else 0.0
    eligible = [key for key in means if means[key] <= means[best_key] + tol]
    best_lam, best_gam = min(eligible, key=lambda key: (key[0], key[1] or 0.0))
    return TuneResult(lambda_=best_lam, kernel=_make_kernel(kernel_family, best_gam),
                      cv_errors=report, n_folds_used=n_folds)


def _make_kernel(family: str, gamma) -> KernelSpec:
    if family == "gaussian":
        return KernelSpec(family="gaussian", bandwidth_gamma=gamma)
    return KernelSpec(family=family)
