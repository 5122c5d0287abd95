"""ROC curves from weight sweeps: se/sp estimation, AUC, operating points.

A curve is a sequence of (alpha, fpf, tpf) grid points.  AUC integrates the
point multiset sorted by (fpf, tpf) with the corners (0,0) and (1,1)
appended, which reproduces the Mann-Whitney statistic exactly for
threshold-sweep curves.  Interpolation uses the upper envelope: duplicate
fpf values keep the maximum tpf, and queries extend to the corners.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .solver import ConvergenceError, TrainConfig, WsvmModel, decision_matrix, fit

CRITERIA = ("closest_to_corner", "youden", "max_se_at_min_sp")


@dataclass(frozen=True)
class RocCurve:
    alphas: np.ndarray
    fpf: np.ndarray
    tpf: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        fpf = np.asarray(self.fpf, dtype=np.float64)
        tpf = np.asarray(self.tpf, dtype=np.float64)
        if not (alphas.ndim == 1 and alphas.shape == fpf.shape == tpf.shape):
            raise ValueError("alphas, fpf, tpf must be 1-D arrays of equal length")
        if alphas.size == 0:
            raise ValueError("curve needs at least one point")
        if np.any(np.diff(alphas) <= 0):
            raise ValueError("alphas must be strictly increasing")
        for name, arr in (("alphas", alphas), ("fpf", fpf), ("tpf", tpf)):
            if np.any((arr < 0) | (arr > 1)) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} values must lie in [0, 1]")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "fpf", fpf)
        object.__setattr__(self, "tpf", tpf)

    def __len__(self) -> int:
        return self.alphas.size


@dataclass(frozen=True)
class OperatingPoint:
    alpha_star: float
    sensitivity: float
    specificity: float
    criterion: str


@dataclass
class SweepResult:
    curve: RocCurve
    models: list


def se_sp_from_predictions(labels: np.ndarray, preds: np.ndarray):
    """Empirical sensitivity and specificity from +/-1 labels and predictions."""
    pos = labels == 1
    n_pos = int(np.count_nonzero(pos))
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("se/sp undefined: test set must contain both classes")
    se = float(np.count_nonzero(pos & (preds == 1)) / n_pos)
    sp = float(np.count_nonzero(~pos & (preds == -1)) / n_neg)
    return se, sp


def estimate_se_sp(model: WsvmModel, test: Dataset):
    from .solver import classify

    return se_sp_from_predictions(test.labels, classify(model, test))


def sweep(train: Dataset, test: Dataset, base_cfg: TrainConfig, alpha_grid,
          warm_start: bool = True) -> SweepResult:
    """Fit one model per grid weight and assemble the test-set ROC curve.

    The penalty and kernel are held fixed across the grid; consecutive fits
    are warm-started from the previous multipliers (clipped to the new box)
    unless warm_start is False.
    """
    alphas = np.asarray(alpha_grid, dtype=np.float64)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alpha_grid must be a non-empty 1-D sequence")
    if np.any((alphas < 0) | (alphas > 1)) or np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha_grid must be strictly increasing within [0, 1]")
    if not test.has_both_classes():
        raise ValueError("se/sp undefined: test set must contain both classes")
    from .kernels import gram_matrix

    gram = gram_matrix(base_cfg.kernel, train)
    models = []
    mu_prev = None
    for a in alphas:
        cfg_a = replace(base_cfg, alpha_weight=float(a))
        try:
            model = fit(train, cfg_a, gram=gram, warm_start=mu_prev)
        except ConvergenceError as err:
            raise ConvergenceError(f"sweep failed at alpha={a:g}: {err}",
                                   model=err.model, kkt_residual=err.kkt_residual) from err
        except ValueError as err:
            raise ValueError(f"sweep failed at alpha={a:g}: {err}") from err
        models.append(model)
        if warm_start:
            mu_prev = model.multipliers
    preds = np.where(decision_matrix(models, test) >= 0.0, 1, -1)
    pos = test.labels == 1
    se = (preds[pos] == 1).mean(axis=0)
    sp = (preds[~pos] == -1).mean(axis=0)
    curve = RocCurve(alphas=alphas, fpf=1.0 - sp, tpf=se)
    return SweepResult(curve=curve, models=models)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area over fpf-sorted points with (0,0), (1,1) appended."""
    order = np.lexsort((curve.tpf, curve.fpf))
    x = np.concatenate(([0.0], curve.fpf[order], [1.0]))
    y = np.concatenate(([0.0], curve.tpf[order], [1.0]))
    return float(np.trapezoid(y, x))


def roc_envelope(fpf, tpf):
    """Interpolation support: distinct fpf with max tpf, corner-anchored."""
    f = np.concatenate((np.asarray(fpf, dtype=np.float64), [0.0, 1.0]))
    t = np.concatenate((np.asarray(tpf, dtype=np.float64), [0.0, 1.0]))
    order = np.lexsort((t, f))
    f = f[order]
    t = t[order]
    last = np.flatnonzero(np.concatenate((f[1:] != f[:-1], [True])))
    return f[last], t[last]


def interp_roc(fpf, tpf, z):
    xs, ys = roc_envelope(fpf, tpf)
    return np.interp(z, xs, ys)


def interpolate_tpf(curve: RocCurve, z):
    """tpf at false-positive fraction z by linear interpolation."""
    z = np.asarray(z, dtype=np.float64)
    if np.any((z < 0) | (z > 1)):
        raise ValueError("z must lie in [0, 1]")
    out = interp_roc(curve.fpf, curve.tpf, z)
    return float(out) if out.ndim == 0 else out


def select_operating_point(curve: RocCurve, criterion: str, min_sp: float | None = None) -> OperatingPoint:
    """Pick the grid point optimising the criterion; ties go to smaller alpha."""
    se = curve.tpf
    sp = 1.0 - curve.fpf
    if criterion == "closest_to_corner":
        idx = int(np.argmin(curve.fpf**2 + (1.0 - curve.tpf) ** 2))
    elif criterion == "youden":
        idx = int(np.argmax(se + sp))
    elif criterion == "max_se_at_min_sp":
        if min_sp is None or not 0.0 <= min_sp <= 1.0:
            raise ValueError("max_se_at_min_sp requires min_sp in [0, 1]")
        feasible = sp >= min_sp
        if not feasible.any():
            raise ValueError(f"no curve point has specificity >= {min_sp:g}")
        masked = np.where(feasible, se, -np.inf)
        idx = int(np.argmax(masked))
    else:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    return OperatingPoint(alpha_star=float(curve.alphas[idx]), sensitivity=float(se[idx]),
                          specificity=float(sp[idx]), criterion=criterion)
