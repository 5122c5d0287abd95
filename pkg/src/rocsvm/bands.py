"""Quantile-bootstrap simultaneous confidence bands for swept ROC curves.

The fitted grid models are never refit: each bootstrap replicate reweights
the test-set empirical measure with normalised exponential (or multinomial)
weights, recomputes se/sp per grid weight from cached classifications,
interpolates the reweighted curve onto a fixed fpf grid, and the band is the
widest central-quantile envelope that still contains a (1 - gamma_bar)
fraction of the replicate curves at every grid point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .rngs import make_rng, standard_exponential
from .roc import interp_roc, se_sp_from_predictions
from .solver import decision_matrix

WEIGHT_SCHEMES = ("exponential", "multinomial", "constant")


def default_z_grid() -> np.ndarray:
    """99 uniform points on [0.01, 0.99] plus the endpoint 1.0."""
    return np.concatenate((np.linspace(0.01, 0.99, 99), [1.0]))


@dataclass(frozen=True)
class BandSpec:
    n_boot: int = 1000
    gamma_bar: float = 0.10
    z_grid: np.ndarray = field(default_factory=default_z_grid)
    weight_scheme: str = "exponential"
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_boot < 1:
            raise ValueError("n_boot must be positive")
        if not 0.0 < self.gamma_bar < 1.0:
            raise ValueError("gamma_bar must lie in (0, 1)")
        z = np.asarray(self.z_grid, dtype=np.float64)
        if z.ndim != 1 or z.size < 2 or np.any(np.diff(z) <= 0):
            raise ValueError("z_grid must be strictly increasing")
        if not 0.0 < z[0] < 0.5:
            raise ValueError("z_grid must start at delta in (0, 1/2)")
        if z[-1] != 1.0:
            raise ValueError("z_grid must end at 1")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ValueError(f"weight_scheme must be one of {WEIGHT_SCHEMES}")
        object.__setattr__(self, "z_grid", z)


@dataclass
class ConfidenceBand:
    z_grid: np.ndarray
    y_lower: np.ndarray
    y_hat: np.ndarray
    y_upper: np.ndarray
    p_star: float
    n_usable: int
    spec: BandSpec


def bootstrap_weights(scheme: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """One replicate's weight vector.

    exponential: i.i.d. standard exponentials divided by their sample mean,
    so the weights average exactly one.  multinomial: counts of n equally
    likely trials, summing to n.  constant: all ones (diagnostic scheme that
    collapses the bootstrap onto the point estimate).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if scheme == "exponential":
        xi = standard_exponential(rng, n)
        return xi / xi.mean()
    if scheme == "multinomial":
        return rng.multinomial(n, np.full(n, 1.0 / n)).astype(np.float64)
    if scheme == "constant":
        return np.ones(n)
    raise ValueError(f"unknown weight scheme {scheme!r}")


def classification_matrix(models, data: Dataset) -> np.ndarray:
    """Cached +/-1 classifications, shape (n_test, n_models)."""
    return np.where(decision_matrix(models, data) >= 0.0, 1, -1)


def _weighted_rates(preds, labels, W):
    """Weighted se/sp per replicate row of W; returns (se, sp, valid)."""
    pos = (labels == 1).astype(np.float64)
    neg = 1.0 - pos
    p_pos = (preds == 1).astype(np.float64)
    p_neg = 1.0 - p_pos
    den_pos = W @ pos
    den_neg = W @ neg
    valid = (den_pos > 0.0) & (den_neg > 0.0)
    den_pos = np.where(den_pos > 0.0, den_pos, 1.0)
    den_neg = np.where(den_neg > 0.0, den_neg, 1.0)
    # numerator and denominator sum the same terms in different groupings,
    # so round-off can push a ratio one ulp past 1
    se = np.minimum(((W * pos) @ p_pos) / den_pos[:, None], 1.0)
    sp = np.minimum(((W * neg) @ p_neg) / den_neg[:, None], 1.0)
    return se, sp, valid


def weighted_se_sp(models, test: Dataset, weights):
    """Weighted analogues of the empirical se/sp, one value per grid model."""
    W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 1 or W.shape[0] != test.n:
        raise ValueError("weights must be a vector with one entry per test sample")
    if np.any(W < 0):
        raise ValueError("weights must be nonnegative")
    preds = classification_matrix(models, test)
    se, sp, valid = _weighted_rates(preds, test.labels, W[None, :])
    if not valid[0]:
        raise ValueError("zero weighted mass on a class; replicate is degenerate")
    return se[0], sp[0]


def _quantile_indices(j: int, B: int):
    """Order-statistic indices for the central band at p = j / (2B).

    Type-1 (right-continuous) empirical quantiles: the p-quantile of B sorted
    values is entry ceil(p * B), computed in integer arithmetic.
    """
    lo = max((j + 3) // 4 - 1, 0)
    hi = B - (j // 4) - 1
    return lo, hi


def _p_star_search(Y: np.ndarray, gamma_bar: float):
    """Largest achievable p whose central quantile band jointly holds a
    (1 - gamma_bar) fraction of the bootstrap curves."""
    B = Y.shape[0]
    Ysort = np.sort(Y, axis=0)
    need = (1.0 - gamma_bar) * B - 1e-9

    def count_inside(j):
        lo, hi = _quantile_indices(j, B)
        return int(((Y >= Ysort[lo]) & (Y <= Ysort[hi])).all(axis=1).sum())

    lo_j, hi_j = 0, 2 * B
    while lo_j < hi_j:
        mid = (lo_j + hi_j + 1) // 2
        if count_inside(mid) >= need:
            lo_j = mid
        else:
            hi_j = mid - 1
    # the inside fraction is non-increasing in p; check the boundary we found
    assert count_inside(lo_j) >= need
    assert lo_j == 2 * B or count_inside(lo_j + 1) < need
    lo, hi = _quantile_indices(lo_j, B)
    return lo_j / (2.0 * B), Ysort[lo].copy(), Ysort[hi].copy()


def band_from_predictions(preds: np.ndarray, labels: np.ndarray, spec: BandSpec) -> ConfidenceBand:
    """Band for an arbitrary classifier family given cached +/-1 predictions."""
    n = labels.shape[0]
    if preds.shape[0] != n:
        raise ValueError("prediction matrix and labels disagree on n")
    z = spec.z_grid
    se0, sp0, ok0 = _weighted_rates(preds, labels, np.ones((1, n)))
    if not ok0[0]:
        raise ValueError("se/sp undefined: test set must contain both classes")
    y_hat = interp_roc(1.0 - sp0[0], se0[0], z)
    B = spec.n_boot
    rng = make_rng(spec.rng_seed)
    if spec.weight_scheme == "exponential":
        xi = standard_exponential(rng, (B, n))
        W = xi / xi.mean(axis=1, keepdims=True)
    elif spec.weight_scheme == "multinomial":
        W = rng.multinomial(n, np.full(n, 1.0 / n), size=B).astype(np.float64)
    else:
        W = np.ones((B, n))
    se, sp, valid = _weighted_rates(preds, labels, W)
    usable = int(valid.sum())
    if usable < (1.0 - spec.gamma_bar) * B - 1e-9:
        raise ValueError(
            f"only {usable} of {B} bootstrap replicates usable after degeneracy exclusion")
    se = se[valid]
    sp = sp[valid]
    Y = np.empty((usable, z.size))
    for b in range(usable):
        Y[b] = interp_roc(1.0 - sp[b], se[b], z)
    p_star, y_lower, y_upper = _p_star_search(Y, spec.gamma_bar)
    return ConfidenceBand(z_grid=z, y_lower=y_lower, y_hat=y_hat, y_upper=y_upper,
                          p_star=p_star, n_usable=usable, spec=spec)


def build_band(models, test: Dataset, spec: BandSpec) -> ConfidenceBand:
    """Band for a sweep's grid models on a held-out test set."""
    return band_from_predictions(classification_matrix(models, test), test.labels, spec)


def band_area(band: ConfidenceBand) -> float:
    """Trapezoidal integral of the band width over the fpf grid."""
    return float(np.trapezoid(band.y_upper - band.y_lower, band.z_grid))


def covers(band: ConfidenceBand, truth_tpf, z_low: float = 0.01, z_high: float = 0.99) -> bool:
    """True iff the curve lies inside the band at every grid point in [z_low, z_high]."""
    truth = np.asarray(truth_tpf, dtype=np.float64)
    if truth.shape != band.z_grid.shape:
        raise ValueError("truth curve must be evaluated on the band's z grid")
    mask = (band.z_grid >= z_low - 1e-12) & (band.z_grid <= z_high + 1e-12)
    return bool(np.all((band.y_lower[mask] <= truth[mask]) & (truth[mask] <= band.y_upper[mask])))
