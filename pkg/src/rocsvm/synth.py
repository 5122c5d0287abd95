"""Generative models, the Bayes-rule oracle, and the Monte Carlo runner.

Features are a two-component Gaussian mixture: X ~ N_p(mu * Z, sigma^2 I)
with Z the all-ones vector with probability q and all-minus-ones otherwise.
Labels are +1 with probability expit(index(X)), where the index is X'beta
(linear form) or X'beta + X1^2 + X2^2 + 4 X1 X2 (nonlinear form).  Because
the conditional class probability is available in closed form, the Bayes
rule at any cost weight is computable and serves as the oracle for
consistency checks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bands import BandSpec, band_area, build_band, covers
from .baselines import classify_at, fit_logistic, logistic_roc
from .data import Dataset, stratified_split
from .rngs import make_rng, standard_normal, substream, uniform_open
from .roc import auc, interp_roc, se_sp_from_predictions, select_operating_point, sweep
from .solver import TrainConfig, classify, decision_matrix, fit
from .tune import TuneGrid, cv_tune

METHODS = ("svm_linear", "svm_gaussian", "logistic")


def default_alpha_grid(m: int = 99) -> np.ndarray:
    return np.linspace(0.01, 0.99, m)


def default_beta(p: int) -> tuple:
    """(2, 1, ..., 1) up to five entries, zero-padded beyond."""
    lead = [2.0] + [1.0] * (min(p, 5) - 1)
    return tuple(lead + [0.0] * (p - 5) if p > 5 else lead)


@dataclass(frozen=True)
class GenModel:
    p: int
    q: float
    mu: float = 0.25
    sigma: float = 0.75
    beta: tuple | None = None
    form: str = "linear"

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.form not in ("linear", "nonlinear"):
            raise ValueError("form must be 'linear' or 'nonlinear'")
        if self.form == "nonlinear" and self.p < 2:
            raise ValueError("nonlinear form needs p >= 2")
        beta = self.beta if self.beta is not None else default_beta(self.p)
        beta = tuple(float(b) for b in beta)
        if len(beta) != self.p or not all(np.isfinite(beta)):
            raise ValueError("beta must be a finite length-p vector")
        object.__setattr__(self, "beta", beta)

    @property
    def beta_array(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=np.float64)


def _expit(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def positive_probability(model: GenModel, X) -> np.ndarray:
    """P(A = +1 | X) in closed form."""
    X = np.asarray(X, dtype=np.float64)
    index = X @ model.beta_array
    if model.form == "nonlinear":
        index = index + X[:, 0] ** 2 + X[:, 1] ** 2 + 4.0 * X[:, 0] * X[:, 1]
    return _expit(index)


def generate(model: GenModel, n: int, rng: np.random.Generator) -> Dataset:
    """n i.i.d. draws from the generative model."""
    z = np.where(uniform_open(rng, n) < model.q, 1.0, -1.0)
    X = model.mu * z[:, None] + model.sigma * standard_normal(rng, (n, model.p))
    pi = positive_probability(model, X)
    labels = np.where(uniform_open(rng, n) < pi, 1, -1)
    return Dataset(X, labels)


def bayes_classify(model: GenModel, X, alpha_weight: float) -> np.ndarray:
    """Risk-optimal rule: +1 iff alpha * pi(x) >= (1 - alpha)(1 - pi(x))."""
    pi = positive_probability(model, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    out = np.where(alpha_weight * pi >= (1.0 - alpha_weight) * (1.0 - pi), 1, -1)
    return out


def weighted_risk(labels, preds, alpha_weight: float) -> float:
    """Empirical cost-weighted misclassification E_n[1(miss) * C_A(alpha)]."""
    labels = np.asarray(labels)
    cost = np.where(labels == 1, alpha_weight, 1.0 - alpha_weight)
    return float(np.mean(cost * (np.asarray(preds) != labels)))


@dataclass(frozen=True)
class TrueRoc:
    z: np.ndarray
    tpf: np.ndarray


def _true_curve(models, truth: Dataset, z_grid) -> TrueRoc:
    preds = np.where(decision_matrix(models, truth) >= 0.0, 1, -1)
    pos = truth.labels == 1
    se = (preds[pos] == 1).mean(axis=0)
    sp = (preds[~pos] == -1).mean(axis=0)
    z = np.asarray(z_grid, dtype=np.float64)
    return TrueRoc(z=z, tpf=interp_roc(1.0 - sp, se, z))


def true_roc(model: GenModel, models, truth_set_size: int, rng: np.random.Generator,
             z_grid) -> TrueRoc:
    """se/sp of each grid model on a large fresh sample, on the band's z grid."""
    truth = generate(model, truth_set_size, rng)
    if not truth.has_both_classes():
        truth = generate(model, truth_set_size, rng)
        if not truth.has_both_classes():
            raise RuntimeError("truth set degenerate twice in a row")
    return _true_curve(models, truth, z_grid)


@dataclass(frozen=True)
class ExperimentConfig:
    model: GenModel
    n: int
    replications: int = 100
    methods: tuple = METHODS
    alpha_grid: tuple | None = None  # None means the default 99-point grid
    band_spec: BandSpec | None = None
    truth_set_size: int = 100000
    rng_seed: int = 0
    train_fraction: float = 0.7
    n_folds: int = 5

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n < 20:
            raise ValueError("n must be at least 20")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; expected subset of {METHODS}")
        if self.alpha_grid is not None:
            object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))

    def alphas(self) -> np.ndarray:
        if self.alpha_grid is None:
            return default_alpha_grid()
        return np.asarray(self.alpha_grid, dtype=np.float64)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    metrics: dict  # method -> metric -> (mean, sd)
    n_used: int
    failures: list

    def rows(self):
        m = self.config.model
        for method, metrics in self.metrics.items():
            for name, (mean, sd) in metrics.items():
                yield {"n": self.config.n, "p": m.p, "q": m.q, "form": m.form,
                       "method": method, "metric": name, "mean": mean, "sd": sd}


def resolve_threads(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    return max(1, min(4, os.cpu_count() or 1))


def _band_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence((seed, rep, 3)).generate_state(1)[0])


def _replicate(cfg: ExperimentConfig, rep: int) -> dict:
    seed = cfg.rng_seed
    data = generate(cfg.model, cfg.n, substream(seed, rep, 0))
    train, test = stratified_split(data, cfg.train_fraction, substream(seed, rep, 1))
    alphas = cfg.alphas()
    truth_data = None
    out = {}
    for mi, method in enumerate(cfg.methods):
        met = {}
        if method == "logistic":
            lm = fit_logistic(train)
            curve = logistic_roc(lm, test)
            met["auc"] = auc(curve)
            op = select_operating_point(curve, "closest_to_corner")
            met["se_optimal"], met["sp_optimal"] = op.sensitivity, op.specificity
            se_u, sp_u = se_sp_from_predictions(test.labels, classify_at(lm, test, 0.5))
            met["se_unweighted"], met["sp_unweighted"] = se_u, sp_u
        else:
            family = "linear" if method == "svm_linear" else "gaussian"
            tuned = cv_tune(train, family, TuneGrid(n_folds=cfg.n_folds),
                            rng=substream(seed, rep, 2, mi))
            base = TrainConfig(alpha_weight=0.5, lambda_=tuned.lambda_, kernel=tuned.kernel)
            sw = sweep(train, test, base, alphas)
            met["auc"] = auc(sw.curve)
            op = select_operating_point(sw.curve, "closest_to_corner")
            met["se_optimal"], met["sp_optimal"] = op.sensitivity, op.specificity
            half = fit(train, base)
            se_u, sp_u = se_sp_from_predictions(test.labels, classify(half, test))
            met["se_unweighted"], met["sp_unweighted"] = se_u, sp_u
            if cfg.band_spec is not None:
                spec = replace(cfg.band_spec, rng_seed=_band_seed(seed, rep))
                band = build_band(sw.models, test, spec)
                if truth_data is None:
                    rng_truth = substream(seed, rep, 4)
                    truth_data = generate(cfg.model, cfg.truth_set_size, rng_truth)
                    if not truth_data.has_both_classes():
                        truth_data = generate(cfg.model, cfg.truth_set_size, rng_truth)
                truth_curve = _true_curve(sw.models, truth_data, spec.z_grid)
                met["coverage"] = float(covers(band, truth_curve.tpf))
                met["band_area"] = band_area(band)
        out[method] = met
    return out


def run_experiment(cfg: ExperimentConfig, n_threads: int | None = None) -> ExperimentResult:
    """Run the replications, aggregate means and Monte Carlo SDs.

    Replications are independent given their seed substreams and run in a
    thread pool; per-replication failures are recorded and the run aborts
    if more than 5% fail.
    """
    workers = resolve_threads(n_threads)
    results: list = [None] * cfg.replications
    failures = []

    def job(rep):
        try:
            results[rep] = _replicate(cfg, rep)
        except Exception as err:  # noqa: BLE001 - failure policy needs the message
            failures.append((rep, f"{type(err).__name__}: {err}"))

    if workers == 1 or cfg.replications == 1:
        for rep in range(cfg.replications):
            job(rep)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, range(cfg.replications)))
    if len(failures) > 0.05 * cfg.replications:
        detail = "; ".join(f"rep {r}: {m}" for r, m in sorted(failures)[:5])
        raise RuntimeError(f"{len(failures)} of {cfg.replications} replications failed: {detail}")
    used = [r for r in results if r is not None]
    metrics: dict = {}
    for method in cfg.methods:
        per_metric: dict = {}
        for name in used[0][method]:
            vals = np.array([r[method][name] for r in used])
            sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
            per_metric[name] = (float(np.mean(vals)), sd)
        metrics[method] = per_metric
    return ExperimentResult(config=cfg, metrics=metrics, n_used=len(used),
                            failures=sorted(failures))


# --- presets mirroring the simulation tables -------------------------------

PAPER_NS = (250, 500)
PAPER_PS = (2, 5, 10)
PAPER_QS = (0.05, 0.25)

TABLE_PRESETS = {
    "table1": {"forms": ("nonlinear",), "methods": ("svm_linear", "svm_gaussian", "logistic"),
               "metrics": ("auc",), "bands": False},
    "table3": {"forms": ("linear", "nonlinear"), "methods": ("svm_linear",),
               "metrics": ("coverage", "band_area"), "bands": True},
    "table4": {"forms": ("nonlinear",), "methods": ("svm_linear", "svm_gaussian", "logistic"),
               "metrics": ("se_optimal", "sp_optimal"), "bands": False},
    "table5": {"forms": ("linear",), "methods": ("svm_linear", "svm_gaussian", "logistic"),
               "metrics": ("auc",), "bands": False},
    "table6": {"forms": ("nonlinear",), "methods": ("svm_linear", "svm_gaussian"),
               "metrics": ("se_unweighted", "sp_unweighted"), "bands": False},
    "table7": {"forms": ("linear",), "methods": ("svm_linear", "svm_gaussian", "logistic"),
               "metrics": ("se_optimal", "sp_optimal"), "bands": False},
    "table8": {"forms": ("linear",), "methods": ("svm_linear", "svm_gaussian"),
               "metrics": ("se_unweighted", "sp_unweighted"), "bands": False},
}


def preset_configs(table: str, cell: dict | None = None, replications: int = 100,
                   seed: int = 0, n_boot: int = 1000, gamma_bar: float = 0.10,
                   truth_set_size: int = 100000):
    """Experiment configs for one results table, optionally restricted to a cell.

    cell accepts keys n, p, q and (for multi-form tables) model.  Returns
    (configs, metric names to report).
    """
    if table not in TABLE_PRESETS:
        raise ValueError(f"unknown table {table!r}; expected one of {sorted(TABLE_PRESETS)}")
    preset = TABLE_PRESETS[table]
    cell = cell or {}
    forms = preset["forms"]
    if "model" in cell:
        if cell["model"] not in forms:
            raise ValueError(f"{table} has no {cell['model']!r} column")
        forms = (cell["model"],)
    ns = (int(cell["n"]),) if "n" in cell else PAPER_NS
    ps = (int(cell["p"]),) if "p" in cell else PAPER_PS
    qs = (float(cell["q"]),) if "q" in cell else PAPER_QS
    band = BandSpec(n_boot=n_boot, gamma_bar=gamma_bar) if preset["bands"] else None
    configs = []
    for form in forms:
        for n in ns:
            for p in ps:
                for q in qs:
                    configs.append(ExperimentConfig(
                        model=GenModel(p=p, q=q, form=form), n=n,
                        replications=replications, methods=preset["methods"],
                        band_spec=band, truth_set_size=truth_set_size, rng_seed=seed))
    return configs, preset["metrics"]
