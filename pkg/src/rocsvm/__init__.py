"""Cost-weighted SVM training, ROC curves from weight sweeps, and bootstrap bands."""

__version__ = "0.1.0"

from .bands import (BandSpec, ConfidenceBand, band_area, bootstrap_weights, build_band,
                    covers, default_z_grid, weighted_se_sp)
from .baselines import LogisticModel, fit_logistic, logistic_roc, predict_proba
from .data import Dataset, stratified_split
from .kernels import KernelSpec, gram_matrix, kernel_eval, kernel_matrix
from .roc import (OperatingPoint, RocCurve, SweepResult, auc, estimate_se_sp,
                  interpolate_tpf, select_operating_point, sweep)
from .solver import (ConvergenceError, TrainConfig, WsvmModel, classify, cost_weight,
                     decision_value, decision_values, duality_gap, fit, primal_objective)
from .synth import (ExperimentConfig, ExperimentResult, GenModel, bayes_classify,
                    default_alpha_grid, generate, positive_probability, run_experiment,
                    true_roc, weighted_risk)
from .tune import TuneGrid, TuneResult, cv_tune

__all__ = [
    "BandSpec", "ConfidenceBand", "ConvergenceError", "Dataset", "ExperimentConfig",
    "ExperimentResult", "GenModel", "KernelSpec", "LogisticModel", "OperatingPoint",
    "RocCurve", "SweepResult", "TrainConfig", "TuneGrid", "TuneResult", "WsvmModel",
    "auc", "band_area", "bayes_classify", "bootstrap_weights", "build_band", "classify",
    "cost_weight", "covers", "cv_tune", "decision_value", "decision_values",
    "default_alpha_grid", "default_z_grid", "duality_gap", "estimate_se_sp", "fit",
    "fit_logistic", "generate", "gram_matrix", "interpolate_tpf", "kernel_eval",
    "kernel_matrix", "logistic_roc", "positive_probability", "predict_proba",
    "primal_objective", "run_experiment", "select_operating_point", "stratified_split",
    "sweep", "true_roc", "weighted_risk", "weighted_se_sp",
]
