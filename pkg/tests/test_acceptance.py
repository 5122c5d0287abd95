"""Acceptance gates.

Each test evaluates one release criterion at its stated tolerance and prints
a PASS/FAIL line with the measured values (run with -s or -v to see them).
The simulation-table gates re-run the full Monte Carlo cells, so this module
takes tens of minutes; seeds are fixed, so results are reproducible.
"""

import os
import time

import numpy as np
import pytest

from oracles import active_set_dual_max, mann_whitney_auc
from rocsvm.bands import BandSpec, band_area, band_from_predictions, bootstrap_weights, build_band
from rocsvm.baselines import fit_logistic, logistic_roc, predict_proba
from rocsvm.data import Dataset
from rocsvm.io_cli import write_band_csv
from rocsvm.kernels import KernelSpec, gram_matrix
from rocsvm.roc import auc, estimate_se_sp, sweep
from rocsvm.rngs import make_rng
from rocsvm.solver import TrainConfig, box_caps, classify, fit
from rocsvm.synth import (ExperimentConfig, GenModel, bayes_classify, generate,
                          run_experiment, weighted_risk)
from rocsvm.tune import TuneGrid, cv_tune

SEED = 20260809
THREADS = 2


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def table_cell(form, n, p, q, methods, replications=100, band_spec=None, alpha_grid=None):
    cfg = ExperimentConfig(model=GenModel(p=p, q=q, form=form), n=n,
                           replications=replications, methods=methods,
                           band_spec=band_spec, alpha_grid=alpha_grid, rng_seed=SEED)
    return run_experiment(cfg, n_threads=THREADS)


def test_criterion_1_linear_model_auc_and_runtime():
    t0 = time.time()
    res = table_cell("linear", 500, 2, 0.25, ("svm_linear",))
    elapsed = time.time() - t0
    mean_auc, sd = res.metrics["svm_linear"]["auc"]
    ok = abs(mean_auc - 0.85) <= 0.03 and elapsed <= 20 * 60
    report("criterion 1 (linear-model linear-SVM AUC 0.85±0.03, <=20min)", ok,
           f"mean AUC {mean_auc:.4f} (sd {sd:.3f}) over {res.n_used} reps in {elapsed:.0f}s")


def test_criterion_2_nonlinear_gaussian_auc():
    res = table_cell("nonlinear", 500, 2, 0.25, ("svm_gaussian",))
    mean_auc, sd = res.metrics["svm_gaussian"]["auc"]
    ok = abs(mean_auc - 0.81) <= 0.04
    report("criterion 2 (nonlinear-model gaussian-SVM AUC 0.81±0.04)", ok,
           f"mean AUC {mean_auc:.4f} (sd {sd:.3f})")


def test_criterion_3_noise_variables_degrade_gaussian():
    res = table_cell("nonlinear", 500, 10, 0.25, ("svm_gaussian", "svm_linear"))
    gauss, gsd = res.metrics["svm_gaussian"]["auc"]
    linear, _ = res.metrics["svm_linear"]["auc"]
    ok = abs(gauss - 0.60) <= 0.05 and (linear - gauss) >= 0.10
    report("criterion 3 (p=10 gaussian AUC 0.60±0.05, linear at least 0.10 above)", ok,
           f"gaussian {gauss:.4f} (sd {gsd:.3f}), linear {linear:.4f}, gap {linear - gauss:.4f}")


def test_criterion_4_band_coverage_and_area():
    spec = BandSpec(n_boot=1000, gamma_bar=0.10)
    res = table_cell("linear", 500, 2, 0.25, ("svm_linear",), band_spec=spec)
    coverage, _ = res.metrics["svm_linear"]["coverage"]
    area, _ = res.metrics["svm_linear"]["band_area"]
    t0 = time.time()
    table_cell("linear", 500, 2, 0.25, ("svm_linear",), replications=30,
               band_spec=BandSpec(n_boot=200, gamma_bar=0.10))
    smoke = time.time() - t0
    area_ok = abs(area - 0.22) <= 0.05
    smoke_ok = smoke <= 30 * 60
    coverage_ok = 0.87 <= coverage <= 1.00
    print(f"[{'PASS' if area_ok else 'FAIL'}] criterion 4 area: mean band area {area:.4f} (target 0.22±0.05)")
    print(f"[{'PASS' if smoke_ok else 'FAIL'}] criterion 4 smoke: B=200/30 runs in {smoke:.0f}s (limit 1800s)")
    print(f"[{'PASS' if coverage_ok else 'FAIL'}] criterion 4 coverage: {coverage:.3f} (target [0.87, 1.00])")
    assert area_ok, f"band area {area:.4f} outside 0.22±0.05"
    assert smoke_ok, f"smoke variant took {smoke:.0f}s"
    # Expected red: the exact containment check fails where the empirical
    # curve saturates at 1 while the truth sits just below; the bootstrap
    # cannot widen a saturated rate. Full analysis in the decisions ledger.
    assert coverage_ok, f"coverage {coverage:.3f} outside [0.87, 1.00]"


def test_criterion_5_unweighted_imbalance_effect():
    res = table_cell("linear", 500, 2, 0.05, ("svm_linear",), alpha_grid=(0.5,))
    se, se_sd = res.metrics["svm_linear"]["se_unweighted"]
    sp, sp_sd = res.metrics["svm_linear"]["sp_unweighted"]
    ok = abs(se - 0.63) <= 0.07 and abs(sp - 0.84) <= 0.07
    report("criterion 5 (unweighted q=0.05 se/sp (0.63, 0.84)±0.07)", ok,
           f"se {se:.4f} (sd {se_sd:.3f}), sp {sp:.4f} (sd {sp_sd:.3f})")


def test_criterion_6_solver_oracle_suite():
    rng = np.random.default_rng(SEED)
    worst_rel = 0.0
    worst_kkt = 0.0
    worst_box = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        p = int(rng.integers(1, 3))
        X = rng.normal(size=(n, p))
        labels = np.where(rng.random(n) < 0.5, 1, -1)
        if np.all(labels == labels[0]):
            labels[0] = -labels[0]
        data = Dataset(X, labels)
        alpha = float(rng.uniform(0.05, 0.95))
        lam = float(10 ** rng.uniform(-3, -0.5))
        model = fit(data, TrainConfig(alpha_weight=alpha, lambda_=lam, kernel=KernelSpec("linear")))
        caps = box_caps(data.labels, alpha, lam)
        K = gram_matrix(KernelSpec("linear"), data)
        _, best = active_set_dual_max(K, data.labels.astype(float), caps)
        worst_rel = max(worst_rel, abs(model.dual_objective - best) / max(1.0, abs(best)))
        worst_kkt = max(worst_kkt, model.kkt_residual)
        mu = model.multipliers
        worst_box = max(worst_box, float(np.max(mu - caps)), float(np.max(-mu)))
    ok = worst_rel <= 1e-2 and worst_kkt <= 1e-3 and worst_box <= 1e-12
    report("criterion 6 (200-instance dual oracle suite)", ok,
           f"worst relative objective gap {worst_rel:.2e}, worst KKT {worst_kkt:.2e}, "
           f"worst box violation {worst_box:.2e}")


def test_criterion_7_fisher_consistency_proxy():
    gen = GenModel(p=2, q=0.25, form="linear")
    train = generate(gen, 5000, make_rng(SEED, 71))
    cfg = TrainConfig(alpha_weight=0.5, lambda_=1.0 / (2 * train.n), kernel=KernelSpec("linear"))
    model = fit(train, cfg)
    fresh = generate(gen, 10_000, make_rng(SEED, 72))
    svm_pred = classify(model, fresh)
    bayes_pred = bayes_classify(gen, fresh.features, 0.5)
    agreement = float(np.mean(svm_pred == bayes_pred))
    gap = weighted_risk(fresh.labels, svm_pred, 0.5) - weighted_risk(fresh.labels, bayes_pred, 0.5)
    ok = agreement >= 0.90 and gap <= 0.05
    report("criterion 7 (Bayes-rule agreement >=0.90, risk gap <=0.05)", ok,
           f"agreement {agreement:.4f}, weighted risk gap {gap:.4f}")


def test_criterion_8_bootstrap_mechanics(tmp_path):
    gen = GenModel(p=2, q=0.3)
    data = generate(gen, 150, make_rng(SEED, 81))
    from rocsvm.data import stratified_split

    train, test = stratified_split(data, 0.7, make_rng(SEED, 82))
    cfg = TrainConfig(alpha_weight=0.5, lambda_=1.0 / (2 * train.n), kernel=KernelSpec("linear"))
    swept = sweep(train, test, cfg, np.linspace(0.05, 0.95, 19))

    # unit weights reproduce the point estimates exactly
    from rocsvm.bands import weighted_se_sp

    se, sp = weighted_se_sp(swept.models, test, np.ones(test.n))
    exact = all((s, p) == estimate_se_sp(m, test)
                for m, s, p in zip(swept.models, se, sp))

    means_ok = all(abs(bootstrap_weights("exponential", n, make_rng(SEED, 83, n)).mean() - 1.0) <= 1e-12
                   for n in (3, 10, 100, 5000))

    nesting_ok = True
    rng = np.random.default_rng(SEED)
    for trial in range(50):
        n = int(rng.integers(20, 60))
        m = int(rng.integers(3, 10))
        labels = np.where(rng.random(n) < 0.5, 1, -1)
        if np.all(labels == labels[0]):
            labels[0] = -labels[0]
        cuts = np.sort(rng.normal(size=m))[::-1]
        preds = np.where(rng.normal(size=n)[:, None] >= cuts[None, :], 1, -1)
        gamma = float(rng.uniform(0.05, 0.4))
        seed = int(rng.integers(0, 2**31))
        wide = band_from_predictions(preds, labels, BandSpec(n_boot=60, gamma_bar=gamma / 2, rng_seed=seed))
        narrow = band_from_predictions(preds, labels, BandSpec(n_boot=60, gamma_bar=gamma, rng_seed=seed))
        if np.any(wide.y_lower > narrow.y_lower + 1e-12) or np.any(wide.y_upper < narrow.y_upper - 1e-12):
            nesting_ok = False
            break

    spec = BandSpec(n_boot=300, rng_seed=17)
    a = build_band(swept.models, test, spec)
    b = build_band(swept.models, test, spec)
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_band_csv(a, str(pa))
    write_band_csv(b, str(pb))
    bytes_ok = pa.read_bytes() == pb.read_bytes()

    ok = exact and means_ok and nesting_ok and bytes_ok
    report("criterion 8 (bootstrap mechanics)", ok,
           f"unit-weight identity {exact}, weight means {means_ok}, "
           f"nesting {nesting_ok}, byte determinism {bytes_ok}")


def test_criterion_9_logistic_auc_equals_mann_whitney():
    rng = np.random.default_rng(SEED)
    exact = 0
    for trial in range(100):
        n = int(rng.integers(8, 40))
        X = rng.normal(size=(n, int(rng.integers(1, 4))))
        if trial % 4 == 0:
            X = np.round(X, 1)  # force ties
        labels = np.where(rng.random(n) < 0.5, 1, -1)
        if np.all(labels == labels[0]):
            labels[0] = -labels[0]
        data = Dataset(X, labels)
        model = fit_logistic(data)
        got = auc(logistic_roc(model, data))
        want = mann_whitney_auc(predict_proba(model, data), labels)
        if abs(got - want) <= 1e-12:
            exact += 1
    report("criterion 9 (threshold-sweep AUC == Mann-Whitney on 100 instances)",
           exact == 100, f"{exact}/100 exact matches")
