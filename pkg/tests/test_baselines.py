import numpy as np
import pytest

from oracles import mann_whitney_auc
from rocsvm.baselines import (classify_at, fit_logistic, logistic_roc, predict_proba,
                              _design, _expit)
from rocsvm.data import Dataset
from rocsvm.roc import auc
from rocsvm.rngs import make_rng
from rocsvm.synth import GenModel, generate


def test_no_signal_slopes_within_three_standard_errors():
    rng = np.random.default_rng(50)
    n = 2000
    X = rng.normal(size=(n, 3))
    labels = np.where(rng.random(n) < 0.5, 1, -1)  # independent of X
    model = fit_logistic(Dataset(X, labels))
    assert model.converged
    Z = _design(X)
    prob = _expit(Z @ model.coefficients)
    H = Z.T @ ((prob * (1 - prob))[:, None] * Z)
    se = np.sqrt(np.diag(np.linalg.inv(H)))
    assert np.all(np.abs(model.coefficients[1:]) <= 3 * se[1:])


def test_recovers_coefficient_direction_on_generative_model():
    gm = GenModel(p=2, q=0.25)
    data = generate(gm, 10_000, make_rng(51))
    model = fit_logistic(data)
    slope = model.coefficients[1:]
    beta = gm.beta_array
    cosine = slope @ beta / (np.linalg.norm(slope) * np.linalg.norm(beta))
    assert cosine > 0.95


def test_single_class_raises():
    with pytest.raises(ValueError):
        fit_logistic(Dataset(np.zeros((4, 1)), np.ones(4, dtype=int)))


def test_converged_flag_honest_under_separation():
    X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    data = Dataset(X, np.array([-1, -1, 1, 1]))
    model = fit_logistic(data)
    assert not model.converged
    assert np.all(np.isfinite(model.coefficients))
    # the best iterate still separates
    assert np.array_equal(classify_at(model, X), data.labels)


def test_constant_predictions_give_diagonal_auc():
    labels = np.array([1, -1, 1, -1])
    data = Dataset(np.zeros((4, 2)), labels)
    model = fit_logistic(data)
    curve = logistic_roc(model, data)
    assert auc(curve) == pytest.approx(0.5)


def test_perfect_ranking_gives_auc_one():
    X = np.array([[-2.0], [-1.5], [1.5], [2.0]])
    data = Dataset(X, np.array([-1, -1, 1, 1]))
    model = fit_logistic(data)
    assert auc(logistic_roc(model, data)) == pytest.approx(1.0)


def test_threshold_sweep_auc_equals_mann_whitney_exactly():
    rng = np.random.default_rng(52)
    for trial in range(100):
        n = int(rng.integers(6, 30))
        X = rng.normal(size=(n, 2))
        labels = np.where(rng.random(n) < 0.5, 1, -1)
        if np.all(labels == labels[0]):
            labels[0] = -labels[0]
        if trial % 3 == 0:
            X = np.round(X, 1)  # force tied predictions
        data = Dataset(X, labels)
        model = fit_logistic(data)
        scores = predict_proba(model, data)
        assert auc(logistic_roc(model, data)) == pytest.approx(
            mann_whitney_auc(scores, labels), abs=1e-12)


def test_probabilities_in_unit_interval():
    rng = np.random.default_rng(53)
    X = rng.normal(size=(50, 2)) * 10
    labels = np.where(rng.random(50) < 0.5, 1, -1)
    model = fit_logistic(Dataset(X, labels))
    p = predict_proba(model, X)
    assert np.all((p >= 0) & (p <= 1))
