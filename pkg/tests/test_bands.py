import numpy as np
import pytest

from oracles import weighted_se_sp_ratio
from rocsvm.bands import (BandSpec, ConfidenceBand, band_area, band_from_predictions,
                          bootstrap_weights, build_band, covers, default_z_grid,
                          weighted_se_sp, _quantile_indices)
from rocsvm.data import Dataset
from rocsvm.kernels import KernelSpec
from rocsvm.roc import sweep
from rocsvm.rngs import make_rng
from rocsvm.solver import TrainConfig
from rocsvm.synth import GenModel, default_alpha_grid, generate
from rocsvm.data import stratified_split


def small_sweep(seed=40, n=120, n_alphas=21):
    gm = GenModel(p=2, q=0.3)
    data = generate(gm, n, make_rng(seed))
    train, test = stratified_split(data, 0.7, make_rng(seed + 1))
    cfg = TrainConfig(alpha_weight=0.5, lambda_=1 / (2 * train.n), kernel=KernelSpec("linear"))
    return sweep(train, test, cfg, default_alpha_grid(n_alphas)), test


def random_predictions(rng, n, m):
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    if np.all(labels == labels[0]):
        labels[0] = -labels[0]
    scores = rng.normal(size=n)
    cuts = np.sort(rng.normal(size=m))[::-1]
    preds = np.where(scores[:, None] >= cuts[None, :], 1, -1)
    return preds, labels


def test_exponential_weights_average_one():
    rng = make_rng(41)
    for n in (1, 7, 100, 10_000):
        w = bootstrap_weights("exponential", n, rng)
        assert np.all(w >= 0)
        assert abs(w.mean() - 1.0) <= 1e-12


def test_multinomial_weights_sum_to_n():
    rng = make_rng(42)
    for n in (1, 9, 250):
        w = bootstrap_weights("multinomial", n, rng)
        assert w.sum() == n
        assert np.all(w == np.round(w))


def test_exponential_weight_variance_near_one():
    w = bootstrap_weights("exponential", 100_000, make_rng(43))
    assert w.var() == pytest.approx(1.0, rel=0.05)


def test_constant_weights_are_ones():
    assert np.array_equal(bootstrap_weights("constant", 5, make_rng(0)), np.ones(5))


def test_unit_weights_reproduce_point_estimates():
    res, test = small_sweep()
    se, sp = weighted_se_sp(res.models, test, np.ones(test.n))
    from rocsvm.roc import estimate_se_sp

    for m, s, p in zip(res.models, se, sp):
        assert (s, p) == estimate_se_sp(m, test)


def test_weight_concentrated_on_correct_positive():
    res, test = small_sweep()
    from rocsvm.bands import classification_matrix

    preds = classification_matrix(res.models, test)
    # pick a positive test point classified +1 by the mid-grid model
    mid = len(res.models) // 2
    idx = np.flatnonzero((test.labels == 1) & (preds[:, mid] == 1))[0]
    w = np.full(test.n, 1e-12)
    w[idx] = 1.0
    se, _ = weighted_se_sp(res.models, test, w)
    assert se[mid] == pytest.approx(1.0, abs=1e-9)


def test_weighted_ratios_match_hand_oracle():
    rng = np.random.default_rng(44)
    for _ in range(25):
        preds, labels = random_predictions(rng, 6, 4)
        w = rng.random(6) + 0.05
        data = Dataset(rng.normal(size=(6, 2)), labels)
        got_se, got_sp = _rates_via_module(preds, data, w)
        for j in range(4):
            exp_se, exp_sp = weighted_se_sp_ratio(labels, preds[:, j], w)
            assert got_se[j] == pytest.approx(exp_se, abs=1e-12)
            assert got_sp[j] == pytest.approx(exp_sp, abs=1e-12)


def _rates_via_module(preds, data, w):
    from rocsvm.bands import _weighted_rates

    se, sp, ok = _weighted_rates(preds, data.labels, w[None, :])
    assert ok[0]
    return se[0], sp[0]


def test_zero_class_mass_raises():
    res, test = small_sweep()
    w = np.where(test.labels == 1, 0.0, 1.0)
    with pytest.raises(ValueError, match="degenerate"):
        weighted_se_sp(res.models, test, w)


def test_constant_weight_band_collapses():
    res, test = small_sweep()
    spec = BandSpec(n_boot=200, weight_scheme="constant", rng_seed=5)
    band = build_band(res.models, test, spec)
    assert band.p_star == 1.0
    assert np.array_equal(band.y_lower, band.y_hat)
    assert np.array_equal(band.y_upper, band.y_hat)
    assert band_area(band) == 0.0


def test_band_area_rectangle():
    z = default_z_grid()
    y = np.linspace(0.2, 0.8, z.size)
    band = ConfidenceBand(z_grid=z, y_lower=y - 0.05, y_hat=y, y_upper=y + 0.05,
                          p_star=0.5, n_usable=100, spec=BandSpec(n_boot=100))
    assert band_area(band) == pytest.approx(0.1 * (1.0 - 0.01), abs=1e-12)


def test_point_estimate_inside_band_and_bounds():
    res, test = small_sweep()
    band = build_band(res.models, test, BandSpec(n_boot=300, rng_seed=6))
    assert np.all(band.y_lower <= band.y_hat + 1e-12)
    assert np.all(band.y_hat <= band.y_upper + 1e-12)
    assert np.all((band.y_lower >= 0) & (band.y_upper <= 1))
    assert covers(band, band.y_hat)


def test_covers_detects_escape():
    res, test = small_sweep()
    band = build_band(res.models, test, BandSpec(n_boot=300, rng_seed=6))
    truth = band.y_hat.copy()
    k = int(np.argmax(band.y_upper < 1.0))
    truth[k] = band.y_upper[k] + 0.01
    assert not covers(band, truth)


def test_band_nesting_in_confidence_level():
    rng = np.random.default_rng(47)
    for trial in range(50):
        n = int(rng.integers(20, 60))
        m = int(rng.integers(3, 12))
        preds, labels = random_predictions(rng, n, m)
        gamma = float(rng.uniform(0.05, 0.4))
        seed = int(rng.integers(0, 2**31))
        scheme = "multinomial" if trial % 3 == 0 else "exponential"
        wide = band_from_predictions(preds, labels,
                                     BandSpec(n_boot=80, gamma_bar=gamma / 2,
                                              weight_scheme=scheme, rng_seed=seed))
        narrow = band_from_predictions(preds, labels,
                                       BandSpec(n_boot=80, gamma_bar=gamma,
                                                weight_scheme=scheme, rng_seed=seed))
        assert np.all(wide.y_lower <= narrow.y_lower + 1e-12)
        assert np.all(narrow.y_upper <= wide.y_upper + 1e-12)
        assert wide.p_star <= narrow.p_star + 1e-12


def test_same_seed_identical_band():
    res, test = small_sweep()
    spec = BandSpec(n_boot=150, rng_seed=123)
    a = build_band(res.models, test, spec)
    b = build_band(res.models, test, spec)
    assert np.array_equal(a.y_lower, b.y_lower)
    assert np.array_equal(a.y_upper, b.y_upper)
    assert a.p_star == b.p_star


def test_quantile_indices_match_float_definition():
    for B in (7, 100, 1000):
        for j in range(0, 2 * B + 1, max(1, B // 7)):
            lo, hi = _quantile_indices(j, B)
            p = j / (2.0 * B)
            lo_float = max(int(np.ceil(p / 2 * B * (1 - 1e-15))) - 1, 0)
            hi_float = max(int(np.ceil((1 - p / 2) * B * (1 - 1e-15))) - 1, 0)
            assert lo == lo_float
            assert hi == hi_float


def test_fraction_inside_nonincreasing_in_p():
    rng = np.random.default_rng(48)
    Y = rng.random((60, 5))
    Ysort = np.sort(Y, axis=0)
    prev = Y.shape[0] + 1
    for j in range(0, 121):
        lo, hi = _quantile_indices(j, 60)
        cnt = int(((Y >= Ysort[lo]) & (Y <= Ysort[hi])).all(axis=1).sum())
        assert cnt <= prev
        prev = cnt


def test_band_spec_validation():
    with pytest.raises(ValueError):
        BandSpec(gamma_bar=0.0)
    with pytest.raises(ValueError):
        BandSpec(z_grid=np.array([0.6, 0.8, 1.0]))  # delta >= 1/2
    with pytest.raises(ValueError):
        BandSpec(z_grid=np.array([0.1, 0.5, 0.9]))  # does not end at 1
    with pytest.raises(ValueError):
        BandSpec(weight_scheme="gaussian")


def test_multinomial_degenerate_replicates_are_excluded():
    # one positive in a tiny sample: multinomial weights often zero it out
    labels = np.array([1, -1, -1, -1, -1])
    preds = np.tile(np.array([[1], [-1], [-1], [-1], [1]]), (1, 3))
    spec = BandSpec(n_boot=400, gamma_bar=0.4, weight_scheme="multinomial", rng_seed=9)
    band = band_from_predictions(preds, labels, spec)
    assert band.n_usable < 400
    assert band.n_usable >= (1 - 0.4) * 400
