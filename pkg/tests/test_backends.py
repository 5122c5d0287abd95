import numpy as np
import pytest

from rocsvm._accel import HAS_NUMBA, active_backend
from rocsvm.data import Dataset
from rocsvm.kernels import KernelSpec
from rocsvm.solver import TrainConfig, fit


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.setenv("ROCSVM_BACKEND", "numpy")
    assert active_backend() == "numpy"
    monkeypatch.setenv("ROCSVM_BACKEND", "bogus")
    with pytest.raises(ValueError):
        active_backend()
    monkeypatch.delenv("ROCSVM_BACKEND")
    assert active_backend() in ("numba", "numpy")


@pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
def test_backends_produce_identical_models(monkeypatch):
    rng = np.random.default_rng(21)
    for trial in range(10):
        n = int(rng.integers(10, 60))
        X = rng.normal(size=(n, 2))
        labels = np.where(rng.random(n) < 0.5, 1, -1)
        if np.all(labels == labels[0]):
            labels[0] = -labels[0]
        data = Dataset(X, labels)
        kernel = (KernelSpec("gaussian", bandwidth_gamma=0.8)
                  if trial % 2 else KernelSpec("linear"))
        cfg = TrainConfig(alpha_weight=float(rng.uniform(0.2, 0.8)),
                          lambda_=float(10 ** rng.uniform(-3, -1)), kernel=kernel)
        monkeypatch.setenv("ROCSVM_BACKEND", "numba")
        a = fit(data, cfg)
        monkeypatch.setenv("ROCSVM_BACKEND", "numpy")
        b = fit(data, cfg)
        assert np.array_equal(a.dual_coefs, b.dual_coefs), trial
        assert a.bias == b.bias
        assert a.dual_objective == b.dual_objective
        assert a.n_updates == b.n_updates
