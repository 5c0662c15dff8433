import math

import numpy as np
import pytest

from pylevytools.core.exceptions import StiffnessError, EnsembleError
from pylevytools.cli.config import PipelineConfig
from pylevytools.cli.pipeline import PipelineRun
from pylevytools.reconstruct.entities import GridFunction
from pylevytools.reconstruct.lib import ground_state
from pylevytools.sampler.entities import PathEnsemble
from pylevytools.sampler.lib import (drift, simulate, jackknife, estimate_chi2, estimate_autocovariance,
                                     estimate_variance, time_average)


@pytest.fixture(scope="module")
def ho_drift(ho_phi0):
    return drift(ho_phi0)


@pytest.fixture(scope="module")
def ho_rho(default_grid, ho_forms):
    return GridFunction.from_function(default_grid, ho_forms.rho)


def test_oscillator_drift(ho_drift):
    np.testing.assert_allclose(ho_drift.values[ho_drift.mask], -ho_drift.x[ho_drift.mask], atol=1e-6)
    np.testing.assert_array_equal(ho_drift.values, -ho_drift.values[::-1])


def test_cauchy_drift(cauchy_rho):
    b = drift(ground_state(cauchy_rho))
    inner = b.mask & (np.abs(b.x) <= 3.0)
    np.testing.assert_allclose(b.values[inner], -b.x[inner] / (1.0 + b.x[inner] ** 2), atol=1e-4)
    assert b.values[b.n // 2] == 0.0


def test_stiffness_guard(ho_drift, ho_rho):
    with pytest.raises(StiffnessError):
        simulate(ho_drift, ho_rho, dt=1.0, n_steps=10, n_paths=10, seed=1)


def test_simulation_is_reproducible(ho_drift, ho_rho):
    kwargs = dict(dt=0.01, n_steps=50, n_paths=500, windows=[0.25], lags=[0.2], block_size=128)
    first = simulate(ho_drift, ho_rho, seed=3, **kwargs)
    second = simulate(ho_drift, ho_rho, seed=3, **kwargs)
    other = simulate(ho_drift, ho_rho, seed=4, **kwargs)
    np.testing.assert_array_equal(first.final, second.final)
    np.testing.assert_array_equal(first.window(0.25), second.window(0.25))
    assert not np.array_equal(first.final, other.final)


def test_paths_stay_between_walls(ho_drift, ho_rho):
    ensemble = simulate(ho_drift, ho_rho, dt=0.05, n_steps=40, n_paths=2000, seed=5)
    wall = ho_drift.x[ho_drift.mask][-1]
    assert np.max(np.abs(ensemble.final)) <= wall
    assert np.max(np.abs(ensemble.initial)) <= wall


def test_ensemble_lookups(ho_drift, ho_rho):
    ensemble = simulate(ho_drift, ho_rho, dt=0.01, n_steps=100, n_paths=200, seed=1, windows=[0.5, 2.0],
                        lags=[0.3])
    assert ensemble.duration == pytest.approx(1.0)
    assert sorted(ensemble.window_integrals) == [0.5]
    with pytest.raises(EnsembleError):
        ensemble.window(2.0)
    with pytest.raises(EnsembleError):
        ensemble.lag(0.5)
    assert ensemble.lag(0.3).shape == (200,)
    assert ensemble.describe()["lags"] == [0.3]


def test_estimators_need_enough_paths():
    ensemble = PathEnsemble(n_paths=10, n_steps=10, dt=0.1, seed=0, initial=np.zeros(10), final=np.zeros(10),
                            time_averages=np.zeros(10), window_integrals={0.5: np.zeros(10)})
    with pytest.raises(EnsembleError):
        estimate_chi2(ensemble, 0.5)


def test_jackknife_of_the_mean():
    x = np.random.default_rng(0).normal(size=500)
    estimate, error = jackknife(lambda m: m, x)
    assert estimate == pytest.approx(np.mean(x), rel=1e-12)
    assert error == pytest.approx(np.std(x, ddof=1) / math.sqrt(len(x)), rel=1e-9)


def test_jackknife_fourth_cumulant_of_gaussian():
    w = np.random.default_rng(1).normal(scale=2.0, size=20000)
    estimate, error = jackknife(lambda m2, m4: m4 - 3.0 * m2 * m2, w * w, w ** 4)
    assert abs(estimate) < 4 * error


@pytest.mark.slow
def test_oscillator_monte_carlo(ho_drift, ho_rho):
    dt, n_paths = 0.01, 100000
    ensemble = simulate(ho_drift, ho_rho, dt=dt, n_steps=200, n_paths=n_paths, seed=12345, windows=[1.0],
                        lags=[0.5, 1.0, 2.0])
    estimate, error = estimate_chi2(ensemble, 1.0)
    assert abs(estimate) <= 3 * error
    # the Euler-Maruyama chain of dX = -X dt + dW is exactly linear: Cov(X_0, X_n) = (1 - dt)^n Var(X_0)
    for lag in (0.5, 1.0, 2.0):
        cov, cov_error = estimate_autocovariance(ensemble, lag)
        assert abs(cov - 0.5 * (1 - dt) ** round(lag / dt)) <= 3 * cov_error
    variance, variance_error = estimate_variance(ensemble)
    assert abs(variance - 1.0 / (2.0 - dt)) <= 3 * variance_error
    mean, mean_error = time_average(ensemble)
    assert abs(mean) <= 3 * mean_error


@pytest.mark.slow
def test_alpha_family_small_window_against_spectrum(tmp_path):
    T = 0.05
    config = PipelineConfig({
        "model": {"family": "alpha", "alpha": 2.5},
        "spectrum": {"sweep": False},
        "chi2": {"T": [T]},
        "sampler": {"enabled": True, "n_paths": 100000, "dt": 0.001, "T": [T], "lags": []},
    })
    run = PipelineRun(config, out_dir=tmp_path)
    assert run.run() == 0
    window = run.sampler["chi2"][0]
    spectral = float(run.report.curve["chi2"][0])
    # at small T the spectral value is close to (1 + 2T)^3 chi2_small
    assert spectral == pytest.approx((1.0 + 2.0 * T) ** 3 * run.report.chi2_small, rel=5e-2)
    assert abs(window["estimate"] - spectral) <= 3 * window["standard_error"]
