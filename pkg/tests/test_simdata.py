import math

import numpy as np
import pytest
from scipy import stats

from spinn.simdata import (TRUE_SUPPORT, SimConfig, draw_survival, gen_covariates, gen_dataset,
                           true_f, weibull_cumhaz, weibull_cumhaz_inv)


def test_true_f_examples():
    assert true_f(np.zeros(20)) == pytest.approx(math.log(0.1) + 1.0, abs=1e-15)
    x = np.zeros(6)
    x[0] = 1.0
    assert true_f(x) == pytest.approx(math.log(1.1) + 1.0, abs=1e-15)


def test_true_f_ignores_other_coordinates(rng):
    X = rng.normal(size=(50, 12))
    Y = X.copy()
    Y[:, 4:] = rng.normal(size=(50, 8))
    assert np.array_equal(true_f(X), true_f(Y))
    with pytest.raises(ValueError):
        true_f(np.zeros(3))


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(10, d=4)
    with pytest.raises(ValueError):
        SimConfig(10, censoring_rate=1.0)
    with pytest.raises(ValueError):
        SimConfig(10, correlation="block")
    with pytest.raises(ValueError):
        SimConfig(0)


def test_independent_covariates_moments():
    X = gen_covariates(SimConfig(10 ** 4, 8, seed=1))
    assert np.all(np.abs(X.mean(axis=0)) < 0.05)
    assert np.all(np.abs(X.var(axis=0) - 1) < 0.1)


def test_ar_covariates_correlation():
    X = gen_covariates(SimConfig(10 ** 4, 10, correlation="ar", seed=2))
    C = np.corrcoef(X[:, :5], rowvar=False)
    target = 0.5 ** np.abs(np.subtract.outer(np.arange(5), np.arange(5)))
    assert np.max(np.abs(C - target)) < 0.05
    assert np.all(np.abs(X.var(axis=0) - 1) < 0.1)


def test_seed_determinism():
    a, _ = gen_dataset(SimConfig(50, 7, outcome="survival", censoring_rate=0.2, seed=9))
    b, _ = gen_dataset(SimConfig(50, 7, outcome="survival", censoring_rate=0.2, seed=9))
    assert a.equals(b)


def test_weibull_inverse():
    v = np.linspace(0.01, 5, 20)
    assert np.allclose(weibull_cumhaz(weibull_cumhaz_inv(v)), v, rtol=1e-14)
    assert weibull_cumhaz_inv(1.0) == 2.0


def test_survival_uncensored():
    ds, truth = gen_dataset(SimConfig(300, 6, outcome="survival", seed=3))
    assert np.all(ds.outcome.event == 1) and np.all(ds.outcome.time > 0)
    assert np.array_equal(ds.outcome.time, truth.latent_time)


def test_censoring_exact_count():
    ds, truth = gen_dataset(SimConfig(500, 6, outcome="survival", censoring_rate=0.4, seed=4))
    cens = ds.outcome.event == 0
    assert cens.sum() == 200
    assert np.all(ds.outcome.time[cens] < truth.latent_time[cens])
    assert np.all(ds.outcome.time[~cens] == truth.latent_time[~cens])


def test_survival_median_for_zero_signal():
    rng = np.random.default_rng(5)
    time, event, _ = draw_survival(np.zeros(10 ** 5), 0.0, rng)
    assert abs(np.median(time) - 2 * math.sqrt(math.log(2))) < 0.03


def test_survival_ks_exponential():
    c = 0.7
    time, _, _ = draw_survival(np.full(10 ** 5, c), 0.0, np.random.default_rng(6))
    stat = stats.kstest(weibull_cumhaz(time) * math.exp(c), "expon").statistic
    assert stat < 0.01


def test_regression_variance_decomposition():
    ds, truth = gen_dataset(SimConfig(10 ** 5, 5, seed=7))
    assert abs(ds.outcome.y.var() - (truth.f_values.var() + 1)) < 0.05 * ds.outcome.y.var()


def test_classification_rate():
    ds, truth = gen_dataset(SimConfig(10 ** 5, 5, outcome="classification", seed=8))
    assert abs(ds.outcome.y.mean() - np.mean(1 / (1 + np.exp(-truth.f_values)))) < 0.02


def test_truth_support():
    _, truth = gen_dataset(SimConfig(10, 5, seed=0))
    assert truth.true_support == TRUE_SUPPORT == (0, 1, 2, 3)
