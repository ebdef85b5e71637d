import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinn.losses import (Binary, Continuous, Survival, bce_loss, cox_loss, loss_for, mse_loss,
                          risk_set_blocks)


def cox_double_loop(score, time, event):
    n = len(score)
    value = 0.0
    grad = np.zeros(n)
    for i in range(n):
        if not event[i]:
            continue
        risk = [j for j in range(n) if time[j] >= time[i]]
        denom = sum(math.exp(score[j]) for j in risk)
        value -= score[i] - math.log(denom)
        grad[i] -= 1.0
        for j in risk:
            grad[j] += math.exp(score[j]) / denom
    return value / n, grad / n


def numeric_grad(fn, x, h=1e-5):
    out = np.empty_like(x)
    for k in range(x.size):
        up, down = x.copy(), x.copy()
        up[k] += h
        down[k] -= h
        out[k] = (fn(up) - fn(down)) / (2 * h)
    return out


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-6))


def survival_sample(rng, n, censor=0.3, ties=True):
    time = rng.exponential(size=n)
    if ties:
        time = np.ceil(time * 5) / 5
    event = (rng.random(n) > censor).astype(float)
    event[rng.integers(n)] = 1.0
    return time, event


def test_outcome_validation():
    with pytest.raises(ValueError):
        Binary(np.array([0.0, 2.0]))
    with pytest.raises(ValueError):
        Survival(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        Survival(np.array([1.0, 2.0]), np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        Survival(np.array([1.0, 2.0]), np.array([1.0]))


def test_mse_examples():
    assert mse_loss(np.array([1.0, 2.0]), np.array([1.0, 2.0]))[0] == 0.0
    value, up = mse_loss(np.array([0.0, 0.0]), np.array([1.0, -1.0]))
    assert value == 1.0
    assert up.tolist() == [-1.0, 1.0]
    with pytest.raises(ValueError):
        mse_loss(np.array([]), np.array([]))


def test_mse_random(rng):
    pred, y = rng.normal(size=50), rng.normal(size=50)
    value, up = mse_loss(pred, y)
    assert value == pytest.approx(np.mean((y - pred) ** 2), rel=1e-14)
    assert rel_err(up, numeric_grad(lambda p: mse_loss(p, y)[0], pred)) < 1e-4


def test_bce_examples():
    assert bce_loss(np.array([0.0]), np.array([1.0]))[0] == pytest.approx(math.log(2), rel=1e-15)
    value, up = bce_loss(np.array([40.0]), np.array([1.0]))
    assert 0.0 <= value < 1e-15 and np.isfinite(up).all()
    with pytest.raises(ValueError):
        bce_loss(np.array([0.0]), np.array([0.5]))


def test_bce_finite_for_large_scores():
    s = np.array([-1e3, 1e3, -1e3, 1e3])
    value, up = bce_loss(s, np.array([1.0, 0.0, 0.0, 1.0]))
    assert np.isfinite(value) and np.isfinite(up).all()
    assert value == pytest.approx(500.0)


def test_bce_random(rng):
    s = rng.normal(scale=2, size=50)
    y = (rng.random(50) < 0.5).astype(float)
    value, up = bce_loss(s, y)
    p = 1 / (1 + np.exp(-s))
    assert value == pytest.approx(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)), rel=1e-12)
    assert rel_err(up, numeric_grad(lambda q: bce_loss(q, y)[0], s)) < 1e-4


def test_cox_single_event():
    value, up = cox_loss(np.array([0.7]), np.array([2.0]), np.array([1.0]))
    assert value == 0.0 and up.tolist() == [0.0]


def test_cox_equal_scores_no_ties():
    n = 8
    time = np.arange(1.0, n + 1)
    for c in (0.0, 3.3):
        value, up = cox_loss(np.full(n, c), time, np.ones(n))
        # row with the k-th largest time has a risk set of size k
        assert value == pytest.approx(sum(math.log(k) for k in range(1, n + 1)) / n, abs=1e-12)
        assert abs(up.sum()) < 1e-12


def test_cox_random_matches_double_loop(rng):
    score = rng.normal(size=30)
    time, event = survival_sample(rng, 30)
    assert len(np.unique(time)) < 30
    value, up = cox_loss(score, time, event)
    ref_value, ref_up = cox_double_loop(score, time, event)
    assert abs(value - ref_value) < 1e-10
    assert np.max(np.abs(up - ref_up)) < 1e-10
    assert rel_err(up, numeric_grad(lambda s: cox_loss(s, time, event)[0], score)) < 1e-4


@pytest.mark.parametrize("n", [1, 2, 17, 200])
def test_cox_double_loop_sizes(rng, n):
    score = rng.normal(scale=3, size=n)
    time, event = survival_sample(rng, n, ties=n > 2)
    value, up = cox_loss(score, time, event)
    ref_value, ref_up = cox_double_loop(score, time, event)
    assert abs(value - ref_value) < 1e-10
    assert np.max(np.abs(up - ref_up)) < 1e-10


def test_cox_shift_invariance(rng):
    score = rng.normal(size=40)
    time, event = survival_sample(rng, 40)
    a = cox_loss(score, time, event)[0]
    b = cox_loss(score + 123.0, time, event)[0]
    assert abs(a - b) < 1e-10


def test_cox_large_scores_stable(rng):
    score = rng.normal(scale=1, size=20) + 800.0
    time, event = survival_sample(rng, 20)
    value, up = cox_loss(score, time, event)
    assert np.isfinite(value) and np.isfinite(up).all()


def test_cox_needs_event():
    with pytest.raises(ValueError):
        cox_loss(np.zeros(3), np.ones(3), np.zeros(3))


def test_risk_set_blocks_ties():
    order, start, end = risk_set_blocks(np.array([1.0, 3.0, 3.0, 2.0]))
    assert order.tolist() == [1, 2, 3, 0]
    assert start.tolist() == [0, 0, 2, 3]
    assert end.tolist() == [1, 1, 2, 3]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2 ** 31))
def test_cox_property_double_loop(n, seed):
    r = np.random.default_rng(seed)
    score = r.normal(scale=2, size=n)
    time = r.integers(1, 6, size=n).astype(float)
    event = (r.random(n) < 0.6).astype(float)
    event[0] = 1.0
    value, up = cox_loss(score, time, event)
    ref_value, ref_up = cox_double_loop(score, time, event)
    assert abs(value - ref_value) < 1e-10
    assert np.max(np.abs(up - ref_up)) < 1e-10


def test_loss_for_dispatch(rng):
    pred = rng.normal(size=5)
    y = rng.normal(size=5)
    assert loss_for(Continuous(y), pred)[0] == mse_loss(pred, y)[0]
    lab = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
    assert loss_for(Binary(lab), pred)[0] == bce_loss(pred, lab)[0]
    t, e = np.arange(1.0, 6.0), np.ones(5)
    assert loss_for(Survival(t, e), pred)[0] == cox_loss(pred, t, e)[0]
