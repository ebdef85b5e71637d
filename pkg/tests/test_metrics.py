import numpy as np
import pytest

from spinn.losses import Binary, Continuous, Survival
from spinn.metrics import (MetricsRecord, accuracy, c_index, prediction_score, r2_score,
                           selection_metrics)


def c_index_loop(score, time, event):
    num = den = 0.0
    n = len(score)
    for i in range(n):
        for j in range(n):
            if event[i] and time[i] < time[j]:
                den += 1
                num += 1.0 if score[i] > score[j] else 0.5 if score[i] == score[j] else 0.0
    return num / den


def test_selection_examples():
    assert selection_metrics([0, 1, 2, 3], [0, 1, 2, 3], 20) == (4, 0.0, 0.0)
    ms, fpr, fnr = selection_metrics([0, 1, 7, 9], [0, 1, 2, 3], 20)
    assert (ms, fpr, fnr) == (4, 12.5, 50.0)
    assert selection_metrics([], [0, 1, 2, 3], 20) == (0, 0.0, 100.0)
    assert selection_metrics(range(20), [0, 1, 2, 3], 20) == (20, 100.0, 0.0)


def test_selection_errors():
    with pytest.raises(ValueError):
        selection_metrics([0], [], 5)
    with pytest.raises(ValueError):
        selection_metrics([5], [0], 5)


def test_r2(rng):
    y = rng.normal(size=40)
    assert r2_score(y, y) == 1.0
    assert r2_score(np.full(40, y.mean()), y) == pytest.approx(0.0, abs=1e-15)
    pred = rng.normal(size=40)
    assert r2_score(pred, y) == pytest.approx(
        1 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2), rel=1e-12)
    with pytest.raises(ValueError):
        r2_score([1.0, 1.0], [2.0, 2.0])


def test_accuracy():
    assert accuracy([1.0, -2.0, 0.5, -0.1], [1, 0, 0, 0]) == 0.75


def test_c_index_extremes():
    time = np.arange(1.0, 11.0)
    event = np.ones(10)
    assert c_index(-time, time, event) == 1.0
    assert c_index(time, time, event) == 0.0
    assert c_index(np.zeros(10), time, event) == 0.5


def test_c_index_matches_loop(rng):
    score = np.round(rng.normal(size=50), 1)
    time = np.ceil(rng.exponential(size=50) * 4)
    event = (rng.random(50) < 0.7).astype(float)
    assert c_index(score, time, event) == c_index_loop(score, time, event)


def test_c_index_no_pairs():
    with pytest.raises(ValueError):
        c_index([1.0, 2.0], [1.0, 1.0], [1.0, 1.0])


def test_prediction_score_dispatch(rng):
    y = rng.normal(size=10)
    assert prediction_score("regression", y, Continuous(y)) == 1.0
    assert prediction_score("classification", np.array([1.0, -1.0]), Binary(np.array([1.0, 0.0]))) == 1.0
    t = np.arange(1.0, 6.0)
    assert prediction_score("survival", -t, Survival(t, np.ones(5))) == 1.0


def test_record_dict():
    rec = MetricsRecord(4, 0.0, 0.0, 0.9, "r2")
    assert rec.to_dict()["score_kind"] == "r2"
