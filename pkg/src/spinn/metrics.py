"""Selection and prediction metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

SCORE_KINDS = {"regression": "r2", "classification": "accuracy", "survival": "c-index"}


@dataclass(frozen=True)
class MetricsRecord:
    model_size: int
    fpr_pct: float
    fnr_pct: float
    score: float
    score_kind: str

    def to_dict(self) -> dict:
        return asdict(self)


def selection_metrics(selected, truth, d: int) -> tuple[int, float, float]:
    """(model size, false positive %, false negative %) for 0-based index sets."""
    sel = {int(j) for j in selected}
    true = {int(j) for j in truth}
    if not true:
        raise ValueError("true support is empty; FNR is undefined")
    if any(not 0 <= j < d for j in sel | true):
        raise ValueError(f"indices must lie in [0, {d})")
    n_null = d - len(true)
    fpr = 100.0 * len(sel - true) / n_null if n_null else 0.0
    fnr = 100.0 * len(true - sel) / len(true)
    return len(sel), fpr, fnr


def r2_score(pred, y) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size < 2:
        raise ValueError("R^2 needs at least two observations")
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError("R^2 undefined for constant y")
    return float(1.0 - np.sum((y - pred) ** 2) / ss_tot)


def accuracy(score, y) -> float:
    """Share of rows where ``score > 0`` (probability above 1/2) matches the label."""
    score = np.asarray(score, dtype=np.float64)
    y = np.asarray(y)
    return float(np.mean((score > 0) == (y == 1)))


def c_index(score, time, event) -> float:
    """Harrell's concordance; higher score means higher hazard (earlier event).

    Comparable pairs are (i, j) with an event at i and ``time_i < time_j``.
    Tied scores count one half.
    """
    score = np.asarray(score, dtype=np.float64)
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event)
    concordant = 0.0
    comparable = 0
    for i in np.flatnonzero(event == 1):
        later = time > time[i]
        k = int(np.count_nonzero(later))
        if not k:
            continue
        other = score[later]
        concordant += np.count_nonzero(other < score[i]) + 0.5 * np.count_nonzero(other == score[i])
        comparable += k
    if comparable == 0:
        raise ValueError("no comparable pairs")
    return float(concordant / comparable)


def prediction_score(kind: str, pred, outcome) -> float:
    if kind == "regression":
        return r2_score(pred, outcome.y)
    if kind == "classification":
        return accuracy(pred, outcome.y)
    return c_index(pred, outcome.time, outcome.event)
