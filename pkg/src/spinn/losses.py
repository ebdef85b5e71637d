"""Empirical losses with their per-observation derivatives.

Each loss returns ``(value, upstream)`` where ``upstream[i]`` is the
derivative of the value with respect to the network output on row ``i``.
All values carry the 1/n averaging factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


@dataclass(frozen=True)
class Continuous:
    y: np.ndarray

    kind = "regression"

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or not np.all(np.isfinite(y)):
            raise ValueError("responses must be a finite 1-D array")
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.shape[0]

    def subset(self, idx) -> "Continuous":
        return Continuous(self.y[idx])


@dataclass(frozen=True)
class Binary:
    y: np.ndarray

    kind = "classification"

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("binary labels must be 0 or 1")
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.shape[0]

    def subset(self, idx) -> "Binary":
        return Binary(self.y[idx])


@dataclass(frozen=True)
class Survival:
    time: np.ndarray
    event: np.ndarray

    kind = "survival"

    def __post_init__(self):
        time = np.asarray(self.time, dtype=np.float64)
        event = np.asarray(self.event, dtype=np.float64)
        if time.shape != event.shape:
            raise ValueError("time and event must have equal length")
        if not np.all(time > 0) or not np.all(np.isfinite(time)):
            raise ValueError("survival times must be finite and strictly positive")
        if not np.all((event == 0.0) | (event == 1.0)):
            raise ValueError("event indicators must be 0 or 1")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)

    def __len__(self):
        return self.time.shape[0]

    def subset(self, idx) -> "Survival":
        return Survival(self.time[idx], self.event[idx])


Outcome = Continuous | Binary | Survival

LOSS_CODES = {"regression": 0, "classification": 1, "survival": 2}


def _check_pair(pred, y):
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if pred.shape != y.shape or pred.ndim != 1:
        raise ValueError(f"shape mismatch: {pred.shape} vs {y.shape}")
    if pred.size == 0:
        raise ValueError("empty input")
    return pred, y


def mse_loss(pred, y):
    pred, y = _check_pair(pred, y)
    n = pred.size
    resid = pred - y
    return float(np.sum(resid * resid) / n), 2.0 * resid / n


def bce_loss(score, y):
    """Binary cross-entropy on logits, written with softplus for stability."""
    score, y = _check_pair(score, y)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    n = score.size
    # log(1 + e^s) - y s
    per = np.maximum(score, 0.0) + np.log1p(np.exp(-np.abs(score))) - y * score
    return float(np.sum(per) / n), (expit(score) - y) / n


def risk_set_blocks(time):
    """Descending time order plus tie-block bounds for each sorted position.

    ``order`` sorts rows by decreasing time (stable). For sorted position
    ``k``, ``start[k]..end[k]`` (inclusive) is the block of rows tied with it,
    so the risk set of that row is every position ``<= end[k]``.
    """
    time = np.asarray(time, dtype=np.float64)
    order = np.argsort(-time, kind="stable")
    t = time[order]
    n = t.size
    new_block = np.ones(n, dtype=bool)
    new_block[1:] = t[1:] != t[:-1]
    block_id = np.cumsum(new_block) - 1
    starts = np.flatnonzero(new_block)
    ends = np.append(starts[1:] - 1, n - 1)
    return order, starts[block_id], ends[block_id]


def cox_loss(score, time, event, blocks=None):
    """Negative log partial likelihood with Breslow ties.

    Risk sets are ``{j : time_j >= time_i}``; sums run over one pass of the
    rows sorted by decreasing time.
    """
    score = np.asarray(score, dtype=np.float64)
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event, dtype=np.float64)
    if not (score.shape == time.shape == event.shape) or score.ndim != 1:
        raise ValueError("score, time and event must be 1-D of equal length")
    n = score.size
    if n == 0 or not np.any(event != 0):
        raise ValueError("partial likelihood needs at least one event")
    order, start, end = risk_set_blocks(time) if blocks is None else blocks
    s = score[order]
    delta = event[order]
    shift = s.max()
    e = np.exp(s - shift)
    denom = np.cumsum(e)[end]
    value = -np.sum(delta * (s - shift - np.log(denom))) / n
    # suffix sums of delta/denom over positions >= k; row k is in the risk
    # set of every event at or after the start of its tie block
    ratio = delta / denom
    suffix = np.cumsum(ratio[::-1])[::-1]
    grad_sorted = -(delta - e * suffix[start]) / n
    upstream = np.empty(n)
    upstream[order] = grad_sorted
    return float(value), upstream


def loss_for(outcome: Outcome, pred):
    if isinstance(outcome, Continuous):
        return mse_loss(pred, outcome.y)
    if isinstance(outcome, Binary):
        return bce_loss(pred, outcome.y)
    if isinstance(outcome, Survival):
        return cox_loss(pred, outcome.time, outcome.event)
    raise TypeError(f"unsupported outcome {type(outcome).__name__}")
