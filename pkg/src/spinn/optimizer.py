"""Composite gradient descent for the group-penalised network objective.

One epoch is one full-batch step: gradient of loss + alpha*||w||^2, an Adam
(or plain) update of every parameter, then the group thresholding operator
on each input column. The loop itself lives in the kernel backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .data import Dataset
from .losses import LOSS_CODES, Survival, loss_for, risk_set_blocks
from .network import NetworkConfig, NetworkParams, forward_batch, init_params
from .penalties import PenaltySpec, total_penalty

OPTIMIZERS = {"adam": 0, "plain-sgd": 1}


class FitDivergenceError(FloatingPointError):
    def __init__(self, epoch: int, lam: float | None = None):
        self.epoch = epoch
        self.lam = lam
        where = f" at lambda={lam:g}" if lam is not None else ""
        super().__init__(f"objective became non-finite in epoch {epoch}{where}")


@dataclass(frozen=True)
class FitConfig:
    alpha: float = 1e-3
    learning_rate: float = 1e-3
    epochs: int = 2000
    optimizer_kind: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    convergence_tol: float = 0.0
    convergence_window: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.optimizer_kind not in OPTIMIZERS:
            raise ValueError(f"optimizer_kind must be one of {sorted(OPTIMIZERS)}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.epochs < 0 or self.convergence_window < 1:
            raise ValueError("epochs must be >= 0 and convergence_window >= 1")


@dataclass
class FitResult:
    params: NetworkParams
    objective_trace: np.ndarray
    selected: np.ndarray
    epochs_run: int
    final_objective: float = field(default=float("nan"))


def objective(params: NetworkParams, dataset: Dataset, spec: PenaltySpec | None,
              alpha: float) -> float:
    pred = forward_batch(params, dataset.X)
    value, _ = loss_for(dataset.outcome, pred)
    pen = total_penalty(spec, params.weights[0]) if spec is not None else 0.0
    return value + pen + alpha * params.sq_norm()


class Problem:
    """Loss inputs packed once for repeated kernel calls on one dataset."""

    def __init__(self, dataset: Dataset):
        n = dataset.n
        out = dataset.outcome
        self.n = n
        self.loss_code = LOSS_CODES[out.kind]
        self.Xt = np.ascontiguousarray(dataset.X.T)
        if isinstance(out, Survival):
            if not np.any(out.event):
                raise ValueError("partial likelihood needs at least one event")
            self.y = out.time
            self.event = out.event
            order, start, end = risk_set_blocks(out.time)
        else:
            self.y = out.y
            self.event = np.zeros(n)
            order = start = end = np.arange(n)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        self.event = np.ascontiguousarray(self.event, dtype=np.float64)
        self.order = np.ascontiguousarray(order, dtype=np.intp)
        self.start = np.ascontiguousarray(start, dtype=np.intp)
        self.end = np.ascontiguousarray(end, dtype=np.intp)

    def columns(self, keep) -> "Problem":
        new = object.__new__(Problem)
        new.__dict__.update(self.__dict__)
        new.Xt = np.ascontiguousarray(self.Xt[np.asarray(keep, dtype=np.int64)])
        return new

    def loss_and_grad(self, params: NetworkParams, backend: str | None = None):
        k = _backend.get(backend)
        dims = np.asarray(params.config.dims, dtype=np.intp)
        value, grad, pred = k.loss_and_grad(params.flatten().copy(), dims, self.Xt, self.loss_code,
                                            self.y, self.event, self.order, self.start, self.end)
        return value, NetworkParams.from_flat(params.config, grad), pred


def run_epochs(problem: Problem, init: NetworkParams, fit_config: FitConfig,
               spec: PenaltySpec | None, epochs: int | None = None,
               backend: str | None = None) -> FitResult:
    """Train from ``init`` on a pre-packed problem (input widths must agree)."""
    k = _backend.get(backend)
    config = init.config
    if problem.Xt.shape[0] != config.input_dim:
        raise ValueError(f"network takes {config.input_dim} inputs, data has {problem.Xt.shape[0]}")
    epochs = fit_config.epochs if epochs is None else int(epochs)
    theta = np.ascontiguousarray(init.flatten(), dtype=np.float64).copy()
    dims = np.asarray(config.dims, dtype=np.intp)
    trace = np.full(max(epochs, 1), np.nan)
    use_prox = spec is not None
    fam = spec.code if use_prox else 0
    lam = spec.lam if use_prox else 0.0
    a = spec.a if use_prox else 0.0
    steps, diverged = k.fit_loop(
        theta, dims, problem.Xt, problem.loss_code, problem.y, problem.event,
        problem.order, problem.start, problem.end,
        fam, lam, a, float(fit_config.alpha), use_prox,
        OPTIMIZERS[fit_config.optimizer_kind], float(fit_config.learning_rate),
        float(fit_config.adam_beta1), float(fit_config.adam_beta2), float(fit_config.adam_eps),
        epochs, float(fit_config.convergence_tol), int(fit_config.convergence_window), trace)
    if diverged >= 0:
        raise FitDivergenceError(diverged, lam if use_prox else None)
    params = NetworkParams.from_flat(config, theta)
    recorded = trace[:min(epochs, steps + 1)] if epochs else trace[:0]
    return FitResult(params, recorded, params.selected(), steps)


def fit(dataset: Dataset, config: NetworkConfig, fit_config: FitConfig,
        spec: PenaltySpec | None, init: NetworkParams | None = None,
        backend: str | None = None) -> FitResult:
    """Minimise loss + group penalty + ridge from ``init`` (fresh draw if None).

    ``spec=None`` skips the thresholding step entirely.
    """
    if dataset.d != config.input_dim:
        raise ValueError(f"config expects {config.input_dim} inputs, dataset has {dataset.d}")
    if init is None:
        init = init_params(config, fit_config.seed)
    elif init.config.dims != config.dims:
        raise ValueError("init params do not match the network config")
    result = run_epochs(Problem(dataset), init, fit_config, spec, backend=backend)
    result.final_objective = objective(result.params, dataset, spec, fit_config.alpha)
    return result
