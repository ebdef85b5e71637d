"""Synthetic benchmarks: a sparse nonlinear signal in the first four covariates.

    f(x) = log(|x1| + 0.1) + x1*x2 + x2 + exp(x3 + x4)

drives a Gaussian regression, a logistic classification, or a Weibull
proportional-hazards survival outcome with uniform random censoring.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .losses import Binary, Continuous, Survival

TRUE_SUPPORT = (0, 1, 2, 3)  # 0-based; variables 1-4
WEIBULL_SCALE = 2.0
WEIBULL_SHAPE = 2.0
OUTCOMES = ("regression", "classification", "survival")


@dataclass(frozen=True)
class SimConfig:
    n: int
    d: int = 20
    outcome: str = "regression"
    censoring_rate: float = 0.0
    correlation: str = "independent"
    rho: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.d < 5:
            raise ValueError("d must exceed 4")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}")
        if not 0.0 <= self.censoring_rate < 1.0:
            raise ValueError("censoring_rate must lie in [0, 1)")
        if self.correlation not in ("independent", "ar"):
            raise ValueError("correlation must be 'independent' or 'ar'")


@dataclass
class SimTruth:
    f_values: np.ndarray
    true_support: tuple = TRUE_SUPPORT
    latent_time: np.ndarray | None = field(default=None)


def true_f(x) -> np.ndarray | float:
    """Signal function; accepts one vector or an (n, d) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 4:
        raise ValueError("need at least 4 coordinates")
    x1, x2, x3, x4 = (x[..., k] for k in range(4))
    out = np.log(np.abs(x1) + 0.1) + x1 * x2 + x2 + np.exp(x3 + x4)
    return float(out) if out.ndim == 0 else out


def gen_covariates(config: SimConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Independent N(0,1) columns, or AR(1) rows with corr(x_i, x_j) = rho^|i-j|."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    eps = rng.standard_normal((config.n, config.d))
    if config.correlation == "independent":
        return eps
    rho = config.rho
    X = np.empty_like(eps)
    X[:, 0] = eps[:, 0]
    scale = np.sqrt(1.0 - rho * rho)
    for j in range(1, config.d):
        X[:, j] = rho * X[:, j - 1] + scale * eps[:, j]
    return X


def weibull_cumhaz(t):
    return (np.asarray(t) / WEIBULL_SCALE) ** WEIBULL_SHAPE


def weibull_cumhaz_inv(v):
    return WEIBULL_SCALE * np.asarray(v) ** (1.0 / WEIBULL_SHAPE)


def draw_survival(f_values, censoring_rate: float, rng: np.random.Generator):
    """Observed (time, event) and latent event times under h0(t) * exp(f)."""
    f_values = np.asarray(f_values, dtype=np.float64)
    n = f_values.size
    u = rng.random(n)
    # S(t|x) = exp(-H0(t) e^f)  =>  T = H0^{-1}(-log(U) e^{-f})
    latent = weibull_cumhaz_inv(-np.log1p(-u) * np.exp(-f_values))
    latent = np.maximum(latent, np.finfo(float).tiny)  # u == 0 would give T == 0
    n_cens = int(np.floor(censoring_rate * n + 0.5))
    cens_idx = rng.choice(n, size=n_cens, replace=False)
    time = latent.copy()
    event = np.ones(n)
    if n_cens:
        c = rng.uniform(0.0, latent[cens_idx])
        time[cens_idx] = np.maximum(c, np.finfo(float).tiny)
        event[cens_idx] = 0.0
    return time, event, latent


def gen_outcome(X: np.ndarray, config: SimConfig, rng: np.random.Generator | None = None,
                f_values: np.ndarray | None = None):
    rng = np.random.default_rng(config.seed) if rng is None else rng
    f = true_f(X) if f_values is None else np.asarray(f_values, dtype=np.float64)
    if config.outcome == "regression":
        return Continuous(f + rng.standard_normal(f.size)), SimTruth(f)
    if config.outcome == "classification":
        p = 1.0 / (1.0 + np.exp(-f))
        return Binary((rng.random(f.size) < p).astype(np.float64)), SimTruth(f)
    time, event, latent = draw_survival(f, config.censoring_rate, rng)
    return Survival(time, event), SimTruth(f, latent_time=latent)


def gen_dataset(config: SimConfig) -> tuple[Dataset, SimTruth]:
    rng = np.random.default_rng(config.seed)
    X = gen_covariates(config, rng)
    outcome, truth = gen_outcome(X, config, rng)
    return Dataset(X, outcome), truth
