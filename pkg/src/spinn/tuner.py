"""(lambda, alpha) selection on a holdout split of the training rows."""
from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import seeds
from .data import Dataset, fmt
from .losses import Binary, Survival
from .network import NetworkConfig, NetworkParams
from .optimizer import FitConfig
from .path import NonNullPathEndWarning, PathConfig, PathDivergenceError, solve_path


@dataclass(frozen=True)
class TuneConfig:
    alpha_grid: tuple = tuple(np.geomspace(1e-3, 0.1, 10))
    path_config: PathConfig = field(default_factory=PathConfig)
    holdout_fraction: float = 0.2
    stratify: bool = True
    seed: int = 0
    refit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        if not self.alpha_grid or any(a < 0 for a in self.alpha_grid):
            raise ValueError("alpha_grid must be a nonempty list of values >= 0")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must lie in (0, 1)")


@dataclass
class TuneCell:
    alpha: float
    lam: float
    validation_loss: float
    model_size: int


@dataclass
class TuneResult:
    lam: float
    alpha: float
    params: NetworkParams
    selected: np.ndarray
    validation_loss: float
    table: list[TuneCell]
    train_idx: np.ndarray
    valid_idx: np.ndarray


def holdout_split(n: int, fraction: float, stratify_labels=None, seed: int = 0):
    """Sorted (train, validation) index arrays; validation has round(fraction * n) rows."""
    if n < 5:
        raise ValueError("need at least 5 rows for a holdout split")
    n_valid = int(np.floor(fraction * n + 0.5))
    if not 0 < n_valid < n:
        raise ValueError(f"fraction {fraction} leaves an empty part for n={n}")
    rng = np.random.default_rng(seed)
    if stratify_labels is None:
        valid = rng.permutation(n)[:n_valid]
    else:
        labels = np.asarray(stratify_labels)
        classes = np.unique(labels)
        members = [np.flatnonzero(labels == c) for c in classes]
        # largest-remainder allocation so the class quotas sum to n_valid
        exact = np.array([fraction * m.size for m in members])
        quota = np.floor(exact).astype(int)
        short = n_valid - quota.sum()
        if short > 0:
            quota[np.argsort(-(exact - quota), kind="stable")[:short]] += 1
        valid = np.concatenate([rng.permutation(m)[:q] for m, q in zip(members, quota)])
    mask = np.zeros(n, dtype=bool)
    mask[valid] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)


def _stratify_labels(dataset: Dataset):
    if isinstance(dataset.outcome, Binary):
        return dataset.outcome.y
    if isinstance(dataset.outcome, Survival):
        return dataset.outcome.event
    return None


def _alpha_path(args):
    train, valid, net_config, fit_config, path_config, seed, backend = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonNullPathEndWarning)
            path = solve_path(train, net_config, fit_config, path_config, seed=seed,
                              validation=valid, backend=backend)
        return path.entries, None
    except PathDivergenceError as exc:
        return exc.partial.entries, exc.lam


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def tune(dataset: Dataset, net_config: NetworkConfig, fit_config: FitConfig,
         tune_config: TuneConfig, workers: int = 1, backend: str | None = None) -> TuneResult:
    """Sweep one backward path per alpha and keep the best validation cell.

    Ties on validation loss go to the smaller model, then the larger lambda.
    Cells of a path that diverged score +inf.
    """
    labels = _stratify_labels(dataset) if tune_config.stratify else None
    train_idx, valid_idx = holdout_split(dataset.n, tune_config.holdout_fraction, labels,
                                         seeds.derive(tune_config.seed, seeds.SPLIT))
    train, valid = dataset.subset(train_idx), dataset.subset(valid_idx)
    init_seed = seeds.derive(tune_config.seed, seeds.INIT)
    pc = tune_config.path_config
    grid = pc.grid()
    jobs = [(train, valid, net_config, replace(fit_config, alpha=alpha), pc, init_seed, backend)
            for alpha in tune_config.alpha_grid]
    outputs = _map(_alpha_path, jobs, workers)

    table: list[TuneCell] = []
    best_key, best = None, None
    for gi, (alpha, (entries, _)) in enumerate(zip(tune_config.alpha_grid, outputs)):
        by_lam = {e.lam: e for e in entries}
        for lam in grid:
            e = by_lam.get(float(lam))
            if e is None:
                table.append(TuneCell(alpha, float(lam), float("inf"), -1))
                continue
            loss = e.validation_loss
            loss = float("inf") if loss is None or not np.isfinite(loss) else float(loss)
            table.append(TuneCell(alpha, e.lam, loss, int(e.selected.size)))
            key = (loss, e.selected.size, -e.lam, gi)
            if best_key is None or key < best_key:
                best_key, best = key, (alpha, e)
    if best is None:
        raise FloatingPointError("every (lambda, alpha) cell diverged")
    alpha, entry = best
    params, lam = entry.params, entry.lam
    if tune_config.refit:
        upto = grid[grid <= lam]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonNullPathEndWarning)
            refit = solve_path(dataset, net_config, replace(fit_config, alpha=alpha), pc,
                               seed=init_seed, backend=backend, lambdas=upto)
        params = refit.entries[-1].params
    return TuneResult(lam, alpha, params, params.selected(), best_key[0], table,
                      train_idx, valid_idx)


def write_table_csv(result: TuneResult, filename) -> None:
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "lambda", "validation_loss", "model_size"])
        for c in result.table:
            w.writerow([fmt(c.alpha), fmt(c.lam), fmt(c.validation_loss), c.model_size])
