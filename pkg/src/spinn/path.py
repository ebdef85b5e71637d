"""Solution paths over an increasing lambda grid.

The default ``backward`` mode fits the densest model (smallest lambda) from
a random start, then warm-starts each larger lambda from the previous
solution. Inputs whose column has been zeroed are removed from the network
and never come back, so later fits get cheaper as the model sparsifies.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, fmt
from .losses import loss_for
from .network import (Model, NetworkConfig, NetworkParams, embed_inputs, forward_batch,
                      init_params, prune_inputs)
from .optimizer import FitConfig, FitDivergenceError, Problem, run_epochs
from .penalties import PenaltySpec

PATH_MODES = ("backward", "forward", "independent")

# search ranges and epoch budgets for the simulation designs
PRESETS = {
    "ld": dict(lambda_min=1e-3, lambda_max=0.5, epochs_first=2000, epochs_rest=200),
    "hd": dict(lambda_min=1e-2, lambda_max=0.5, epochs_first=200, epochs_rest=200),
}


class NonNullPathEndWarning(UserWarning):
    """The largest lambda on the grid still leaves variables selected."""

    def __init__(self, lam: float, selected):
        self.lam = lam
        self.selected = list(selected)
        super().__init__(f"path end lambda={lam:g} keeps {len(self.selected)} variables "
                         f"selected: {[int(j) + 1 for j in self.selected]}")


class PathDivergenceError(FitDivergenceError):
    def __init__(self, epoch: int, lam: float, partial: "PathResult"):
        super().__init__(epoch, lam)
        self.partial = partial


@dataclass(frozen=True)
class PathConfig:
    lambda_min: float = 1e-3
    lambda_max: float = 0.5
    num_lambdas: int = 50
    epochs_first: int = 2000
    epochs_rest: int = 200
    prune: bool = True
    family: str = "group-mcp"
    a: float | None = None
    mode: str = "backward"

    def __post_init__(self):
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")
        if self.num_lambdas < 2:
            raise ValueError("num_lambdas must be >= 2")
        if self.mode not in PATH_MODES:
            raise ValueError(f"mode must be one of {PATH_MODES}")
        PenaltySpec(self.family, 0.0, self.a)  # validates family / a

    @classmethod
    def preset(cls, name: str, **overrides) -> "PathConfig":
        return cls(**{**PRESETS[name], **overrides})

    def spec(self, lam: float) -> PenaltySpec:
        return PenaltySpec(self.family, lam, self.a)

    def grid(self) -> np.ndarray:
        return lambda_grid(self.lambda_min, self.lambda_max, self.num_lambdas)


@dataclass
class PathEntry:
    lam: float
    params: NetworkParams  # full input width; pruned columns are exact zeros
    selected: np.ndarray  # 0-based
    epochs_run: int
    validation_loss: float | None = None

    @property
    def model(self) -> Model:
        return Model.from_full(self.params)


@dataclass
class PathResult:
    entries: list[PathEntry] = field(default_factory=list)
    input_dim: int = 0

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def total_epochs(self) -> int:
        return sum(e.epochs_run for e in self.entries)

    def __len__(self):
        return len(self.entries)


def lambda_grid(lambda_min: float, lambda_max: float, m: int) -> np.ndarray:
    """``m`` log-evenly spaced values from ``lambda_min`` to ``lambda_max`` inclusive."""
    if not 0 < lambda_min < lambda_max:
        raise ValueError("need 0 < lambda_min < lambda_max")
    if m < 2:
        raise ValueError("need at least two grid points")
    grid = np.geomspace(lambda_min, lambda_max, m)
    grid[0], grid[-1] = lambda_min, lambda_max
    return grid


def _validation_loss(params: NetworkParams, validation: Dataset) -> float:
    try:
        value, _ = loss_for(validation.outcome, forward_batch(params, validation.X))
    except ValueError:  # e.g. no events among validation rows
        return float("nan")
    return value if np.isfinite(value) else float("inf")


def solve_path(dataset: Dataset, net_config: NetworkConfig, fit_config: FitConfig,
               path_config: PathConfig, seed: int | None = None,
               validation: Dataset | None = None, backend: str | None = None,
               lambdas=None) -> PathResult:
    """Fit every lambda of the grid; entries come back ordered by increasing lambda.

    ``validation`` rows, when given, score each entry by the training loss
    family. A fit that diverges raises :class:`PathDivergenceError` carrying
    the entries completed so far.
    """
    if dataset.d != net_config.input_dim:
        raise ValueError(f"config expects {net_config.input_dim} inputs, dataset has {dataset.d}")
    seed = fit_config.seed if seed is None else seed
    grid = path_config.grid() if lambdas is None else np.asarray(lambdas, dtype=np.float64)
    problem = Problem(dataset)
    d = dataset.d
    result = PathResult(input_dim=d)

    def record(lam, params_reduced, index_map, epochs_run):
        full = embed_inputs(params_reduced, index_map, d)
        entry = PathEntry(float(lam), full, full.selected(), epochs_run)
        if validation is not None:
            entry.validation_loss = _validation_loss(full, validation)
        return entry

    def run(prob, init, lam, epochs, partial_entries):
        try:
            return run_epochs(prob, init, fit_config, path_config.spec(lam), epochs=epochs,
                              backend=backend)
        except FitDivergenceError as exc:
            partial = PathResult(sorted(partial_entries, key=lambda e: e.lam), d)
            raise PathDivergenceError(exc.epoch, float(lam), partial) from None

    mode = path_config.mode
    if mode == "independent":
        for lam in grid:
            init = init_params(net_config, seed)
            res = run(problem, init, lam, path_config.epochs_first, result.entries)
            result.entries.append(record(lam, res.params, np.arange(d), res.epochs_run))
    elif mode == "forward":
        # sparse-to-dense: re-draw the start until something gets selected
        entries = []
        params = None
        for k, lam in enumerate(grid[::-1]):
            fresh = params is None or params.selected().size == 0
            init = init_params(net_config, seed + k) if fresh else params
            epochs = path_config.epochs_first if fresh else path_config.epochs_rest
            res = run(problem, init, lam, epochs, entries)
            params = res.params
            entries.append(record(lam, params, np.arange(d), res.epochs_run))
        result.entries = entries[::-1]
    else:
        params = init_params(net_config, seed)
        index_map = np.arange(d)
        prob = problem
        for k, lam in enumerate(grid):
            epochs = path_config.epochs_first if k == 0 else path_config.epochs_rest
            res = run(prob, params, lam, epochs, result.entries)
            params = res.params
            result.entries.append(record(lam, params, index_map, res.epochs_run))
            if path_config.prune:
                keep = params.selected()
                if keep.size < params.input_dim:
                    params, _, index_map = prune_inputs(params, keep, index_map)
                    prob = problem.columns(index_map)

    last = result.entries[-1]
    if last.selected.size:
        warnings.warn(NonNullPathEndWarning(last.lam, last.selected), stacklevel=2)
    return result


def path_norms(path: PathResult) -> np.ndarray:
    """(m, d) matrix of input-column L2 norms, one row per lambda."""
    if not path.entries:
        raise ValueError("empty path")
    return np.vstack([e.params.group_norms() for e in path.entries])


def write_path_csv(path: PathResult, filename) -> None:
    norms = path_norms(path)
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "variable_index", "group_norm", "selected"])
        for entry, row in zip(path.entries, norms):
            for j, value in enumerate(row):
                w.writerow([fmt(entry.lam), j + 1, fmt(value), int(value != 0.0)])


def read_path_csv(filename) -> tuple[np.ndarray, np.ndarray]:
    """Back to ``(lambdas, norms)``; inverse of :func:`write_path_csv`."""
    with open(filename, newline="") as fh:
        rows = list(csv.DictReader(fh))
    lams = sorted({float(r["lambda"]) for r in rows})
    d = max(int(r["variable_index"]) for r in rows)
    norms = np.zeros((len(lams), d))
    pos = {lam: k for k, lam in enumerate(lams)}
    for r in rows:
        norms[pos[float(r["lambda"])], int(r["variable_index"]) - 1] = float(r["group_norm"])
    return np.array(lams), norms


def support_changes(path: PathResult) -> np.ndarray:
    """Size of the symmetric difference of selected sets between neighbours."""
    sets = [set(e.selected.tolist()) for e in path.entries]
    return np.array([len(a ^ b) for a, b in zip(sets, sets[1:])])


def with_epochs(path_config: PathConfig, first: int, rest: int) -> PathConfig:
    return replace(path_config, epochs_first=first, epochs_rest=rest)
