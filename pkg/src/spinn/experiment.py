"""Simulation experiments: replicate fan-out, scoring, Table-1 style summaries."""
from __future__ import annotations

import csv
import json
import time
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import _backend, seeds
from .data import Dataset, fmt
from .metrics import SCORE_KINDS, MetricsRecord, prediction_score, selection_metrics
from .network import Model, NetworkConfig, forward_batch, init_params
from .optimizer import FitConfig, FitDivergenceError, Problem, run_epochs
from .losses import loss_for
from .path import NonNullPathEndWarning, PathConfig
from .simdata import TRUE_SUPPORT, SimConfig, gen_dataset
from .tuner import TuneConfig, holdout_split, tune, _stratify_labels


class ConfigError(ValueError):
    pass


SCENARIOS = {
    "ld-300": dict(n=300, d=20, lambda_min=1e-3, lambda_max=0.5, alpha_min=1e-3, alpha_max=0.1,
                   epochs_first=2000, epochs_rest=200),
    "ld-500": dict(n=500, d=20, lambda_min=1e-3, lambda_max=0.5, alpha_min=1e-3, alpha_max=0.1,
                   epochs_first=2000, epochs_rest=200),
    "hd-500": dict(n=500, d=1000, lambda_min=1e-2, lambda_max=0.5, alpha_min=1e-2, alpha_max=0.1,
                   epochs_first=200, epochs_rest=200),
}
METHOD_NAMES = {"group-lasso": "GLASSONet", "group-mcp": "GMCPNet", "group-scad": "GSCADNet"}


@dataclass
class ExperimentConfig:
    scenario: str = "ld-300"
    model: str = "regression"
    censoring_rate: float = 0.0
    correlation: str = "independent"
    penalty: str = "group-mcp"
    a: float | None = None
    n: int | None = None
    d: int | None = None
    lambda_min: float | None = None
    lambda_max: float | None = None
    num_lambdas: int = 50
    alpha_min: float | None = None
    alpha_max: float | None = None
    num_alphas: int = 10
    alpha: float = 0.01
    epochs_first: int | None = None
    epochs_rest: int | None = None
    hidden_widths: list = field(default_factory=lambda: [10, 5])
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    holdout_fraction: float = 0.2
    prune: bool = True
    path_mode: str = "backward"
    refit: bool = False
    oracle: bool = True
    oracle_epochs: int = 5000
    replicates: int = 20
    parallel_workers: int = 1
    seed: int = 0
    backend: str | None = None
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def resolved(self) -> "ExperimentConfig":
        """Fill unset fields from the scenario preset and validate."""
        if self.scenario == "custom":
            preset = {}
        elif self.scenario in SCENARIOS:
            preset = SCENARIOS[self.scenario]
        else:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        values = asdict(self)
        for key, value in preset.items():
            if values[key] is None:
                values[key] = value
        missing = [k for k in ("n", "d", "lambda_min", "lambda_max", "alpha_min", "alpha_max",
                               "epochs_first", "epochs_rest") if values[k] is None]
        if missing:
            raise ConfigError(f"scenario {self.scenario!r} needs {missing}")
        cfg = ExperimentConfig(**values)
        if cfg.model not in SCORE_KINDS:
            raise ConfigError(f"model must be one of {sorted(SCORE_KINDS)}")
        if cfg.replicates < 1 or cfg.parallel_workers < 1:
            raise ConfigError("replicates and parallel_workers must be >= 1")
        try:
            cfg.path_config()
            cfg.fit_config()
            cfg.sim_config(0)
            cfg.tune_config(0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    def net_config(self, d: int | None = None) -> NetworkConfig:
        return NetworkConfig(self.d if d is None else d, tuple(self.hidden_widths))

    def path_config(self) -> PathConfig:
        return PathConfig(self.lambda_min, self.lambda_max, self.num_lambdas, self.epochs_first,
                          self.epochs_rest, self.prune, self.penalty, self.a, self.path_mode)

    def fit_config(self, seed: int = 0) -> FitConfig:
        return FitConfig(alpha=self.alpha, learning_rate=self.learning_rate,
                         epochs=self.epochs_first, optimizer_kind=self.optimizer, seed=seed)

    def alpha_grid(self) -> np.ndarray:
        if self.num_alphas == 1:
            return np.array([self.alpha_min])
        return np.geomspace(self.alpha_min, self.alpha_max, self.num_alphas)

    def tune_config(self, seed: int) -> TuneConfig:
        return TuneConfig(tuple(self.alpha_grid()), self.path_config(), self.holdout_fraction,
                          True, seed, self.refit)

    def sim_config(self, seed: int) -> SimConfig:
        corr = "ar" if self.correlation.startswith("ar") else self.correlation
        return SimConfig(self.n, self.d, self.model, self.censoring_rate, corr, seed=seed)


def oracle_fit(train: Dataset, cols, cfg: ExperimentConfig, seed: int):
    """Unpenalised network on the given columns; alpha picked on a holdout."""
    sub = train.columns(cols)
    labels = _stratify_labels(sub)
    tr_idx, va_idx = holdout_split(sub.n, cfg.holdout_fraction, labels,
                                   seeds.derive(seed, seeds.SPLIT))
    tr, va = sub.subset(tr_idx), sub.subset(va_idx)
    problem = Problem(tr)
    init = init_params(cfg.net_config(len(cols)), seeds.derive(seed, seeds.INIT))
    best = None
    for alpha in cfg.alpha_grid():
        fc = replace(cfg.fit_config(), alpha=float(alpha))
        try:
            res = run_epochs(problem, init, fc, None, epochs=cfg.oracle_epochs, backend=cfg.backend)
        except FitDivergenceError:
            continue
        try:
            loss, _ = loss_for(va.outcome, forward_batch(res.params, va.X))
        except ValueError:
            loss = float("inf")
        if best is None or loss < best[0]:
            best = (loss, float(alpha), res.params)
    if best is None:
        raise FloatingPointError("oracle network diverged for every alpha")
    return Model(best[2], np.asarray(cols, dtype=np.int64)), best[1]


def run_replicate(cfg: ExperimentConfig, r: int) -> dict:
    t0 = time.perf_counter()
    row = {"replicate": r, "status": "ok"}
    try:
        train, _ = gen_dataset(cfg.sim_config(seeds.derive(cfg.seed, r, seeds.TRAIN_DATA)))
        test, _ = gen_dataset(cfg.sim_config(seeds.derive(cfg.seed, r, seeds.TEST_DATA)))
        tune_seed = seeds.derive(cfg.seed, r, seeds.SPLIT)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonNullPathEndWarning)
            result = tune(train, cfg.net_config(), cfg.fit_config(), cfg.tune_config(tune_seed),
                          backend=cfg.backend)
        model = Model.from_full(result.params)
        score = prediction_score(cfg.model, model.predict(test.X), test.outcome)
        ms, fpr, fnr = selection_metrics(result.selected, TRUE_SUPPORT, cfg.d)
        row.update(
            metrics=MetricsRecord(ms, fpr, fnr, score, SCORE_KINDS[cfg.model]).to_dict(),
            selected=[int(j) + 1 for j in result.selected],
            lam=result.lam, alpha=result.alpha, validation_loss=result.validation_loss,
        )
        if cfg.oracle:
            oracle, oracle_alpha = oracle_fit(train, list(TRUE_SUPPORT), cfg,
                                              seeds.derive(cfg.seed, r, seeds.ORACLE))
            row["oracle_score"] = prediction_score(cfg.model, oracle.predict(test.X), test.outcome)
            row["oracle_alpha"] = oracle_alpha
    except Exception as exc:  # one bad replicate must not sink the run
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["traceback"] = traceback.format_exc()
    row["seconds"] = time.perf_counter() - t0
    return row


def _run_one(args):
    return run_replicate(*args)


def run_experiment(cfg: ExperimentConfig) -> dict:
    cfg = cfg.resolved()
    jobs = [(cfg, r) for r in range(cfg.replicates)]
    if cfg.parallel_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel_workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    rows.sort(key=lambda row: row["replicate"])
    return {
        "config": asdict(cfg),
        "backend": cfg.backend or _backend.NAME,
        "replicates": rows,
        "aggregate": aggregate(rows, cfg),
    }


def _stats(values) -> dict:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return {"mean": float("nan"), "median": float("nan"), "sd": float("nan")}
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return {"mean": float(np.mean(v)), "median": float(np.median(v)), "sd": sd}


def aggregate(rows: list[dict], cfg: ExperimentConfig) -> list[dict]:
    ok = [r for r in rows if r["status"] == "ok"]
    kind = SCORE_KINDS[cfg.model]
    method = {
        "method": METHOD_NAMES[cfg.path_config().spec(0).family],
        "replicates_ok": len(ok),
        "replicates_failed": len(rows) - len(ok),
        "fpr": _stats([r["metrics"]["fpr_pct"] for r in ok])["mean"],
        "fnr": _stats([r["metrics"]["fnr_pct"] for r in ok])["mean"],
        "ms": _stats([r["metrics"]["model_size"] for r in ok])["mean"],
        "ms_sd": _stats([r["metrics"]["model_size"] for r in ok])["sd"],
        "score_kind": kind,
        **{f"score_{k}": v for k, v in _stats([r["metrics"]["score"] for r in ok]).items()},
    }
    out = [method]
    oracle = [r for r in ok if "oracle_score" in r]
    if oracle:
        m = len(TRUE_SUPPORT)
        out.append({
            "method": "Oracle-NN", "replicates_ok": len(oracle),
            "replicates_failed": len(rows) - len(oracle),
            "fpr": 0.0, "fnr": 0.0, "ms": float(m), "ms_sd": 0.0, "score_kind": kind,
            **{f"score_{k}": v for k, v in _stats([r["oracle_score"] for r in oracle]).items()},
        })
    return out


TABLE_COLUMNS = ["method", "scenario", "model", "replicates_ok", "replicates_failed", "fpr", "fnr",
                 "ms", "ms_sd", "score_kind", "score_mean", "score_median", "score_sd"]
REPLICATE_COLUMNS = ["replicate", "status", "model_size", "fpr_pct", "fnr_pct", "score",
                     "score_kind", "lambda", "alpha", "validation_loss", "selected",
                     "oracle_score", "error"]


def _cell(v) -> str:
    if isinstance(v, float):
        return fmt(v)
    return "" if v is None else str(v)


def write_report(report: dict, out_dir) -> dict:
    """Write report.json, table.csv and replicates.csv; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = report["config"]
    paths = {"json": out / "report.json", "table": out / "table.csv",
             "replicates": out / "replicates.csv"}
    with open(paths["json"], "w") as fh:
        json.dump(report, fh, indent=2, allow_nan=True)
    with open(paths["table"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        for row in report["aggregate"]:
            full = {**row, "scenario": cfg["scenario"], "model": cfg["model"]}
            w.writerow([_cell(full[c]) for c in TABLE_COLUMNS])
    with open(paths["replicates"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPLICATE_COLUMNS)
        for row in report["replicates"]:
            m = row.get("metrics", {})
            flat = {
                "replicate": row["replicate"], "status": row["status"],
                "model_size": m.get("model_size"), "fpr_pct": m.get("fpr_pct"),
                "fnr_pct": m.get("fnr_pct"), "score": m.get("score"),
                "score_kind": m.get("score_kind"), "lambda": row.get("lam"),
                "alpha": row.get("alpha"), "validation_loss": row.get("validation_loss"),
                "selected": " ".join(str(j) for j in row.get("selected", [])),
                "oracle_score": row.get("oracle_score"), "error": row.get("error"),
            }
            w.writerow([_cell(flat[c]) for c in REPLICATE_COLUMNS])
    return paths


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
