"""Command-line entry point: ``spinn {simulate,path,tune,experiment,predict}``.

Every subcommand reads an optional JSON config; any config field can be
overridden by the flag of the same name (``--num-lambdas 20``).
Exit codes: 0 success, 2 config error, 3 data error, 4 divergence or
partial results.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import typing
import warnings
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .data import DataError, Dataset, fmt, read_csv, write_csv
from .experiment import ConfigError, ExperimentConfig, run_experiment, write_report
from .metrics import SCORE_KINDS, prediction_score
from .network import Model
from .optimizer import FitDivergenceError
from .path import NonNullPathEndWarning, PathDivergenceError, solve_path, write_path_csv
from .simdata import TRUE_SUPPORT, gen_dataset
from .tuner import tune, write_table_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> list:
    text = text.strip()
    return [int(t) for t in text.split(",") if t.strip()] if text else []


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none", "null") else conv(text)
    return parse


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    hints = typing.get_type_hints(ExperimentConfig)
    for f in fields(ExperimentConfig):
        hint = hints[f.name]
        args = typing.get_args(hint)
        base = next((a for a in args if a is not type(None)), hint) if args else hint
        if base is bool:
            conv = _parse_bool
        elif base is int:
            conv = int
        elif base is float:
            conv = float
        elif base is list:
            conv = _parse_int_list
        else:
            conv = str
        if type(None) in args:
            conv = _optional(conv)
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f"cfg_{f.name}", type=conv, default=argparse.SUPPRESS,
                            help=f"override config field {f.name}")


def _load_config(ns) -> ExperimentConfig:
    cfg = ExperimentConfig.load(ns.config) if getattr(ns, "config", None) else ExperimentConfig()
    overrides = {k[4:]: v for k, v in vars(ns).items() if k.startswith("cfg_")}
    cfg = replace(cfg, **overrides)
    return cfg.resolved()


def _read_data(path, cfg: ExperimentConfig) -> Dataset:
    ds = read_csv(path, cfg.model)
    if ds.kind != cfg.model:
        raise DataError(f"{path} holds {ds.kind} data but config model is {cfg.model}")
    return ds


def cmd_simulate(ns) -> int:
    cfg = _load_config(ns)
    dataset, _ = gen_dataset(cfg.sim_config(cfg.seed))
    out = Path(ns.out)
    write_csv(dataset, out)
    sidecar = out.with_suffix(".truth.json")
    with open(sidecar, "w") as fh:
        json.dump({"true_support": [j + 1 for j in TRUE_SUPPORT], "n": cfg.n, "d": cfg.d,
                   "model": cfg.model, "censoring_rate": cfg.censoring_rate,
                   "seed": cfg.seed}, fh, indent=2)
    print(f"wrote {out} ({dataset.n} rows, {dataset.d} covariates); truth in {sidecar}")
    return EXIT_OK


def _write_models(path, entries) -> None:
    payload = [{"lambda": e.lam, "selected": [int(j) + 1 for j in e.selected],
                "epochs_run": e.epochs_run, "model": e.model.to_dict()} for e in entries]
    with open(path, "w") as fh:
        json.dump(payload, fh)


def cmd_path(ns) -> int:
    cfg = _load_config(ns)
    ds = _read_data(ns.data, cfg)
    prefix = ns.out_prefix
    fit_config = replace(cfg.fit_config(cfg.seed), alpha=cfg.alpha)
    status = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonNullPathEndWarning)
        try:
            path = solve_path(ds, cfg.net_config(ds.d), fit_config, cfg.path_config(),
                              seed=cfg.seed, backend=cfg.backend)
        except PathDivergenceError as exc:
            print(f"error: {exc}; writing {len(exc.partial)} completed entries", file=sys.stderr)
            path = exc.partial
            status = EXIT_DIVERGED
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if path.entries:
        write_path_csv(path, f"{prefix}_path.csv")
        _write_models(f"{prefix}_models.json", path.entries)
        print(f"wrote {prefix}_path.csv and {prefix}_models.json ({len(path)} lambdas)")
    return status


def cmd_tune(ns) -> int:
    cfg = _load_config(ns)
    ds = _read_data(ns.data, cfg)
    result = tune(ds, cfg.net_config(ds.d), cfg.fit_config(cfg.seed), cfg.tune_config(cfg.seed),
                  workers=cfg.parallel_workers, backend=cfg.backend)
    prefix = ns.out_prefix
    write_table_csv(result, f"{prefix}_table.csv")
    model = Model.from_full(result.params)
    valid = ds.subset(result.valid_idx)
    try:
        vscore = prediction_score(ds.kind, model.predict(valid.X), valid.outcome)
    except ValueError:  # e.g. constant validation response
        vscore = float("nan")
    with open(f"{prefix}_best.json", "w") as fh:
        json.dump({"lambda": result.lam, "alpha": result.alpha,
                   "validation_loss": result.validation_loss,
                   "validation_score": vscore, "score_kind": SCORE_KINDS[ds.kind],
                   "selected": [int(j) + 1 for j in result.selected],
                   "model": model.to_dict()}, fh, indent=2)
    _write_predictions(f"{prefix}_train_predictions.csv", model.predict(ds.X))
    print(f"best lambda={result.lam:.6g} alpha={result.alpha:.6g} "
          f"validation {SCORE_KINDS[ds.kind]}={vscore:.4f} "
          f"selected={[int(j) + 1 for j in result.selected]}")
    diverged = sum(1 for c in result.table if not np.isfinite(c.validation_loss))
    return EXIT_DIVERGED if diverged else EXIT_OK


def cmd_experiment(ns) -> int:
    cfg = _load_config(ns)
    out_dir = ns.out_dir or cfg.output_dir
    if not out_dir:
        raise ConfigError("experiment needs --out-dir or output_dir in the config")
    report = run_experiment(cfg)
    paths = write_report(report, out_dir)
    for row in report["aggregate"]:
        print(f"{row['method']:>10}: FPR {row['fpr']:.1f}  FNR {row['fnr']:.1f}  "
              f"MS {row['ms']:.1f} ({row['ms_sd']:.1f})  "
              f"{row['score_kind']} median {row['score_median']:.3f}")
    print(f"wrote {paths['json']}, {paths['table']}, {paths['replicates']}")
    failed = sum(r["status"] != "ok" for r in report["replicates"])
    return EXIT_DIVERGED if failed > 0.2 * len(report["replicates"]) else EXIT_OK


def load_model(path) -> Model:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model {path}: {exc}") from exc
    if isinstance(data, dict) and "model" in data:
        data = data["model"]
    try:
        return Model.from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"malformed model file {path}: {exc}") from exc


def _write_predictions(path, scores) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["score"])
        for s in scores:
            w.writerow([fmt(s)])


def cmd_predict(ns) -> int:
    model = load_model(ns.model)
    ds = read_csv(ns.data)
    need = int(model.index_map.max()) + 1 if model.index_map.size else 0
    if ds.d < need:
        raise DataError(f"{ns.data} has {ds.d} covariate columns; the model reads "
                        f"variables up to x{need}")
    _write_predictions(ns.out, model.predict(ds.X))
    print(f"wrote {ds.n} predictions to {ns.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("path", help="fit a lambda path; write norms CSV and models JSON")
    _add_config_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("tune", help="holdout-tune (lambda, alpha); write table and best model")
    _add_config_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("experiment", help="run simulation replicates and summarise")
    _add_config_flags(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("predict", help="score a dataset CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FitDivergenceError, FloatingPointError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
