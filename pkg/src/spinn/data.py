"""Dataset container and its CSV form.

CSV layout: a header row, covariates ``x1..xd``, then ``y`` (regression or
classification) or ``time,event`` (survival). Numbers are written with 17
significant digits so files round-trip exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .losses import Binary, Continuous, Outcome, Survival


class DataError(ValueError):
    """Malformed or inconsistent dataset file."""


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    outcome: Outcome

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != len(self.outcome):
            raise DataError(f"X has {X.shape[0]} rows but outcome has {len(self.outcome)}")
        if X.shape[0] == 0:
            raise DataError("dataset is empty")
        if not np.all(np.isfinite(X)):
            raise DataError("X contains non-finite values")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def kind(self) -> str:
        return self.outcome.kind

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.outcome.subset(idx))

    def columns(self, cols) -> "Dataset":
        return Dataset(self.X[:, np.asarray(cols, dtype=np.int64)], self.outcome)

    def equals(self, other: "Dataset") -> bool:
        if type(self.outcome) is not type(other.outcome):
            return False
        if not np.array_equal(self.X, other.X):
            return False
        if isinstance(self.outcome, Survival):
            return (np.array_equal(self.outcome.time, other.outcome.time)
                    and np.array_equal(self.outcome.event, other.outcome.event))
        return np.array_equal(self.outcome.y, other.outcome.y)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(dataset: Dataset, path) -> None:
    d = dataset.d
    header = [f"x{j + 1}" for j in range(d)]
    out = dataset.outcome
    if isinstance(out, Survival):
        header += ["time", "event"]
        tail = np.column_stack([out.time, out.event])
    else:
        header += ["y"]
        tail = out.y[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row, extra in zip(dataset.X, tail):
            cells = [fmt(v) for v in row]
            if isinstance(out, Survival):
                cells += [fmt(extra[0]), str(int(extra[1]))]
            elif isinstance(out, Binary):
                cells.append(str(int(extra[0])))
            else:
                cells.append(fmt(extra[0]))
            w.writerow(cells)


def read_csv(path, kind: str | None = None) -> Dataset:
    """Load a dataset file; ``kind`` is inferred from the header when omitted.

    A ``y`` column is read as classification only when ``kind`` says so.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    try:
        values = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric or ragged rows ({exc})") from exc
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: contains nan or infinite values")
    xcols = [i for i, h in enumerate(header) if h.startswith("x")]
    expected = [f"x{j + 1}" for j in range(len(xcols))]
    if [header[i] for i in xcols] != expected or xcols != list(range(len(xcols))):
        raise DataError(f"{path}: covariate columns must be x1..xd first, got {header}")
    rest = header[len(xcols):]
    X = values[:, :len(xcols)]
    if rest == ["time", "event"]:
        if kind not in (None, "survival"):
            raise DataError(f"{path} holds survival data but {kind} was requested")
        event = values[:, -1]
        if not np.all((event == 0) | (event == 1)):
            raise DataError(f"{path}: event column must be 0/1")
        time = values[:, -2]
        if not np.all(time > 0):
            raise DataError(f"{path}: survival times must be positive")
        return Dataset(X, Survival(time, event))
    if rest == ["y"]:
        y = values[:, -1]
        if kind == "classification":
            if not np.all((y == 0) | (y == 1)):
                raise DataError(f"{path}: classification labels must be 0/1")
            return Dataset(X, Binary(y))
        if kind not in (None, "regression"):
            raise DataError(f"{path} has a y column but {kind} was requested")
        return Dataset(X, Continuous(y))
    raise DataError(f"{path}: expected trailing 'y' or 'time,event' columns, got {rest}")
