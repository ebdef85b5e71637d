"""Sparse-input neural networks with group concave penalties."""
from ._backend import NAME as BACKEND
from .data import Dataset, DataError, read_csv, write_csv
from .losses import Binary, Continuous, Survival, cox_loss
from .network import Model, NetworkConfig, NetworkParams, forward_batch, init_params
from .optimizer import FitConfig, FitDivergenceError, fit
from .path import PathConfig, solve_path
from .penalties import PenaltySpec, prox
from .simdata import SimConfig, gen_dataset
from .tuner import TuneConfig, tune

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "DataError", "read_csv", "write_csv", "Binary", "Continuous",
    "Survival", "cox_loss", "Model", "NetworkConfig", "NetworkParams", "forward_batch",
    "init_params", "FitConfig", "FitDivergenceError", "fit", "PathConfig", "solve_path",
    "PenaltySpec", "prox", "SimConfig", "gen_dataset", "TuneConfig", "tune",
]
