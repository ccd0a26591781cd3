"""organtrain: training companion for the organpoint runtime engine.

Fits residual-MLP point classifiers on ORGD descriptor datasets, exports
ORGC weight bundles the engine can load, and verifies logit parity against
the engine through its command-line interface. The two packages share no
code — the binary formats and the CLI are the entire contract.
"""

from .config import TrainConfig, cosine_lr
from .data import DescriptorCorpus, split_indices
from .errors import DataError, EngineError, FormatError, TrainerError
from .export import export_weights, load_weights, save_weights
from .net import PointClassifierNet, weight_matrices
from .parity import (DEFAULT_ENGINE_CMD, LOGIT_TOLERANCE, ParityReport,
                     run_engine, run_parity_check)
from .train import TrainResult, evaluate, l1_l2_penalty, train, training_summary

__version__ = "0.1.0"

__all__ = [
    "TrainConfig", "cosine_lr",
    "DescriptorCorpus", "split_indices",
    "TrainerError", "FormatError", "DataError", "EngineError",
    "export_weights", "save_weights", "load_weights",
    "PointClassifierNet", "weight_matrices",
    "ParityReport", "run_parity_check", "run_engine",
    "DEFAULT_ENGINE_CMD", "LOGIT_TOLERANCE",
    "TrainResult", "train", "evaluate", "l1_l2_penalty", "training_summary",
    "__version__",
]
