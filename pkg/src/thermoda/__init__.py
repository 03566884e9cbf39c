"""Deep supervised domain adaptation for building thermal forecasting.

Pretrain an LSTM sequence-to-sequence regressor on a data-rich source
building, transfer the parameters, and fine-tune on a data-poor target.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import (NormStats, SequencePair, TimeSeriesTable, apply_norm,
                   chrono_split, denormalize, fit_norm, load_csv,
                   make_windows, remap_features, resample, window_count,
                   write_csv)
from .errors import (CheckpointError, ConfigError, DimensionError,
                     IngestError, MetricError, NumericError, ThermodaError)
from .metrics import EvalReport, cvrmse, evaluate, mape, nmbe, rmse
from .model import (ForcingMode, ModelShape, Seq2SeqParams, decode, encode,
                    forward, forward_batch, init_params, loss_and_grad)
from .optim import AdamState, TrainConfig, TrainTrace, adam_step, train
from .pipeline import (ComparisonResult, DatasetSpec, ExperimentSpec,
                       HorizonSummary, PreparedDomain, RunResult, compare,
                       evaluate_model, prepare_domain, run_adapt,
                       run_scratch, windows_digest)
from .synth import SynthConfig, synth_building

__version__ = "0.1.0"

__all__ = [
    "AdamState", "Checkpoint", "CheckpointError", "ComparisonResult",
    "ConfigError", "DatasetSpec", "DimensionError", "EvalReport",
    "ExperimentSpec", "ForcingMode", "HorizonSummary", "IngestError",
    "MetricError", "ModelShape", "NormStats", "NumericError",
    "PreparedDomain", "RunResult", "Seq2SeqParams", "SequencePair",
    "SynthConfig", "ThermodaError", "TimeSeriesTable", "TrainConfig",
    "TrainTrace", "adam_step", "apply_norm", "chrono_split", "compare",
    "cvrmse", "decode", "denormalize", "encode", "evaluate",
    "evaluate_model", "fit_norm", "forward", "forward_batch", "init_params",
    "load_checkpoint", "load_csv", "loss_and_grad", "make_windows", "mape",
    "nmbe", "prepare_domain", "remap_features", "resample", "rmse",
    "run_adapt", "run_scratch", "save_checkpoint", "synth_building", "train",
    "window_count", "windows_digest", "write_csv",
]
