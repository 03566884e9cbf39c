"""Building time-series ingestion, windowing, splitting, and normalization.

Tables are plain float64 column arrays keyed by name, with int64 epoch-second
timestamps. Rows that fail to parse are dropped (and reported by row number);
windowing refuses to span the resulting timestamp gaps, so every emitted
sample is contiguous at the table's sampling period.
"""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError, DimensionError, IngestError

log = logging.getLogger(__name__)


@dataclass
class TimeSeriesTable:
    """Multivariate series with named columns and declared feature/target roles."""

    timestamps: np.ndarray           # int64 epoch seconds, strictly increasing
    columns: dict                    # name -> float64 array, all equal length
    feature_names: list
    target_names: list
    sample_period: int               # seconds
    rejected_rows: list = field(default_factory=list)   # 1-based file rows dropped at ingest

    def __post_init__(self):
        n = len(self.timestamps)
        for name, col in self.columns.items():
            if len(col) != n:
                raise IngestError(f"column '{name}' has {len(col)} rows, expected {n}")
        if n > 1 and not np.all(np.diff(self.timestamps) > 0):
            bad = int(np.argmin(np.diff(self.timestamps) > 0)) + 1
            raise IngestError(f"timestamps are not strictly increasing at row {bad + 1}")
        for name in list(self.feature_names) + list(self.target_names):
            if name not in self.columns:
                raise IngestError(f"declared column '{name}' not present in table")
        if self.sample_period <= 0:
            raise IngestError("sample_period must be positive")

    def __len__(self):
        return len(self.timestamps)

    @property
    def num_features(self) -> int:
        return len(self.feature_names)

    @property
    def num_targets(self) -> int:
        return len(self.target_names)

    def feature_matrix(self) -> np.ndarray:
        return np.stack([self.columns[n] for n in self.feature_names], axis=1)

    def target_matrix(self) -> np.ndarray:
        return np.stack([self.columns[n] for n in self.target_names], axis=1)

    def slice_rows(self, start: int, stop: int) -> "TimeSeriesTable":
        return TimeSeriesTable(
            self.timestamps[start:stop].copy(),
            {k: v[start:stop].copy() for k, v in self.columns.items()},
            list(self.feature_names), list(self.target_names), self.sample_period)


@dataclass
class SequencePair:
    """One training sample: K-step input window, L-step target horizon, and
    the last observed target value y0 at the end of the input window."""

    x: np.ndarray    # (K, d)
    y: np.ndarray    # (L, p)
    y0: np.ndarray   # (p,)


@dataclass
class NormStats:
    """Per-column mean and population standard deviation from a training split."""

    columns: list
    mean: np.ndarray
    std: np.ndarray          # constant columns are stored with std 1.0
    constant: list = field(default_factory=list)

    def pair_for(self, names):
        """(mean, std) vectors for the given column names, in order."""
        index = {c: k for k, c in enumerate(self.columns)}
        try:
            idx = [index[n] for n in names]
        except KeyError as exc:
            raise ConfigError(f"no normalization stats for column {exc.args[0]!r}") from None
        return self.mean[idx], self.std[idx]

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "mean": [float(v) for v in self.mean],
                "std": [float(v) for v in self.std], "constant": list(self.constant)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(list(d["columns"]), np.asarray(d["mean"], dtype=np.float64),
                   np.asarray(d["std"], dtype=np.float64), list(d.get("constant", [])))


def _parse_timestamp(text: str) -> int:
    """Epoch seconds from an integer string or an ISO-8601 instant (naive = UTC)."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise IngestError(f"unparseable timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _infer_period(timestamps: np.ndarray) -> int:
    if len(timestamps) < 2:
        return 1
    diffs = np.diff(timestamps)
    values, counts = np.unique(diffs, return_counts=True)
    return int(values[np.argmax(counts)])


def load_csv(path, timestamp_column: str, feature_columns, target_columns) -> TimeSeriesTable:
    """Read a comma-delimited UTF-8 file into a typed table.

    Column roles come from the caller, never inferred. The timestamp column
    may hold integer epoch seconds or ISO-8601 strings (auto-detected per
    row). Rows with an unparseable or missing value are dropped and their
    1-based file row numbers recorded on the table; structural problems
    (missing columns, duplicate timestamps, empty file) raise IngestError.
    """
    feature_columns = list(feature_columns)
    target_columns = list(target_columns)
    if not target_columns:
        raise IngestError("at least one target column is required")
    wanted = list(dict.fromkeys(feature_columns + target_columns))

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        positions = {}
        for name in [timestamp_column] + wanted:
            if name not in header:
                kind = "timestamp" if name == timestamp_column else (
                    "target" if name in target_columns else "feature")
                raise IngestError(f"{path}: missing {kind} column '{name}'")
            positions[name] = header.index(name)

        timestamps, values, rejected = [], {name: [] for name in wanted}, []
        for row_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                ts = _parse_timestamp(row[positions[timestamp_column]])
                parsed = {}
                for name in wanted:
                    v = float(row[positions[name]])
                    if not np.isfinite(v):
                        raise ValueError(name)
                    parsed[name] = v
            except (ValueError, IndexError, IngestError):
                rejected.append(row_number)
                continue
            timestamps.append(ts)
            for name in wanted:
                values[name].append(parsed[name])

    if not timestamps:
        raise IngestError(f"{path}: no usable data rows")
    if rejected:
        shown = ", ".join(str(r) for r in rejected[:10])
        more = "" if len(rejected) <= 10 else f" (+{len(rejected) - 10} more)"
        log.warning("%s: rejected %d unparseable row(s): %s%s", path, len(rejected), shown, more)

    ts = np.asarray(timestamps, dtype=np.int64)
    diffs = np.diff(ts)
    if np.any(diffs <= 0):
        bad = int(np.argmax(diffs <= 0))
        raise IngestError(
            f"{path}: timestamps not strictly increasing between data rows "
            f"{bad + 1} and {bad + 2}")
    table = TimeSeriesTable(
        ts, {name: np.asarray(vals, dtype=np.float64) for name, vals in values.items()},
        feature_columns, target_columns, _infer_period(ts))
    table.rejected_rows = rejected
    return table


def write_csv(table: TimeSeriesTable, path, timestamp_column: str = "timestamp") -> None:
    """Write the table in the same dialect load_csv reads (ISO-8601
    timestamps, repr-rendered floats). The write is atomic: a finished temp
    file is renamed over the destination.
    """
    names = list(dict.fromkeys(list(table.feature_names) + list(table.target_names)))
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([timestamp_column] + names)
        for k in range(len(table)):
            stamp = datetime.fromtimestamp(int(table.timestamps[k]), tz=timezone.utc)
            writer.writerow([stamp.strftime("%Y-%m-%dT%H:%M:%S")]
                            + [repr(float(table.columns[n][k])) for n in names])
    os.replace(tmp, path)


def resample(table: TimeSeriesTable, new_period: int, method: str = "mean") -> TimeSeriesTable:
    """Block-mean the table down to a coarser period (an integer multiple).

    Output timestamps sit at block ends; length is floor(n / factor).
    """
    if method != "mean":
        raise ConfigError(f"unsupported resample method {method!r}")
    if new_period % table.sample_period != 0:
        raise ConfigError(
            f"new period {new_period}s is not an integer multiple of the "
            f"sample period {table.sample_period}s")
    factor = new_period // table.sample_period
    if factor == 1:
        return table.slice_rows(0, len(table))
    blocks = len(table) // factor
    if blocks == 0:
        raise ConfigError(f"table of {len(table)} rows is too short to resample by {factor}")
    keep = blocks * factor
    out_cols = {name: col[:keep].reshape(blocks, factor).mean(axis=1)
                for name, col in table.columns.items()}
    out_ts = table.timestamps[factor - 1:keep:factor].copy()
    return TimeSeriesTable(out_ts, out_cols, list(table.feature_names),
                           list(table.target_names), int(new_period))


def chrono_split(table: TimeSeriesTable, ratio: float):
    """First floor(ratio*n) rows as train, the rest as test; order preserved."""
    if not (0.0 < ratio < 1.0):
        raise ConfigError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(table)
    n_train = int(np.floor(ratio * n))
    if n_train < 1 or n_train >= n:
        raise ConfigError(f"split ratio {ratio} leaves an empty side for {n} rows")
    return table.slice_rows(0, n_train), table.slice_rows(n_train, n)


def fit_norm(train: TimeSeriesTable) -> NormStats:
    """Per-column mean and population std over the training rows only."""
    names = list(train.columns)
    mean = np.array([float(np.mean(train.columns[n])) for n in names])
    std = np.array([float(np.std(train.columns[n])) for n in names])
    constant = [n for n, s in zip(names, std) if s == 0.0]
    if constant:
        log.warning("constant column(s) %s: std forced to 1.0 for normalization", constant)
        std = np.where(std == 0.0, 1.0, std)
    return NormStats(names, mean, std, constant)


def apply_norm(table: TimeSeriesTable, stats: NormStats) -> TimeSeriesTable:
    """Z-score every column using the supplied stats (never refit here)."""
    mean, std = stats.pair_for(list(table.columns))
    cols = {name: (table.columns[name] - mean[k]) / std[k]
            for k, name in enumerate(table.columns)}
    out = TimeSeriesTable(table.timestamps.copy(), cols, list(table.feature_names),
                          list(table.target_names), table.sample_period)
    return out


def denormalize(values: np.ndarray, stats: NormStats, names) -> np.ndarray:
    """Undo z-scoring for arrays whose last axis follows `names`."""
    mean, std = stats.pair_for(list(names))
    return values * std + mean


def window_count(n: int, input_steps: int, horizon_steps: int, stride: int) -> int:
    """Closed-form number of windows for a gap-free table of n rows."""
    span = input_steps + horizon_steps
    if n < span:
        return 0
    return (n - span) // stride + 1


def make_windows(table: TimeSeriesTable, input_steps: int, horizon_steps: int,
                 stride: int = 1):
    """Cut (x, y, y0) samples at offsets 0, stride, 2*stride, ...

    Each sample needs input_steps + horizon_steps contiguous rows; windows
    spanning a timestamp gap are skipped. y0 is the target row at the last
    input step.
    """
    if input_steps < 1 or horizon_steps < 1 or stride < 1:
        raise ConfigError("input_steps, horizon_steps, and stride must all be >= 1")
    span = input_steps + horizon_steps
    n = len(table)
    if n < span:
        raise DimensionError(
            f"table has {n} rows but windowing needs at least {span} "
            f"(input {input_steps} + horizon {horizon_steps})")
    feats = table.feature_matrix()
    targs = table.target_matrix()
    ts = table.timestamps
    period = table.sample_period
    pairs = []
    for start in range(0, n - span + 1, stride):
        seg = ts[start:start + span]
        if not np.all(np.diff(seg) == period):
            continue
        pairs.append(SequencePair(
            feats[start:start + input_steps].copy(),
            targs[start + input_steps:start + span].copy(),
            targs[start + input_steps - 1].copy()))
    return pairs


def remap_features(table: TimeSeriesTable, feature_map) -> TimeSeriesTable:
    """Reorder/select/zero-pad feature columns to match a source model's layout.

    feature_map is an ordered list, one entry per source-model input: either
    the name of a column in this table or None for an all-zero pad column.
    Target columns pass through untouched.
    """
    n = len(table)
    cols = dict(table.columns)
    new_features = []
    for k, entry in enumerate(feature_map):
        if entry is None:
            pad = f"zero_{k}"
            cols[pad] = np.zeros(n)
            new_features.append(pad)
        else:
            if entry not in table.columns:
                raise ConfigError(f"feature map references unknown column '{entry}'")
            new_features.append(entry)
    return TimeSeriesTable(table.timestamps.copy(), cols, new_features,
                           list(table.target_names), table.sample_period)
