"""Experiment orchestration: domain preparation, pretraining, adaptation,
learning from scratch, and the side-by-side comparison.

A domain is loaded, chronologically split, and normalized with statistics
fitted on its own training rows only. Pretraining consumes the whole source
dataset; the target keeps a held-out chronological test slice. Adaptation
and scratch runs for the same (horizon, seed) consume byte-identical window
stacks; every run records a digest of exactly what it trained and scored on
so that fairness is checkable after the fact. Runs are deterministic given
their seed, so the comparison produces identical artifacts regardless of
worker count.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .checkpoint import save_checkpoint
from .data import (NormStats, TimeSeriesTable, apply_norm, chrono_split,
                   denormalize, fit_norm, load_csv, make_windows,
                   remap_features, resample)
from .errors import ConfigError
from .metrics import EvalReport, evaluate
from .model import ForcingMode, ModelShape, Seq2SeqParams, forward_batch, init_params
from .optim import TrainConfig, TrainTrace, stack_pairs, train
from .synth import SynthConfig, synth_building

METRIC_COLUMNS = ("cvrmse", "nmbe", "mape", "rmse")


@dataclass(frozen=True)
class DatasetSpec:
    """Where one domain's data comes from and how to slice it.

    Exactly one of `synth` / `csv_path` is set. For synthetic domains the
    generator's default column roles can be overridden (any generated column
    may serve as feature or target); for files the roles are mandatory.
    """

    name: str
    synth: SynthConfig | None = None
    csv_path: str | None = None
    timestamp_column: str = "timestamp"
    feature_columns: tuple = ()
    target_columns: tuple = ()
    split_ratio: float = 0.67
    resample_to: int | None = None      # seconds
    feature_map: tuple | None = None    # align features onto a source layout

    def __post_init__(self):
        if (self.synth is None) == (self.csv_path is None):
            raise ConfigError(
                f"domain '{self.name}': exactly one of a synthetic generator "
                f"or a csv path must be given")
        if self.csv_path is not None and not self.target_columns:
            raise ConfigError(f"domain '{self.name}': csv domains need target_columns")

    def load(self) -> TimeSeriesTable:
        if self.synth is not None:
            table = synth_building(self.synth)
            features = list(self.feature_columns) or table.feature_names
            targets = list(self.target_columns) or table.target_names
            table = TimeSeriesTable(table.timestamps, table.columns, features,
                                    targets, table.sample_period)
        else:
            table = load_csv(self.csv_path, self.timestamp_column,
                             self.feature_columns, self.target_columns)
        if self.resample_to is not None:
            table = resample(table, self.resample_to)
        if self.feature_map is not None:
            table = remap_features(table, list(self.feature_map))
        return table

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "synth": None if self.synth is None else self.synth.to_dict(),
            "csv_path": self.csv_path,
            "timestamp_column": self.timestamp_column,
            "feature_columns": list(self.feature_columns),
            "target_columns": list(self.target_columns),
            "split_ratio": self.split_ratio,
            "resample_to": self.resample_to,
            "feature_map": None if self.feature_map is None
                           else list(self.feature_map),
        }


@dataclass
class PreparedDomain:
    """A loaded domain, split and ready for windowing."""

    name: str
    spec: DatasetSpec
    train: TimeSeriesTable
    test: TimeSeriesTable
    stats: NormStats

    @property
    def target_names(self):
        return self.train.target_names


def prepare_domain(spec: DatasetSpec, whole_train: bool = False) -> PreparedDomain:
    """Load, split, and fit normalization for one domain.

    whole_train is the pretraining-source role: every row becomes training
    data and the statistics are fitted on all of it. The chronological tail
    slice stays addressable as `test` for diagnostic scoring, so it overlaps
    the training rows in that role.
    """
    table = spec.load()
    train_tab, test_tab = chrono_split(table, spec.split_ratio)
    if whole_train:
        train_tab = table
    stats = fit_norm(train_tab)
    return PreparedDomain(spec.name, spec, train_tab, test_tab, stats)


def build_windows(domain: PreparedDomain, input_steps: int, horizon_steps: int,
                  stride: int, split: str = "train"):
    """Windows cut from the normalized train or test rows of a domain."""
    if split not in ("train", "test"):
        raise ConfigError(f"split must be 'train' or 'test', got {split!r}")
    table = domain.train if split == "train" else domain.test
    return make_windows(apply_norm(table, domain.stats), input_steps,
                        horizon_steps, stride)


def windows_digest(*stacks) -> str:
    """Order-sensitive content hash of the arrays a run consumed."""
    h = hashlib.sha256()
    for arr in stacks:
        a = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
        h.update(str(a.shape).encode())
        h.update(a.astype("<f8").tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything the comparison needs, resolved and validated."""

    source: DatasetSpec
    target: DatasetSpec
    input_steps: int
    hidden_units: int
    horizons: tuple
    stride: int
    pretrain: TrainConfig
    finetune: TrainConfig
    scratch: TrainConfig
    seeds: tuple = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if self.input_steps < 1 or self.hidden_units < 1 or self.stride < 1:
            raise ConfigError("input_steps, hidden_units, and stride must be >= 1")
        if not self.horizons or any(int(h) < 1 for h in self.horizons):
            raise ConfigError(f"horizons must be a non-empty list of positive "
                              f"steps, got {self.horizons}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")

    def shape_for(self, domain: PreparedDomain, horizon: int) -> ModelShape:
        return ModelShape(domain.train.num_features, domain.train.num_targets,
                          self.hidden_units, self.input_steps, int(horizon))

    def to_dict(self) -> dict:
        """Fully materialized view, defaults included, for artifact echo."""
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "input_steps": self.input_steps,
            "hidden_units": self.hidden_units,
            "horizons": [int(h) for h in self.horizons],
            "stride": self.stride,
            "pretrain": self.pretrain.to_dict(),
            "finetune": self.finetune.to_dict(),
            "scratch": self.scratch.to_dict(),
            "seeds": [int(s) for s in self.seeds],
        }


def check_transfer_layout(source: PreparedDomain, target: PreparedDomain) -> None:
    """The target's (possibly remapped) layout must match the source model."""
    if target.train.num_features != source.train.num_features:
        raise ConfigError(
            f"target '{target.name}' has {target.train.num_features} feature "
            f"columns but source '{source.name}' expects "
            f"{source.train.num_features}; supply a feature_map to align them")
    if target.train.num_targets != source.train.num_targets:
        raise ConfigError(
            f"target '{target.name}' predicts {target.train.num_targets} "
            f"column(s) but the source model emits {source.train.num_targets}")


# --------------------------------------------------------------------------
# single runs
# --------------------------------------------------------------------------

@dataclass
class RunResult:
    """One trained-and-scored model on the target test split."""

    method: str                    # "adapt" or "scratch"
    horizon: int
    seed: int
    dataset: str                   # provenance label for report rows
    epochs: int
    epoch_losses: list
    train_seconds: float
    windows_digest: str
    reports: list                  # one EvalReport per target column
    params: Seq2SeqParams | None = None

    @property
    def primary_rmse(self) -> float:
        return self.reports[0].rmse

    def without_params(self) -> "RunResult":
        return replace(self, params=None)


@dataclass
class _Job:
    """Self-contained, picklable work unit for one run."""

    method: str
    horizon: int
    seed: int
    shape: ModelShape
    init_flat: np.ndarray | None    # None means fresh init from the seed
    cfg: TrainConfig
    train_stack: tuple
    test_stack: tuple
    target_mean: np.ndarray
    target_std: np.ndarray
    target_names: tuple
    dataset: str
    keep_params: bool = False


def _run_job(job: _Job) -> RunResult:
    if job.method == "adapt":
        if job.init_flat is None:
            raise ConfigError("adapt run is missing pretrained parameters")
        start = Seq2SeqParams.from_flat(job.shape, job.init_flat)
    elif job.method == "scratch":
        start = init_params(job.shape, job.seed)
    else:
        raise ConfigError(f"unknown run method {job.method!r}")

    cfg = job.cfg.with_seed(job.seed)
    trace = train(start, job.train_stack, cfg)
    digest = windows_digest(*job.train_stack, *job.test_stack)

    test_x, test_y, test_y0 = job.test_stack
    preds = forward_batch(trace.params, test_x, test_y0, ForcingMode.NON_TEACHER)
    y_true = test_y * job.target_std + job.target_mean
    y_pred = preds * job.target_std + job.target_mean
    reports = evaluate(y_true, y_pred, list(job.target_names))
    return RunResult(
        method=job.method, horizon=job.horizon, seed=job.seed,
        dataset=job.dataset, epochs=cfg.epochs,
        epoch_losses=list(trace.epoch_losses),
        train_seconds=float(sum(trace.epoch_seconds)),
        windows_digest=digest, reports=reports,
        params=trace.params if job.keep_params else None)


def _make_job(spec: ExperimentSpec, target: PreparedDomain, method: str,
              horizon: int, seed: int, train_stack, test_stack,
              init_flat=None, keep_params=False) -> _Job:
    mean, std = target.stats.pair_for(target.target_names)
    if method == "adapt":
        label = f"{spec.source.name}->{target.name}"
        cfg = spec.finetune
    else:
        label = target.name
        cfg = spec.scratch
    return _Job(method=method, horizon=int(horizon), seed=int(seed),
                shape=spec.shape_for(target, horizon), init_flat=init_flat,
                cfg=cfg, train_stack=train_stack, test_stack=test_stack,
                target_mean=mean, target_std=std,
                target_names=tuple(target.target_names), dataset=label,
                keep_params=keep_params)


def _target_stacks(spec: ExperimentSpec, target: PreparedDomain, horizon: int):
    train_pairs = build_windows(target, spec.input_steps, horizon, spec.stride, "train")
    test_pairs = build_windows(target, spec.input_steps, horizon, 1, "test")
    return stack_pairs(train_pairs), stack_pairs(test_pairs)


def pretrain_all(spec: ExperimentSpec, source: PreparedDomain) -> dict:
    """One source model per horizon, each trained with the pretrain schedule."""
    traces = {}
    for horizon in sorted(set(int(h) for h in spec.horizons)):
        pairs = build_windows(source, spec.input_steps, horizon, spec.stride, "train")
        shape = spec.shape_for(source, horizon)
        start = init_params(shape, spec.pretrain.seed)
        traces[horizon] = train(start, pairs, spec.pretrain)
    return traces


def run_adapt(spec: ExperimentSpec, target: PreparedDomain,
              pretrained: Seq2SeqParams, horizon: int, seed: int,
              keep_params: bool = False) -> RunResult:
    """Fine-tune a pretrained model on the target and score its test split."""
    train_stack, test_stack = _target_stacks(spec, target, horizon)
    if pretrained.shape != spec.shape_for(target, horizon):
        raise ConfigError(
            f"checkpoint shape {pretrained.shape} does not match the "
            f"experiment's target shape {spec.shape_for(target, horizon)}")
    job = _make_job(spec, target, "adapt", horizon, seed, train_stack,
                    test_stack, init_flat=pretrained.view().flatten(),
                    keep_params=keep_params)
    return _run_job(job)


def run_scratch(spec: ExperimentSpec, target: PreparedDomain, horizon: int,
                seed: int, keep_params: bool = False) -> RunResult:
    """Train on the target alone from a fresh seeded init; same data as adapt."""
    train_stack, test_stack = _target_stacks(spec, target, horizon)
    job = _make_job(spec, target, "scratch", horizon, seed, train_stack,
                    test_stack, keep_params=keep_params)
    return _run_job(job)


def evaluate_model(params: Seq2SeqParams, domain: PreparedDomain,
                   split: str = "test"):
    """Score fixed parameters on a domain split; no training happens here."""
    pairs = build_windows(domain, params.shape.input_steps,
                          params.shape.horizon_steps, 1, split)
    X, Y, Y0 = stack_pairs(pairs)
    preds = forward_batch(params, X, Y0, ForcingMode.NON_TEACHER)
    mean, std = domain.stats.pair_for(domain.target_names)
    return evaluate(Y * std + mean, preds * std + mean, list(domain.target_names))


def predict_timeline(params: Seq2SeqParams, domain: PreparedDomain,
                     split: str = "test", max_points: int = 400):
    """Denormalized one-step-ahead truth and prediction for the primary
    target over the first stretch of a split, for overlay figures."""
    pairs = build_windows(domain, params.shape.input_steps,
                          params.shape.horizon_steps, 1, split)
    X, Y, Y0 = stack_pairs(pairs[:max_points])
    preds = forward_batch(params, X, Y0, ForcingMode.NON_TEACHER)
    mean, std = domain.stats.pair_for(domain.target_names)
    y_true = Y[:, 0, 0] * std[0] + mean[0]
    y_pred = preds[:, 0, 0] * std[0] + mean[0]
    return y_true, y_pred


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------

@dataclass
class HorizonSummary:
    """Median-over-seeds verdict for one horizon of one target column."""

    horizon: int
    target: str
    adapt_rmse: float
    scratch_rmse: float
    adapt_cvrmse: float
    scratch_cvrmse: float
    adapt_nmbe: float
    scratch_nmbe: float
    adapt_mape: float
    scratch_mape: float
    seed_wins: int           # seeds where adapt beat scratch on rmse
    num_seeds: int
    improvement_pct: float   # 100 * (scratch - adapt) / scratch, medians

    @property
    def adapt_won(self) -> bool:
        return self.adapt_rmse < self.scratch_rmse


@dataclass
class ComparisonResult:
    spec: ExperimentSpec
    source_name: str
    target_name: str
    pretrain_traces: dict          # horizon -> TrainTrace
    pretrain_metas: dict           # horizon -> checkpoint meta dict
    runs: list                     # RunResult, fixed ordering
    summaries: list                # HorizonSummary per (horizon, target)

    @property
    def all_horizons_won(self) -> bool:
        return all(s.adapt_won for s in self.summaries)


def _summarize(spec: ExperimentSpec, runs) -> list:
    horizons = sorted(set(r.horizon for r in runs))
    targets = list(dict.fromkeys(rep.target for r in runs for rep in r.reports))
    out = []
    for horizon in horizons:
        for tname in targets:
            per_method = {}
            for method in ("adapt", "scratch"):
                rows = sorted((r for r in runs
                               if r.horizon == horizon and r.method == method),
                              key=lambda r: r.seed)
                reps = [next(rep for rep in r.reports if rep.target == tname)
                        for r in rows]
                med = {m: float(np.median([getattr(rep, m) for rep in reps]))
                       for m in METRIC_COLUMNS}
                med["by_seed"] = {r.seed: rep.rmse for r, rep in zip(rows, reps)}
                per_method[method] = med
            seeds = sorted(per_method["adapt"]["by_seed"])
            wins = sum(1 for s in seeds
                       if per_method["adapt"]["by_seed"][s]
                       < per_method["scratch"]["by_seed"][s])
            scratch_med = per_method["scratch"]["rmse"]
            adapt_med = per_method["adapt"]["rmse"]
            out.append(HorizonSummary(
                horizon=horizon, target=tname,
                adapt_rmse=adapt_med, scratch_rmse=scratch_med,
                adapt_cvrmse=per_method["adapt"]["cvrmse"],
                scratch_cvrmse=per_method["scratch"]["cvrmse"],
                adapt_nmbe=per_method["adapt"]["nmbe"],
                scratch_nmbe=per_method["scratch"]["nmbe"],
                adapt_mape=per_method["adapt"]["mape"],
                scratch_mape=per_method["scratch"]["mape"],
                seed_wins=wins, num_seeds=len(seeds),
                improvement_pct=float(100.0 * (scratch_med - adapt_med)
                                      / scratch_med) if scratch_med else 0.0))
    return out


def compare(spec: ExperimentSpec, workers: int | None = None) -> ComparisonResult:
    """Pretrain on the source, then race adaptation against scratch on the
    target across every (horizon, seed).

    Worker processes only change wall time: each job is deterministic given
    its seed and jobs are collected in submission order.
    """
    source = prepare_domain(spec.source, whole_train=True)
    target = prepare_domain(spec.target)
    check_transfer_layout(source, target)

    pre_traces = pretrain_all(spec, source)
    pre_metas = {h: pretrain_meta(spec, source, h, t)
                 for h, t in pre_traces.items()}
    horizons = sorted(pre_traces)

    jobs = []
    for horizon in horizons:
        train_stack, test_stack = _target_stacks(spec, target, horizon)
        flat = pre_traces[horizon].params.view().flatten()
        for seed in spec.seeds:
            jobs.append(_make_job(spec, target, "adapt", horizon, seed,
                                  train_stack, test_stack, init_flat=flat))
            jobs.append(_make_job(spec, target, "scratch", horizon, seed,
                                  train_stack, test_stack))

    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_job, jobs))
    else:
        runs = [_run_job(job) for job in jobs]

    return ComparisonResult(
        spec=spec, source_name=source.name, target_name=target.name,
        pretrain_traces=pre_traces, pretrain_metas=pre_metas, runs=runs,
        summaries=_summarize(spec, runs))


# --------------------------------------------------------------------------
# artifacts
# --------------------------------------------------------------------------

def _csv_cell(value) -> str:
    """repr-based float rendering keeps csv output byte-deterministic."""
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_text(path, text: str) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_rows_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    _atomic_text(path, "\n".join(lines) + "\n")


def write_json(path, payload) -> None:
    _atomic_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def checkpoint_name(horizon: int) -> str:
    return f"pretrained-h{int(horizon):02d}.ckpt"


def pretrain_meta(spec: ExperimentSpec, source: PreparedDomain, horizon: int,
                  trace: TrainTrace) -> dict:
    """Provenance stored in a pretrained checkpoint: where it came from, how
    it was trained, and the normalization its training data saw."""
    return {
        "role": "pretrained",
        "domain": source.name,
        "horizon": int(horizon),
        "features": list(source.train.feature_names),
        "targets": list(source.train.target_names),
        "norm_stats": source.stats.to_dict(),
        "train_config": spec.pretrain.to_dict(),
        "config_digest": spec.pretrain.digest(),
        "epochs": len(trace.epoch_losses),
        "seed": spec.pretrain.seed,
        "final_loss": float(trace.epoch_losses[-1]) if trace.epoch_losses else None,
    }


def comparison_rows(result: ComparisonResult) -> list:
    """The comparison table: per horizon one scratch row and one adapt row
    of seed-median metrics, plus the relative RMSE improvement.

    Column order: dataset, mode, horizon_steps, cvrmse_pct, nmbe_pct,
    mape_pct, rmse, improvement_pct. The improvement value describes the
    scratch/adapt pair and is repeated on both of its rows.
    """
    adapt_label = f"{result.source_name}->{result.target_name}"
    rows = []
    for s in sorted(result.summaries, key=lambda s: (s.horizon, s.target)):
        rows.append([result.target_name, "scratch", s.horizon,
                     s.scratch_cvrmse, s.scratch_nmbe, s.scratch_mape,
                     s.scratch_rmse, s.improvement_pct])
        rows.append([adapt_label, "adapt", s.horizon,
                     s.adapt_cvrmse, s.adapt_nmbe, s.adapt_mape,
                     s.adapt_rmse, s.improvement_pct])
    return rows


COMPARISON_HEADER = ["dataset", "mode", "horizon_steps", "cvrmse_pct",
                     "nmbe_pct", "mape_pct", "rmse", "improvement_pct"]


def write_comparison_artifacts(result: ComparisonResult, out_dir,
                               figures: bool = True) -> dict:
    """Write every comparison artifact under out_dir; returns {kind: path}.

    CSV, JSON, and checkpoint content is a pure function of the experiment
    spec; wall-clock timings go to a separate meta file.
    """
    out_dir = os.fspath(out_dir)
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    os.makedirs(ckpt_dir, exist_ok=True)
    spec = result.spec
    paths = {}

    for horizon, trace in sorted(result.pretrain_traces.items()):
        path = os.path.join(ckpt_dir, checkpoint_name(horizon))
        save_checkpoint(path, trace.params, result.pretrain_metas[horizon])
        paths[f"checkpoint_h{horizon}"] = path

    rows = comparison_rows(result)
    paths["comparison"] = os.path.join(out_dir, "comparison.csv")
    write_rows_csv(paths["comparison"], COMPARISON_HEADER, rows)
    paths["comparison_json"] = os.path.join(out_dir, "comparison.json")
    write_json(paths["comparison_json"],
               [dict(zip(COMPARISON_HEADER, row)) for row in rows])

    run_rows = []
    for run in result.runs:
        for rep in run.reports:
            run_rows.append([run.horizon, run.seed, run.method, run.dataset,
                             rep.target, run.epochs, rep.cvrmse, rep.nmbe,
                             rep.mape, rep.mape_excluded, rep.rmse,
                             run.windows_digest])
    paths["runs"] = os.path.join(out_dir, "runs.csv")
    write_rows_csv(paths["runs"],
                   ["horizon", "seed", "method", "dataset", "target", "epochs",
                    "cvrmse", "nmbe", "mape", "mape_excluded", "rmse",
                    "windows_digest"], run_rows)

    paths["pretrain_loss"] = os.path.join(out_dir, "pretrain_loss.csv")
    loss_rows = []
    for horizon, trace in sorted(result.pretrain_traces.items()):
        for epoch, loss in enumerate(trace.epoch_losses, start=1):
            loss_rows.append([horizon, epoch, loss])
    write_rows_csv(paths["pretrain_loss"], ["horizon", "epoch", "loss"], loss_rows)

    paths["runs_loss"] = os.path.join(out_dir, "runs_loss.csv")
    run_loss_rows = []
    for run in result.runs:
        for epoch, loss in enumerate(run.epoch_losses, start=1):
            run_loss_rows.append([run.horizon, run.seed, run.method, epoch, loss])
    write_rows_csv(paths["runs_loss"],
                   ["horizon", "seed", "method", "epoch", "loss"], run_loss_rows)

    summary = {
        "source": result.source_name,
        "target": result.target_name,
        "horizons": sorted(result.pretrain_traces),
        "seeds": list(spec.seeds),
        "per_horizon": [
            {"horizon": s.horizon, "target": s.target,
             "adapt_rmse": s.adapt_rmse, "scratch_rmse": s.scratch_rmse,
             "improvement_pct": s.improvement_pct, "seed_wins": s.seed_wins,
             "num_seeds": s.num_seeds, "adapt_won": s.adapt_won}
            for s in result.summaries],
        "adaptation_won_all_horizons": result.all_horizons_won,
    }
    paths["summary_json"] = os.path.join(out_dir, "summary.json")
    write_json(paths["summary_json"], summary)

    paths["resolved_config"] = os.path.join(out_dir, "resolved_config.json")
    write_json(paths["resolved_config"], spec.to_dict())

    meta = {
        "pretrain_seconds": {str(h): float(sum(t.epoch_seconds))
                             for h, t in sorted(result.pretrain_traces.items())},
        "run_seconds": [
            {"horizon": r.horizon, "seed": r.seed, "method": r.method,
             "seconds": r.train_seconds} for r in result.runs],
    }
    paths["run_meta"] = os.path.join(out_dir, "run_meta.json")
    write_json(paths["run_meta"], meta)

    if figures:
        from . import plots
        fig_dir = os.path.join(out_dir, "figures")
        os.makedirs(fig_dir, exist_ok=True)
        paths["fig_rmse"] = plots.rmse_vs_horizon(
            result.summaries, os.path.join(fig_dir, "rmse_vs_horizon.png"))
        paths["fig_pretrain"] = plots.loss_curves(
            {h: t.epoch_losses for h, t in result.pretrain_traces.items()},
            os.path.join(fig_dir, "pretrain_loss.png"),
            title="source pretraining")
        paths["fig_improvement"] = plots.improvement_bars(
            result.summaries, os.path.join(fig_dir, "improvement.png"))
    return paths
