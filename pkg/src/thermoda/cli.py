"""Command-line entry points.

Subcommands: synth, pretrain, adapt, scratch, evaluate, compare. All of them
read one JSON experiment config; flags override the narrow set of knobs that
vary between invocations (seed, epochs, horizon, output directory, workers).

Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import plots
from .checkpoint import load_checkpoint, save_checkpoint
from .config import (build_dataset, build_experiment, load_config,
                     resolve_out, resolve_workers)
from .data import write_csv
from .errors import (CheckpointError, ConfigError, IngestError, ThermodaError)
from .pipeline import (checkpoint_name, compare, comparison_rows,
                       evaluate_model, predict_timeline, prepare_domain,
                       run_adapt, run_scratch, pretrain_all, pretrain_meta,
                       write_comparison_artifacts, write_json, write_rows_csv)

RUN_CSV_HEADER = ["horizon", "seed", "method", "dataset", "target", "epochs",
                  "cvrmse", "nmbe", "mape", "mape_excluded", "rmse",
                  "windows_digest"]


def _metric_table(rows) -> str:
    """rows: (label, EvalReport). Metric order is CVRMSE, NMBE, MAPE, RMSE."""
    lines = [f"{'dataset':<26} {'target':<14} {'points':>8} "
             f"{'CVRMSE%':>9} {'NMBE%':>9} {'MAPE%':>9} {'RMSE':>10}"]
    for label, rep in rows:
        lines.append(
            f"{label:<26} {rep.target:<14} {rep.num_points:>8d} "
            f"{rep.cvrmse:>9.3f} {rep.nmbe:>9.3f} {rep.mape:>9.3f} "
            f"{rep.rmse:>10.4f}")
    return "\n".join(lines)


def _experiment(args):
    cfg = load_config(args.config)
    spec = build_experiment(cfg)
    if getattr(args, "horizon", None) is not None:
        if args.horizon not in spec.horizons:
            raise ConfigError(
                f"horizon {args.horizon} is not in the experiment's horizons "
                f"{list(spec.horizons)}")
        spec = replace(spec, horizons=(args.horizon,))
    return cfg, spec


def _run_rows(run):
    for rep in run.reports:
        yield [run.horizon, run.seed, run.method, run.dataset, rep.target,
               run.epochs, rep.cvrmse, rep.nmbe, rep.mape, rep.mape_excluded,
               rep.rmse, run.windows_digest]


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_synth(args) -> int:
    """Generate the synthetic csv for one domain, or both when unrestricted."""
    cfg = load_config(args.config)
    domains = [args.domain] if args.domain else ["source", "target"]
    out_dir = resolve_out(args.out, cfg)
    os.makedirs(out_dir, exist_ok=True)
    for name in domains:
        if name not in cfg:
            raise ConfigError(f"config has no '{name}' section")
        spec = build_dataset(name, cfg[name])
        if spec.synth is None:
            raise ConfigError(f"domain '{name}' reads a csv; nothing to generate")
        table = spec.load()
        path = os.path.join(out_dir, f"{spec.name}.csv")
        write_csv(table, path, spec.timestamp_column)
        print(f"{len(table)} rows -> {path}")
    return 0


def cmd_pretrain(args) -> int:
    cfg, spec = _experiment(args)
    if args.epochs is not None:
        spec = replace(spec, pretrain=replace(spec.pretrain, epochs=args.epochs))
    out_dir = resolve_out(args.out, cfg)
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(ckpt_dir, exist_ok=True)
    os.makedirs(fig_dir, exist_ok=True)

    source = prepare_domain(spec.source, whole_train=True)
    traces = pretrain_all(spec, source)
    loss_rows = []
    for horizon, trace in sorted(traces.items()):
        path = os.path.join(ckpt_dir, checkpoint_name(horizon))
        save_checkpoint(path, trace.params,
                        pretrain_meta(spec, source, horizon, trace))
        for epoch, loss in enumerate(trace.epoch_losses, start=1):
            loss_rows.append([horizon, epoch, loss])
        final = trace.epoch_losses[-1] if trace.epoch_losses else float("nan")
        print(f"horizon {horizon:>3d}: {len(trace.epoch_losses)} epochs, "
              f"final loss {final:.6f} -> {path}")
    write_rows_csv(os.path.join(out_dir, "pretrain_loss.csv"),
                   ["horizon", "epoch", "loss"], loss_rows)
    write_json(os.path.join(out_dir, "resolved_config.json"), spec.to_dict())
    plots.loss_curves({h: t.epoch_losses for h, t in traces.items()},
                      os.path.join(fig_dir, "pretrain_loss.png"),
                      title="source pretraining")
    return 0


def _single_run(args, method: str) -> int:
    cfg, spec = _experiment(args)
    phase = "finetune" if method == "adapt" else "scratch"
    if args.epochs is not None:
        spec = replace(spec, **{phase: replace(getattr(spec, phase),
                                               epochs=args.epochs)})
    seed = args.seed if args.seed is not None else spec.seeds[0]
    out_dir = resolve_out(args.out, cfg)
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(ckpt_dir, exist_ok=True)
    os.makedirs(fig_dir, exist_ok=True)

    target = prepare_domain(spec.target)
    rows, table_rows, runs = [], [], {}
    for horizon in sorted(set(spec.horizons)):
        if method == "adapt":
            ck_path = args.checkpoint
            if os.path.isdir(ck_path):
                ck_path = os.path.join(ck_path, checkpoint_name(horizon))
            ck = load_checkpoint(ck_path)
            run = run_adapt(spec, target, ck.params, horizon, seed,
                            keep_params=True)
            parent = ck.meta.get("domain", "unknown") if isinstance(ck.meta, dict) else "unknown"
            meta = {"role": "adapted", "parent_domain": parent}
            phase_cfg = spec.finetune
        else:
            run = run_scratch(spec, target, horizon, seed, keep_params=True)
            meta = {"role": "scratch"}
            phase_cfg = spec.scratch
        meta.update(
            domain=target.name, horizon=horizon, seed=seed,
            features=list(target.train.feature_names),
            targets=list(target.train.target_names),
            norm_stats=target.stats.to_dict(),
            train_config=phase_cfg.with_seed(seed).to_dict(),
            config_digest=phase_cfg.digest(),
            epochs=run.epochs,
            final_loss=run.epoch_losses[-1] if run.epoch_losses else None)
        save_checkpoint(os.path.join(
            ckpt_dir, f"{method}-h{horizon:02d}-s{seed}.ckpt"),
            run.params, meta)
        rows.extend(_run_rows(run))
        table_rows.extend((f"h={horizon} {run.dataset}", rep)
                          for rep in run.reports)
        runs[horizon] = run

    write_rows_csv(os.path.join(out_dir, f"{method}_metrics.csv"),
                   RUN_CSV_HEADER, rows)
    write_rows_csv(os.path.join(out_dir, f"{method}_loss.csv"),
                   ["horizon", "epoch", "loss"],
                   [[h, e, loss] for h, r in sorted(runs.items())
                    for e, loss in enumerate(r.epoch_losses, start=1)])
    pred_rows = []
    timelines = {h: predict_timeline(r.params, target)
                 for h, r in sorted(runs.items())}
    for h, (yt, yp) in timelines.items():
        pred_rows.extend([h, i, t, p]
                         for i, (t, p) in enumerate(zip(yt, yp)))
    write_rows_csv(os.path.join(out_dir, f"{method}_predictions.csv"),
                   ["horizon", "step", "truth", "prediction"], pred_rows)
    write_json(os.path.join(out_dir, "resolved_config.json"), spec.to_dict())

    first = min(runs)
    curves = {h: r.epoch_losses for h, r in runs.items() if r.epoch_losses}
    if curves:
        plots.loss_curves(curves, os.path.join(fig_dir, f"{method}_loss.png"),
                          title=f"{method} on the target")
    yt, yp = timelines[first]
    plots.prediction_overlay(
        yt, yp, target.target_names[0],
        os.path.join(fig_dir, f"{method}_overlay_h{first:02d}.png"),
        title=f"{method}, one-step-ahead, horizon {first}")
    print(_metric_table(table_rows))
    print(f"artifacts -> {out_dir}")
    return 0


def cmd_adapt(args) -> int:
    return _single_run(args, "adapt")


def cmd_scratch(args) -> int:
    return _single_run(args, "scratch")


def cmd_evaluate(args) -> int:
    """Score a checkpoint on a domain split. Writes exactly one report file."""
    cfg, spec = _experiment(args)
    if args.domain == "target":
        domain = prepare_domain(spec.target)
    else:
        # the source role trains on all rows, so score with matching stats
        domain = prepare_domain(spec.source, whole_train=True)
    ck = load_checkpoint(args.checkpoint)
    reports = evaluate_model(ck.params, domain, args.split)
    label = f"{domain.name}/{args.split}"
    print(_metric_table([(label, rep) for rep in reports]))

    out_dir = resolve_out(args.out, cfg)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"evaluate_{domain.name}_{args.split}.csv")
    write_rows_csv(path,
                   ["dataset", "split", "target", "num_points", "cvrmse",
                    "nmbe", "mape", "mape_excluded", "rmse"],
                   [[domain.name, args.split, rep.target, rep.num_points,
                     rep.cvrmse, rep.nmbe, rep.mape, rep.mape_excluded,
                     rep.rmse] for rep in reports])
    print(f"report -> {path}")
    return 0


def cmd_compare(args) -> int:
    cfg, spec = _experiment(args)
    if args.epochs is not None:
        spec = replace(spec,
                       finetune=replace(spec.finetune, epochs=args.epochs),
                       scratch=replace(spec.scratch, epochs=args.epochs))
    if args.seed is not None:
        spec = replace(spec, seeds=(args.seed,))
    out_dir = resolve_out(args.out, cfg)
    workers = resolve_workers(args.workers, cfg)
    os.makedirs(out_dir, exist_ok=True)

    result = compare(spec, workers=workers)
    write_comparison_artifacts(result, out_dir, figures=not args.no_figures)

    print(f"{'dataset':<26} {'mode':<8} {'horizon':>7} {'CVRMSE%':>9} "
          f"{'NMBE%':>9} {'MAPE%':>9} {'RMSE':>10} {'improve%':>9}")
    for row in comparison_rows(result):
        dataset, mode, horizon, cv, nm, mp, rm, imp = row
        print(f"{dataset:<26} {mode:<8} {horizon:>7d} {cv:>9.3f} "
              f"{nm:>9.3f} {mp:>9.3f} {rm:>10.4f} {imp:>8.1f}%")
    if result.all_horizons_won:
        print("verdict: adaptation beat scratch at every horizon")
    else:
        lost = [str(s.horizon) for s in result.summaries if not s.adapt_won]
        print(f"verdict: scratch held the lead at horizon(s) {', '.join(lost)}")
    print(f"artifacts -> {out_dir}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(p, checkpoint=False, seed=True, epochs=True, horizon=True):
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--out", help="output directory (default: config, then "
                                 "$THERMODA_OUT, then ./thermoda-out)")
    if checkpoint:
        p.add_argument("--checkpoint", required=True,
                       help="checkpoint file, or a directory of pretrained-hNN.ckpt")
    if horizon:
        p.add_argument("--horizon", type=int,
                       help="restrict to one horizon from the config")
    if seed:
        p.add_argument("--seed", type=int, help="override the run seed")
    if epochs:
        p.add_argument("--epochs", type=int, help="override the epoch count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoda",
        description="Supervised domain adaptation for building thermal "
                    "time-series forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic building csvs")
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--domain", choices=["source", "target"],
                   help="generate only this domain (default: both)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pretrain", help="train source models, one per horizon")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("adapt", help="fine-tune a pretrained model on the target")
    _add_common(p, checkpoint=True)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("scratch", help="train on the target from scratch")
    _add_common(p)
    p.set_defaults(func=cmd_scratch)

    p = sub.add_parser("evaluate",
                       help="score a checkpoint and write its report file")
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--checkpoint", required=True, help="checkpoint file")
    p.add_argument("--domain", default="target", choices=["source", "target"])
    p.add_argument("--split", default="test", choices=["train", "test"])
    p.add_argument("--out", help="directory for the report file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="full adaptation-versus-scratch study")
    _add_common(p, seed=True, epochs=True, horizon=True)
    p.add_argument("--workers", type=int,
                   help="parallel worker processes (default: cpu count)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IngestError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ThermodaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
