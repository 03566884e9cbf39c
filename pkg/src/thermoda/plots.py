"""Report figures. Everything renders through the Agg backend straight to
files; nothing here opens a window."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ADAPT_COLOR = "#1f77b4"
SCRATCH_COLOR = "#d62728"


def rmse_vs_horizon(summaries, path) -> str:
    """Median test RMSE of both methods against forecast horizon."""
    targets = list(dict.fromkeys(s.target for s in summaries))
    fig, axes = plt.subplots(1, len(targets), figsize=(5.5 * len(targets), 4.0),
                             squeeze=False)
    for ax, target in zip(axes[0], targets):
        rows = sorted((s for s in summaries if s.target == target),
                      key=lambda s: s.horizon)
        h = [s.horizon for s in rows]
        ax.plot(h, [s.adapt_rmse for s in rows], "o-", color=ADAPT_COLOR,
                label="adapted")
        ax.plot(h, [s.scratch_rmse for s in rows], "s--", color=SCRATCH_COLOR,
                label="from scratch")
        ax.set_xlabel("horizon (steps)")
        ax.set_ylabel("median test RMSE")
        ax.set_title(target)
        ax.set_xticks(h)
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def loss_curves(curves, path, title="training loss") -> str:
    """Loss per epoch, one line per horizon; curves: {horizon: [loss, ...]}."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for horizon, losses in sorted(curves.items()):
        ax.plot(np.arange(1, len(losses) + 1), losses,
                label=f"horizon {horizon}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def improvement_bars(summaries, path) -> str:
    """Relative RMSE improvement of adaptation over scratch, per horizon."""
    targets = list(dict.fromkeys(s.target for s in summaries))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    width = 0.8 / len(targets)
    horizons = sorted(set(s.horizon for s in summaries))
    base = np.arange(len(horizons), dtype=np.float64)
    for k, target in enumerate(targets):
        rows = {s.horizon: s for s in summaries if s.target == target}
        vals = [rows[h].improvement_pct for h in horizons]
        offset = (k - (len(targets) - 1) / 2.0) * width
        ax.bar(base + offset, vals, width=width * 0.9,
               label=target if len(targets) > 1 else None,
               color=ADAPT_COLOR)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(base)
    ax.set_xticklabels([str(h) for h in horizons])
    ax.set_xlabel("horizon (steps)")
    ax.set_ylabel("RMSE improvement over scratch (%)")
    ax.grid(alpha=0.3, axis="y")
    if len(targets) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def prediction_overlay(timeline_true, timeline_pred, target_name, path,
                       title="") -> str:
    """Truth versus model output over a contiguous stretch of test steps."""
    fig, ax = plt.subplots(figsize=(9.0, 3.5))
    n = len(timeline_true)
    ax.plot(np.arange(n), timeline_true, color="black", linewidth=1.0,
            label="observed")
    ax.plot(np.arange(n), timeline_pred, color=ADAPT_COLOR, linewidth=1.0,
            label="predicted")
    ax.set_xlabel("test step")
    ax.set_ylabel(target_name)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
