"""Mini-batch Adam training of the encoder-decoder regressor.

The optimizer works on the flat parameter vector exposed by
``Seq2SeqParams.view()``; the training loop reshuffles batch order every
epoch with a seeded generator and keeps the last partial batch, so a run is
a pure function of (initial parameters, dataset, config).
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericError
from .model import ForcingMode, Seq2SeqParams, loss_and_grad


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule hyperparameters for one training run."""

    epochs: int
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    seed: int = 0
    forcing: ForcingMode = ForcingMode.NON_TEACHER
    clip_norm: float | None = None
    freeze: tuple = ()

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0.0 < self.beta1 < 1.0) or not (0.0 < self.beta2 < 1.0):
            raise ConfigError(f"betas must be in (0, 1), got ({self.beta1}, {self.beta2})")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ConfigError("clip_norm must be > 0 when set")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs, "learning_rate": self.learning_rate,
            "beta1": self.beta1, "beta2": self.beta2, "epsilon": self.epsilon,
            "batch_size": self.batch_size, "seed": self.seed,
            "forcing": self.forcing.value, "clip_norm": self.clip_norm,
            "freeze": list(self.freeze),
        }

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class AdamState:
    """First/second moment accumulators aligned with the flat parameter vector."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


@dataclass
class TrainTrace:
    """Per-epoch mean training loss, wall-clock seconds, and final parameters."""

    epoch_losses: list
    epoch_seconds: list
    params: Seq2SeqParams
    config: TrainConfig | None = None


def adam_step(flat: np.ndarray, grads: np.ndarray, state: AdamState, cfg: TrainConfig):
    """One Adam update on the flat vector; returns (new flat, new state).

    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
    theta <- theta - lr * mhat / (sqrt(vhat) + eps)   with bias-corrected moments.
    """
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != flat.shape:
        raise ConfigError(f"gradient shape {grads.shape} does not match params {flat.shape}")
    if not np.all(np.isfinite(grads)):
        raise NumericError("non-finite gradient passed to adam_step")
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grads * grads)
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    new_flat = flat - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new_flat, AdamState(m, v, t)


def stack_pairs(pairs):
    """SequencePairs -> (X (n,K,d), Y (n,L,p), Y0 (n,p)) float64 arrays."""
    if not pairs:
        raise ConfigError("cannot stack an empty list of sequence pairs")
    X = np.stack([p.x for p in pairs]).astype(np.float64)
    Y = np.stack([p.y for p in pairs]).astype(np.float64)
    Y0 = np.stack([p.y0 for p in pairs]).astype(np.float64)
    return X, Y, Y0


def batch_loss_grad(params: Seq2SeqParams, batch,
                    forcing: ForcingMode = ForcingMode.NON_TEACHER):
    """Mean loss and mean gradients over a non-empty batch of SequencePairs."""
    X, Y, Y0 = stack_pairs(list(batch))
    return loss_and_grad(params, X, Y, Y0, forcing)


def _freeze_mask(params: Seq2SeqParams, freeze) -> np.ndarray | None:
    """1.0/0.0 mask over the flat vector; 0 where a block name matches a prefix."""
    if not freeze:
        return None
    view = params.view()
    parts = []
    for name, block in zip(view.names, view.blocks):
        frozen = any(name.startswith(pref) for pref in freeze)
        parts.append(np.full(block.size, 0.0 if frozen else 1.0))
    return np.concatenate(parts)


def train(params: Seq2SeqParams, pairs, cfg: TrainConfig) -> TrainTrace:
    """Run the full Adam schedule over the dataset; never mutates `params`.

    Batch order is reshuffled every epoch with a generator seeded by
    cfg.seed; the last partial batch is kept. Aborts with NumericError if
    the loss stops being finite. `pairs` is either a sequence of
    SequencePair or an already-stacked (X, Y, Y0) tuple.
    """
    if isinstance(pairs, tuple) and len(pairs) == 3:
        X, Y, Y0 = (np.asarray(a, dtype=np.float64) for a in pairs)
        if X.shape[0] == 0:
            raise ConfigError("training dataset is empty")
    else:
        if not pairs:
            raise ConfigError("training dataset is empty")
        X, Y, Y0 = stack_pairs(list(pairs))
    n = X.shape[0]
    shape = params.shape
    flat = params.view().flatten()
    state = AdamState.zeros(flat.size)
    mask = _freeze_mask(params, cfg.freeze)
    rng = np.random.default_rng(cfg.seed)

    epoch_losses, epoch_seconds = [], []
    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            current = Seq2SeqParams.from_flat(shape, flat)
            loss, grads = loss_and_grad(current, X[idx], Y[idx], Y0[idx], cfg.forcing)
            if not np.isfinite(loss):
                raise NumericError(
                    f"training diverged: non-finite loss at epoch {epoch + 1}, "
                    f"batch starting at sample {start}")
            g = grads.flatten()
            if mask is not None:
                g = g * mask
            if cfg.clip_norm is not None:
                norm = float(np.linalg.norm(g))
                if norm > cfg.clip_norm:
                    g = g * (cfg.clip_norm / norm)
            flat, state = adam_step(flat, g, state, cfg)
            loss_sum += loss * idx.size
        epoch_losses.append(loss_sum / n)
        epoch_seconds.append(time.perf_counter() - started)

    final = Seq2SeqParams.from_flat(shape, flat)
    return TrainTrace(epoch_losses, epoch_seconds, final, cfg)
