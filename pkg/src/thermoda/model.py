"""LSTM encoder-decoder regressor with hand-derived backpropagation through time.

A single-layer LSTM encoder folds a K-step window of d input features into
its final (hidden, cell) state. That state initializes a single-layer LSTM
decoder which starts from the last observed target value and emits an L-step
prediction; a linear head maps every decoder hidden state to a p-vector.
In the default (non-teacher-forced) mode each prediction is fed back as the
next decoder input, and the backward pass tracks the gradient through those
fed-back predictions.

Cell equations, with z = [input; h_prev]:

    i = sigmoid(W_i z + b_i)      input gate
    f = sigmoid(W_f z + b_f)      forget gate
    g = tanh   (W_g z + b_g)      candidate
    o = sigmoid(W_o z + b_o)      output gate
    c = f * c_prev + i * g
    h = o * tanh(c)

All functions are pure: identical parameters and inputs give bit-identical
results. Batched variants operate on a leading batch axis and reduce with a
fixed summation order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .linalg import ParamVector, sigmoid, uniform_fan_in

GATES = ("i", "f", "g", "o")


class ForcingMode(enum.Enum):
    """Decoder input regime during training."""

    NON_TEACHER = "non_teacher"   # feed back the model's own previous prediction
    TEACHER = "teacher"           # feed the ground-truth previous target

    @classmethod
    def parse(cls, value) -> "ForcingMode":
        if isinstance(value, cls):
            return value
        for mode in cls:
            if mode.value == value:
                return mode
        raise ConfigError(f"unknown forcing mode {value!r}; use 'non_teacher' or 'teacher'")


@dataclass(frozen=True)
class ModelShape:
    """Dimensions of one encoder-decoder model.

    num_features: input variables per step (d)
    num_targets:  predicted variables per step (p)
    hidden_units: LSTM units in the single encoder/decoder layer (c)
    input_steps:  encoder window length (K)
    horizon_steps: decoder prediction length (L)
    """

    num_features: int
    num_targets: int
    hidden_units: int
    input_steps: int
    horizon_steps: int

    def __post_init__(self):
        for field in ("num_features", "num_targets", "hidden_units", "input_steps", "horizon_steps"):
            value = getattr(self, field)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"ModelShape.{field} must be a positive integer, got {value!r}")

    def to_dict(self) -> dict:
        return {
            "num_features": int(self.num_features),
            "num_targets": int(self.num_targets),
            "hidden_units": int(self.hidden_units),
            "input_steps": int(self.input_steps),
            "horizon_steps": int(self.horizon_steps),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelShape":
        return cls(**{k: int(d[k]) for k in (
            "num_features", "num_targets", "hidden_units", "input_steps", "horizon_steps")})


@dataclass
class CellState:
    """Hidden and cell vectors of one LSTM layer (batched: leading axis)."""

    h: np.ndarray
    c: np.ndarray


@dataclass
class LstmParams:
    """One LSTM cell: per-gate weights over [input; hidden] plus biases."""

    w_i: np.ndarray
    w_f: np.ndarray
    w_g: np.ndarray
    w_o: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_g: np.ndarray
    b_o: np.ndarray

    @property
    def input_width(self) -> int:
        return self.w_i.shape[1] - self.b_i.shape[0]

    def blocks(self, prefix: str):
        """(name, array) pairs in the fixed serialization order."""
        out = []
        for gate in GATES:
            out.append((f"{prefix}.w_{gate}", getattr(self, f"w_{gate}")))
            out.append((f"{prefix}.b_{gate}", getattr(self, f"b_{gate}")))
        return out

    def zeros_like(self) -> "LstmParams":
        return LstmParams(**{f"{kind}_{gate}": np.zeros_like(getattr(self, f"{kind}_{gate}"))
                             for kind in ("w", "b") for gate in GATES})


@dataclass
class Seq2SeqParams:
    """All learnable parameters of one model, in a fixed checkpointable order."""

    shape: ModelShape
    encoder: LstmParams
    decoder: LstmParams
    w_out: np.ndarray   # (num_targets, hidden_units)
    b_out: np.ndarray   # (num_targets,)

    def view(self) -> ParamVector:
        names, blocks = [], []
        for name, block in self.encoder.blocks("enc") + self.decoder.blocks("dec"):
            names.append(name)
            blocks.append(block)
        names += ["head.w", "head.b"]
        blocks += [self.w_out, self.b_out]
        return ParamVector(names, blocks)

    def copy(self) -> "Seq2SeqParams":
        view = self.view()
        return Seq2SeqParams.from_flat(self.shape, view.flatten())

    @classmethod
    def zeros(cls, shape: ModelShape) -> "Seq2SeqParams":
        c, d, p = shape.hidden_units, shape.num_features, shape.num_targets
        enc = _zero_cell(d, c)
        dec = _zero_cell(p, c)
        return cls(shape, enc, dec, np.zeros((p, c)), np.zeros(p))

    @classmethod
    def from_flat(cls, shape: ModelShape, flat: np.ndarray) -> "Seq2SeqParams":
        template = cls.zeros(shape)
        view = template.view().unflatten(flat)
        blocks = dict(zip(view.names, view.blocks))
        enc = LstmParams(**{f"{kind}_{g}": blocks[f"enc.{kind}_{g}"] for kind in ("w", "b") for g in GATES})
        dec = LstmParams(**{f"{kind}_{g}": blocks[f"dec.{kind}_{g}"] for kind in ("w", "b") for g in GATES})
        return cls(shape, enc, dec, blocks["head.w"], blocks["head.b"])


def _zero_cell(input_width: int, hidden: int) -> LstmParams:
    kw = {}
    for gate in GATES:
        kw[f"w_{gate}"] = np.zeros((hidden, input_width + hidden))
        kw[f"b_{gate}"] = np.zeros(hidden)
    return LstmParams(**kw)


def _init_cell(rng: np.random.Generator, input_width: int, hidden: int) -> LstmParams:
    """Uniform fan-in weights; zero biases except the forget gate at 1.0."""
    fan_in = input_width + hidden
    kw = {}
    for gate in GATES:
        kw[f"w_{gate}"] = uniform_fan_in(rng, hidden, fan_in, fan_in)
        kw[f"b_{gate}"] = np.ones(hidden) if gate == "f" else np.zeros(hidden)
    return LstmParams(**kw)


def init_params(shape: ModelShape, seed: int) -> Seq2SeqParams:
    """Seeded deterministic initialization; same (shape, seed) gives identical bits.

    Weights are uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)] with fan_in the
    width of the matrix input; all biases are zero except the LSTM forget-gate
    biases, which start at 1.0 to keep early cell states from washing out.
    """
    rng = np.random.default_rng(seed)
    enc = _init_cell(rng, shape.num_features, shape.hidden_units)
    dec = _init_cell(rng, shape.num_targets, shape.hidden_units)
    w_out = uniform_fan_in(rng, shape.num_targets, shape.hidden_units, shape.hidden_units)
    b_out = np.zeros(shape.num_targets)
    return Seq2SeqParams(shape, enc, dec, w_out, b_out)


# --------------------------------------------------------------------------
# forward
# --------------------------------------------------------------------------

def _cell_forward(cell: LstmParams, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    """One batched cell step: x (B, in), h/c (B, hidden) -> (h', c', cache)."""
    z = np.concatenate([x, h], axis=1)
    i = sigmoid(z @ cell.w_i.T + cell.b_i)
    f = sigmoid(z @ cell.w_f.T + cell.b_f)
    g = np.tanh(z @ cell.w_g.T + cell.b_g)
    o = sigmoid(z @ cell.w_o.T + cell.b_o)
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    return h_new, c_new, (z, i, f, g, o, c, tc)


def lstm_cell_step(cell: LstmParams, x: np.ndarray, prev: CellState) -> CellState:
    """Single-sample cell update; raises DimensionError on a width mismatch."""
    x = np.asarray(x, dtype=np.float64)
    hidden = cell.b_i.shape[0]
    expected = cell.w_i.shape[1] - hidden
    if x.shape != (expected,):
        raise DimensionError(f"cell input must have shape ({expected},), got {x.shape}")
    if prev.h.shape != (hidden,) or prev.c.shape != (hidden,):
        raise DimensionError(f"cell state must have shape ({hidden},)")
    h, c, _ = _cell_forward(cell, x[None, :], prev.h[None, :], prev.c[None, :])
    return CellState(h[0], c[0])


def encode(params: Seq2SeqParams, window: np.ndarray) -> CellState:
    """Fold the encoder over a (K, d) window from a zero initial state."""
    window = np.asarray(window, dtype=np.float64)
    shape = params.shape
    if window.shape != (shape.input_steps, shape.num_features):
        raise DimensionError(
            f"input window must have shape ({shape.input_steps}, {shape.num_features}), "
            f"got {window.shape}")
    state = CellState(np.zeros(shape.hidden_units), np.zeros(shape.hidden_units))
    for k in range(shape.input_steps):
        state = lstm_cell_step(params.encoder, window[k], state)
    return state


def decode(params: Seq2SeqParams, init: CellState, y0: np.ndarray,
           horizon: int | None = None,
           forcing: ForcingMode = ForcingMode.NON_TEACHER,
           truth: np.ndarray | None = None) -> np.ndarray:
    """Emit an (L, p) prediction from the encoder state, starting at y0.

    Step 1 consumes y0; step l consumes the previous prediction
    (NON_TEACHER) or the previous ground-truth row of `truth` (TEACHER).
    """
    shape = params.shape
    L = shape.horizon_steps if horizon is None else int(horizon)
    y0 = np.asarray(y0, dtype=np.float64)
    if y0.shape != (shape.num_targets,):
        raise DimensionError(f"y0 must have shape ({shape.num_targets},), got {y0.shape}")
    truth_b = None
    if forcing is ForcingMode.TEACHER:
        if truth is None:
            raise ConfigError("teacher forcing requires the ground-truth horizon")
        truth = np.asarray(truth, dtype=np.float64)
        if truth.shape != (L, shape.num_targets):
            raise DimensionError(
                f"truth must have shape ({L}, {shape.num_targets}), got {truth.shape}")
        truth_b = truth[None, :, :]
    preds, _ = _decode_batch(params, init.h[None, :], init.c[None, :],
                             y0[None, :], L, forcing, truth_b)
    return preds[0]


def forward(params: Seq2SeqParams, window: np.ndarray, y0: np.ndarray,
            forcing: ForcingMode = ForcingMode.NON_TEACHER,
            truth: np.ndarray | None = None) -> np.ndarray:
    """encode + decode for a single sample; returns an (L, p) array."""
    return decode(params, encode(params, window), y0,
                  params.shape.horizon_steps, forcing, truth)


def _decode_batch(params, h, c, y0, L, forcing, truth):
    """Run the decoder for a batch; returns (predictions (B, L, p), context)."""
    dec_caches, dec_h, inputs, preds = [], [], [], []
    u = y0
    for step in range(L):
        inputs.append(u)
        h, c, cache = _cell_forward(params.decoder, u, h, c)
        dec_caches.append(cache)
        dec_h.append(h)
        yhat = h @ params.w_out.T + params.b_out
        preds.append(yhat)
        if step + 1 < L:
            u = truth[:, step, :] if forcing is ForcingMode.TEACHER else yhat
    ctx = {"dec_caches": dec_caches, "dec_h": dec_h, "inputs": inputs}
    return np.stack(preds, axis=1), ctx


def _run_batch(params: Seq2SeqParams, X: np.ndarray, Y0: np.ndarray,
               L: int, forcing: ForcingMode, truth: np.ndarray | None):
    shape = params.shape
    X = np.asarray(X, dtype=np.float64)
    Y0 = np.asarray(Y0, dtype=np.float64)
    if X.ndim != 3 or X.shape[1:] != (shape.input_steps, shape.num_features):
        raise DimensionError(
            f"batch input must have shape (B, {shape.input_steps}, {shape.num_features}), "
            f"got {X.shape}")
    B = X.shape[0]
    if Y0.shape != (B, shape.num_targets):
        raise DimensionError(f"batch y0 must have shape ({B}, {shape.num_targets}), got {Y0.shape}")
    if forcing is ForcingMode.TEACHER:
        if truth is None:
            raise ConfigError("teacher forcing requires the ground-truth horizon")
        if truth.shape != (B, L, shape.num_targets):
            raise DimensionError(
                f"batch truth must have shape ({B}, {L}, {shape.num_targets}), got {truth.shape}")

    hidden = shape.hidden_units
    h = np.zeros((B, hidden))
    c = np.zeros((B, hidden))
    enc_caches = []
    for k in range(shape.input_steps):
        h, c, cache = _cell_forward(params.encoder, X[:, k, :], h, c)
        enc_caches.append(cache)
    preds, ctx = _decode_batch(params, h, c, Y0, L, forcing, truth)
    ctx["enc_caches"] = enc_caches
    return preds, ctx


def forward_batch(params: Seq2SeqParams, X: np.ndarray, Y0: np.ndarray,
                  forcing: ForcingMode = ForcingMode.NON_TEACHER,
                  truth: np.ndarray | None = None) -> np.ndarray:
    """Batched forward pass: X (B, K, d), Y0 (B, p) -> predictions (B, L, p)."""
    preds, _ = _run_batch(params, X, Y0, params.shape.horizon_steps, forcing,
                          None if truth is None else np.asarray(truth, dtype=np.float64))
    return preds


# --------------------------------------------------------------------------
# backward
# --------------------------------------------------------------------------

def _cell_backward(cell: LstmParams, cache, dh, dc, grads: LstmParams):
    """Backward through one cell step.

    dh, dc are the loss gradients w.r.t. this step's outputs (B, hidden).
    Accumulates parameter gradients into `grads` and returns
    (d_input, dh_prev, dc_prev).
    """
    z, i, f, g, o, c_prev, tc = cache
    do = dh * tc
    dct = dc + dh * o * (1.0 - tc * tc)
    di = dct * g
    df = dct * c_prev
    dg = dct * i
    dc_prev = dct * f
    a_i = di * i * (1.0 - i)
    a_f = df * f * (1.0 - f)
    a_g = dg * (1.0 - g * g)
    a_o = do * o * (1.0 - o)
    grads.w_i += a_i.T @ z
    grads.w_f += a_f.T @ z
    grads.w_g += a_g.T @ z
    grads.w_o += a_o.T @ z
    grads.b_i += a_i.sum(axis=0)
    grads.b_f += a_f.sum(axis=0)
    grads.b_g += a_g.sum(axis=0)
    grads.b_o += a_o.sum(axis=0)
    dz = a_i @ cell.w_i + a_f @ cell.w_f + a_g @ cell.w_g + a_o @ cell.w_o
    in_width = z.shape[1] - dh.shape[1]
    return dz[:, :in_width], dz[:, in_width:], dc_prev


def loss_and_grad(params: Seq2SeqParams, X: np.ndarray, Y: np.ndarray, Y0: np.ndarray,
                  forcing: ForcingMode = ForcingMode.NON_TEACHER):
    """Mean-over-batch loss and its exact parameter gradients.

    loss = (1/B) sum_b (1/L) sum_l |y_bl - yhat_bl|^2

    Under NON_TEACHER the gradient flows through every fed-back prediction
    (the input of step l+1 is the output of step l); under TEACHER those
    inputs are constants. Returns (loss, ParamVector) with gradient blocks
    aligned one-for-one with ``params.view()``.
    """
    shape = params.shape
    Y = np.asarray(Y, dtype=np.float64)
    L = shape.horizon_steps
    if Y.ndim != 3 or Y.shape[1:] != (L, shape.num_targets):
        raise DimensionError(
            f"batch targets must have shape (B, {L}, {shape.num_targets}), got {Y.shape}")
    preds, ctx = _run_batch(params, X, Y0, L, forcing, Y)
    B = preds.shape[0]
    resid = preds - Y
    loss = float(np.sum(resid * resid) / (B * L))

    dY = (2.0 / (B * L)) * resid
    enc_grads = params.encoder.zeros_like()
    dec_grads = params.decoder.zeros_like()
    dw_out = np.zeros_like(params.w_out)
    db_out = np.zeros_like(params.b_out)

    dec_caches, dec_h = ctx["dec_caches"], ctx["dec_h"]
    dh_rec = np.zeros((B, shape.hidden_units))
    dc_rec = np.zeros((B, shape.hidden_units))
    du_next = None
    for step in reversed(range(L)):
        dyhat = dY[:, step, :]
        if forcing is ForcingMode.NON_TEACHER and du_next is not None:
            dyhat = dyhat + du_next
        dw_out += dyhat.T @ dec_h[step]
        db_out += dyhat.sum(axis=0)
        dh_total = dh_rec + dyhat @ params.w_out
        du_next, dh_rec, dc_rec = _cell_backward(
            params.decoder, dec_caches[step], dh_total, dc_rec, dec_grads)
    # du_next now holds the gradient w.r.t. y0, which is data, not a parameter.

    for k in reversed(range(shape.input_steps)):
        _, dh_rec, dc_rec = _cell_backward(
            params.encoder, ctx["enc_caches"][k], dh_rec, dc_rec, enc_grads)

    grads = Seq2SeqParams(shape, enc_grads, dec_grads, dw_out, db_out).view()
    grads.check_finite()
    return loss, grads


def backward(params: Seq2SeqParams, x: np.ndarray, y: np.ndarray, y0: np.ndarray,
             forcing: ForcingMode = ForcingMode.NON_TEACHER):
    """Single-sample loss and gradients: x (K, d), y (L, p), y0 (p,)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    return loss_and_grad(params, x[None], y[None], y0[None], forcing)
