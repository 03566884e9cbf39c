"""Dense float64 numerics underneath the model, optimizer, and checkpoints.

Everything runs in 64-bit precision on plain numpy arrays so that
finite-difference gradient checks stay tight and identical inputs give
bit-identical outputs. There is no autodiff here; gradients are derived by
hand in the model module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with explicit shape checking."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def sigmoid(x):
    """Logistic function, overflow-safe. Scalar in, scalar out; arrays elementwise.

    Saturates to exactly 0.0 / 1.0 for |x| beyond roughly 37 (the closest
    representable float64 values), never overflows or produces NaN.
    """
    arr = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(arr))
    out = np.where(arr >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    if out.ndim == 0:
        return float(out)
    return out


def tanh(x):
    """Hyperbolic tangent. Scalar in, scalar out; arrays elementwise."""
    out = np.tanh(np.asarray(x, dtype=np.float64))
    if out.ndim == 0:
        return float(out)
    return out


def uniform_fan_in(rng: np.random.Generator, rows: int, cols: int, fan_in: int) -> np.ndarray:
    """Weight block drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
    if fan_in < 1:
        raise DimensionError(f"fan_in must be >= 1, got {fan_in}")
    bound = 1.0 / np.sqrt(float(fan_in))
    return rng.uniform(-bound, bound, size=(rows, cols))


@dataclass
class ParamVector:
    """Ordered, named collection of parameter (or gradient) blocks.

    The block order is fixed at construction and identical across runs for a
    given model shape, which makes the flattened vector a stable interface
    for the optimizer and the checkpoint format.
    """

    names: list
    blocks: list

    def __post_init__(self):
        if len(self.names) != len(self.blocks):
            raise DimensionError("names and blocks must pair up one-to-one")

    @property
    def total_len(self) -> int:
        return sum(b.size for b in self.blocks)

    def flatten(self) -> np.ndarray:
        """Concatenate all blocks, row-major, into one float64 vector."""
        return np.concatenate([np.ravel(b) for b in self.blocks])

    def unflatten(self, flat: np.ndarray) -> "ParamVector":
        """New ParamVector with this one's names/shapes and values taken from `flat`."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.ndim != 1 or flat.size != self.total_len:
            raise DimensionError(
                f"flat vector of length {flat.size} does not match total_len {self.total_len}"
            )
        blocks = []
        pos = 0
        for b in self.blocks:
            blocks.append(flat[pos:pos + b.size].reshape(b.shape).copy())
            pos += b.size
        return ParamVector(list(self.names), blocks)

    def zeros_like(self) -> "ParamVector":
        return ParamVector(list(self.names), [np.zeros_like(b) for b in self.blocks])

    def copy(self) -> "ParamVector":
        return ParamVector(list(self.names), [b.copy() for b in self.blocks])

    def check_finite(self) -> None:
        """Raise NumericError naming the first block holding a NaN or Inf."""
        for name, block in zip(self.names, self.blocks):
            if not np.all(np.isfinite(block)):
                raise NumericError(f"non-finite values in parameter block '{name}'")
