"""Shared helpers for the test suite."""
import numpy as np

from thermoda.model import Seq2SeqParams, backward


def fd_gradient_errors(params, x, y, y0, forcing, eps=1e-5):
    """Central finite differences over every parameter coordinate.

    Returns (max_abs_error, max_excess) where excess is the error divided by
    its tolerance max(1e-7, 1e-4 * |fd|); excess <= 1 everywhere means the
    analytic gradient passes.
    """
    _, grads = backward(params, x, y, y0, forcing)
    analytic = grads.flatten()
    flat = params.view().flatten()
    worst_abs = 0.0
    worst_excess = 0.0
    for j in range(flat.size):
        bumped = flat.copy()
        bumped[j] += eps
        hi, _ = backward(Seq2SeqParams.from_flat(params.shape, bumped),
                         x, y, y0, forcing)
        bumped[j] -= 2.0 * eps
        lo, _ = backward(Seq2SeqParams.from_flat(params.shape, bumped),
                         x, y, y0, forcing)
        fd = (hi - lo) / (2.0 * eps)
        err = abs(float(analytic[j]) - fd)
        tol = max(1e-7, 1e-4 * abs(fd))
        worst_abs = max(worst_abs, err)
        worst_excess = max(worst_excess, err / tol)
    return worst_abs, worst_excess
