"""Finite-difference gradient verification.

The oracle is independent of the tape: it perturbs raw float64 arrays under
``no_grad`` and compares central differences of a scalar contraction against
the gradients produced by ``backward``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward, no_grad


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    step: float = 1e-4,
    rng: np.random.Generator | None = None,
) -> float:
    """Return the max relative error between tape and finite-difference grads.

    ``fn(*inputs)`` may return any tensor; it is contracted with fixed random
    weights to form a scalar.  All inputs must be float64 leaves with
    ``requires_grad=True``.
    """
    for t in inputs:
        if t.dtype != np.float64:
            raise ValueError("gradcheck requires float64 inputs")
        if not t.requires_grad:
            raise ValueError("gradcheck inputs must have requires_grad=True")
        t.zero_grad()

    rng = rng or np.random.default_rng(0)
    out = fn(*inputs)
    weights = rng.standard_normal(out.shape)
    loss = (out * Tensor(weights, dtype=np.float64)).sum()
    backward(loss)
    analytic = [t.grad.copy() for t in inputs]

    def value() -> float:
        with no_grad():
            return float((fn(*inputs).data * weights).sum())

    max_rel = 0.0
    for t, grad in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = value()
            flat[i] = orig - step
            dn = value()
            flat[i] = orig
            fd = (up - dn) / (2.0 * step)
            rel = abs(gflat[i] - fd) / max(1.0, abs(fd), abs(gflat[i]))
            max_rel = max(max_rel, rel)
    return max_rel


def nudge_from_kinks(
    data: np.ndarray, kinks: Sequence[float], margin: float = 1e-2
) -> np.ndarray:
    """Push values away from non-differentiable points before an FD probe."""
    out = np.array(data, dtype=np.float64)
    for kink in kinks:
        close = np.abs(out - kink) < margin
        out[close] = kink + margin * np.where(out[close] >= kink, 1.0, -1.0) * 2.0
    return out
