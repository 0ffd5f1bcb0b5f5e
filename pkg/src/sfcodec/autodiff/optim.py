"""Adam optimizer over :class:`Parameter` sets."""

from __future__ import annotations

import numpy as np

from ..errors import StateError
from .tensor import Parameter


class Adam:
    """Standard Adam with bias correction; gradients are zeroed after each step."""

    def __init__(
        self,
        params: list[Parameter],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.state: dict[int, tuple[np.ndarray, np.ndarray]] = {
            id(p): (np.zeros_like(p.value.data), np.zeros_like(p.value.data))
            for p in self.params
        }

    def step(self, lr: float | None = None) -> None:
        lr = self.lr if lr is None else float(lr)
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for p in self.params:
            st = self.state.get(id(p))
            if st is None:
                raise StateError(f"no optimizer state for parameter {p.name!r}")
            m, v = st
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.value.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.zero_grad()

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


def cosine_lr(step: int, total_steps: int, base_lr: float, final_lr: float) -> float:
    """Cosine annealing from base_lr (step 0) to final_lr (step total_steps-1)."""
    if total_steps <= 1:
        return final_lr
    u = min(max(step / (total_steps - 1), 0.0), 1.0)
    return final_lr + 0.5 * (base_lr - final_lr) * (1.0 + np.cos(np.pi * u))
