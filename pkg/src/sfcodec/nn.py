"""Layer primitives built on the autodiff engine.

Weights use seeded He-style uniform fan-in init.  Modules register children
and parameters in attribute order, so parameter names are stable across runs
and across save/load.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from . import autodiff as ad
from .errors import ConfigError

LEAKY_SLOPE = 0.01


class Module:
    """Container tracking child modules and parameters in definition order."""

    def __setattr__(self, name, value):
        if isinstance(value, (Module, ad.Parameter)):
            registry = self.__dict__.setdefault("_children", {})
            registry[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, ad.Parameter]]:
        for name, child in self.__dict__.get("_children", {}).items():
            path = f"{prefix}.{name}" if prefix else name
            if isinstance(child, ad.Parameter):
                yield path, child
            else:
                yield from child.named_parameters(path)

    def parameters(self) -> list[ad.Parameter]:
        return [p for _, p in self.named_parameters()]

    def finalize_names(self, prefix: str = "") -> None:
        """Assign dotted-path names to every parameter; names must be unique."""
        seen = set()
        for name, p in self.named_parameters(prefix):
            if name in seen:
                raise ConfigError(f"duplicate parameter name {name!r}")
            seen.add(name)
            p.name = name

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def param_count(self) -> int:
        return sum(p.value.size for p in self.parameters())


class ModuleList(Module):
    def __init__(self, modules):
        for i, m in enumerate(modules):
            setattr(self, str(i), m)
        self._items = list(modules)

    def __iter__(self):
        return iter(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __len__(self):
        return len(self._items)


def _he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


class Conv2d(Module):
    def __init__(
        self,
        cin: int,
        cout: int,
        k: int,
        stride: int = 1,
        padding: int = 0,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.stride = stride
        self.padding = padding
        self.weight = ad.Parameter(_he_uniform(rng, (cout, cin, k, k), cin * k * k))
        self.bias = ad.Parameter(np.zeros(cout, dtype=np.float32))

    def forward(self, x: ad.Tensor) -> ad.Tensor:
        return ad.conv2d(x, self.weight.value, self.bias.value, self.stride, self.padding)

    __call__ = forward


class ConvTranspose2d(Module):
    def __init__(
        self,
        cin: int,
        cout: int,
        k: int,
        stride: int = 1,
        padding: int = 0,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        self.stride = stride
        self.padding = padding
        self.weight = ad.Parameter(_he_uniform(rng, (cin, cout, k, k), cin * k * k))
        self.bias = ad.Parameter(np.zeros(cout, dtype=np.float32))

    def forward(self, x: ad.Tensor) -> ad.Tensor:
        return ad.conv_transpose2d(
            x, self.weight.value, self.bias.value, self.stride, self.padding
        )

    __call__ = forward


def lrelu(x: ad.Tensor) -> ad.Tensor:
    return ad.leaky_relu(x, LEAKY_SLOPE)
