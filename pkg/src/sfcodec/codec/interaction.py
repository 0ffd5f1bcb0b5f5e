"""Cross-view information exchange blocks.

The default block concatenates each view's feature with a 1x1-conv projection
of the other view and fuses with a 3x3 conv.  Both directions are computed
from the pre-update features, so the exchange is order-independent.  New
block kinds can be registered for experimentation.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import autodiff as ad
from .. import nn
from ..errors import ConfigError


class ConcatProjectExchange(nn.Module):
    def __init__(self, channels: int, rng: np.random.Generator):
        self.proj_from_right = nn.Conv2d(channels, channels, 1, rng=rng)
        self.proj_from_left = nn.Conv2d(channels, channels, 1, rng=rng)
        self.fuse_left = nn.Conv2d(2 * channels, channels, 3, padding=1, rng=rng)
        self.fuse_right = nn.Conv2d(2 * channels, channels, 3, padding=1, rng=rng)

    def forward(self, hl: ad.Tensor, hr: ad.Tensor) -> tuple[ad.Tensor, ad.Tensor]:
        ml = nn.lrelu(self.fuse_left(ad.channel_concat(hl, self.proj_from_right(hr))))
        mr = nn.lrelu(self.fuse_right(ad.channel_concat(hr, self.proj_from_left(hl))))
        return ml, mr

    __call__ = forward


_REGISTRY: dict[str, Callable[[int, np.random.Generator], nn.Module]] = {
    "concat-1x1": ConcatProjectExchange,
}


def register_interaction(name: str, factory: Callable) -> None:
    _REGISTRY[name] = factory


def make_interaction(kind: str, channels: int, rng: np.random.Generator) -> nn.Module:
    try:
        factory = _REGISTRY[kind]
    except KeyError:
        raise ConfigError(
            f"unknown cross-view interaction {kind!r}; known: {sorted(_REGISTRY)}"
        ) from None
    return factory(channels, rng)
