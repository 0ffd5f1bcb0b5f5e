"""Latent quantization: additive-noise proxy for training, rounding at inference."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..errors import ConfigError


def quantize(latent: ad.Tensor, mode: str, rng: np.random.Generator | None = None) -> ad.Tensor:
    """``round``: nearest integer (ties to even), straight-through gradient.

    ``train-noise``: latent + u with u ~ U[-0.5, 0.5) per element, drawn from
    the supplied generator.
    """
    if mode == "round":
        return ad.round_ste(latent)
    if mode == "train-noise":
        if rng is None:
            raise ConfigError("train-noise quantization needs a seeded generator")
        noise = rng.random(latent.shape, dtype=np.float64) - 0.5
        return ad.add(latent, ad.Tensor(noise.astype(latent.dtype.type)))
    raise ConfigError(f"unknown quantization mode {mode!r}")
