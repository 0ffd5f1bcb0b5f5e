"""Value types flowing through the codec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..errors import ShapeError


@dataclass
class StereoPair:
    """A rectified stereo pair, values in [0, 1], layout (N,3,H,W)."""

    left: ad.Tensor
    right: ad.Tensor

    def __post_init__(self):
        if self.left.shape != self.right.shape:
            raise ShapeError(
                f"stereo views differ in shape: {self.left.shape} vs {self.right.shape}"
            )
        if self.left.data.ndim != 4 or self.left.shape[1] != 3:
            raise ShapeError(f"expected (N,3,H,W) views, got {self.left.shape}")

    @property
    def height(self) -> int:
        return self.left.shape[2]

    @property
    def width(self) -> int:
        return self.left.shape[3]


@dataclass
class FeaturePyramid:
    """Per-view multi-scale features, finest to coarsest."""

    left: tuple[ad.Tensor, ad.Tensor, ad.Tensor]
    right: tuple[ad.Tensor, ad.Tensor, ad.Tensor]

    def __post_init__(self):
        for fl, fr in zip(self.left, self.right):
            if fl.shape != fr.shape:
                raise ShapeError(
                    f"pyramid views differ in shape: {fl.shape} vs {fr.shape}"
                )

    def shapes(self) -> list[tuple[int, ...]]:
        return [t.shape for t in self.left]


@dataclass
class LatentSet:
    """Quantized per-view bottleneck latents plus the producing config id."""

    left: np.ndarray
    right: np.ndarray
    config_id: str

    def __post_init__(self):
        self.left = np.asarray(self.left, dtype=np.int32)
        self.right = np.asarray(self.right, dtype=np.int32)
        if self.left.shape != self.right.shape:
            raise ShapeError(
                f"latent views differ in shape: {self.left.shape} vs {self.right.shape}"
            )
        if self.left.ndim != 3:
            raise ShapeError(f"latents must be (C,h,w), got {self.left.shape}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LatentSet)
            and self.config_id == other.config_id
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )
