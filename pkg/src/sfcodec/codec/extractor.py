"""Toy multi-scale feature extractor.

A chain of stride-2 conv blocks shared between views, tapping a feature map
at each configured pyramid stride.  Stands in for a deep backbone while
keeping the multi-scale stereo interface.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from .. import nn
from ..errors import ConfigError
from .config import CodecConfig
from .types import FeaturePyramid, StereoPair


class FeatureExtractor(nn.Module):
    def __init__(self, config: CodecConfig, rng: np.random.Generator):
        self.config = config
        convs = []
        taps = []  # conv index after which each pyramid level is emitted
        prev_ch = 3
        stride = 1
        stem_ch = max(8, config.feature_channels[0] // 2)
        level = 0
        while level < 3:
            target_stride = config.pyramid_strides[level]
            while stride < target_stride:
                out_ch = (
                    config.feature_channels[level]
                    if stride * 2 == target_stride
                    else (stem_ch if level == 0 else config.feature_channels[level])
                )
                convs.append(nn.Conv2d(prev_ch, out_ch, 3, stride=2, padding=1, rng=rng))
                prev_ch = out_ch
                stride *= 2
            taps.append(len(convs) - 1)
            level += 1
        self.convs = nn.ModuleList(convs)
        self._taps = taps

    def forward(self, left: ad.Tensor, right: ad.Tensor) -> FeaturePyramid:
        """Run both views through the shared conv chain (batched together)."""
        h, w = left.shape[2], left.shape[3]
        div = self.config.divisor
        if h % div or w % div:
            raise ConfigError(
                f"input dims {h}x{w} must be divisible by {div} "
                f"(pyramid strides {self.config.pyramid_strides}, "
                f"stage factor {self.config.stage_factor})"
            )
        outs = {"left": [], "right": []}
        for key, x in (("left", left), ("right", right)):
            for i, conv in enumerate(self.convs):
                x = nn.lrelu(conv(x))
                if i in self._taps:
                    outs[key].append(x)
        return FeaturePyramid(left=tuple(outs["left"]), right=tuple(outs["right"]))

    __call__ = forward

    def extract(self, pair: StereoPair) -> FeaturePyramid:
        return self.forward(pair.left, pair.right)
