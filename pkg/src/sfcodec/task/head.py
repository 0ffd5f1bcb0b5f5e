"""Small detection head consuming both views' reconstructed features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from .. import nn
from ..codec.config import CodecConfig
from ..codec.types import FeaturePyramid
from ..errors import ConfigError
from .scenes import SceneConfig


@dataclass
class TaskPrediction:
    occupancy: ad.Tensor       # (N,1,Hg,Wg) logits
    box_offsets: ad.Tensor     # (N,4,Hg,Wg)
    disparity: ad.Tensor       # (N,B,Hg,Wg) logits over disparity bins


class TaskHead(nn.Module):
    """Left/right features are channel-concatenated per level, reduced to the
    task grid, fused, and read out by 1x1 heads."""

    def __init__(
        self,
        codec_cfg: CodecConfig,
        scene_cfg: SceneConfig,
        rng: np.random.Generator,
        width: int = 32,
    ):
        g = scene_cfg.grid_stride
        self.width = width
        reducers = []
        for level, stride in enumerate(codec_cfg.pyramid_strides):
            if g % stride or (g // stride) & (g // stride - 1):
                raise ConfigError(
                    f"grid stride {g} must be a power-of-two multiple of "
                    f"pyramid stride {stride}"
                )
            steps = (g // stride).bit_length() - 1
            cin = 2 * codec_cfg.feature_channels[level]
            chain = []
            if steps == 0:
                chain.append(nn.Conv2d(cin, width, 3, stride=1, padding=1, rng=rng))
            else:
                for i in range(steps):
                    chain.append(nn.Conv2d(cin, width, 3, stride=2, padding=1, rng=rng))
                    cin = width
            reducers.append(nn.ModuleList(chain))
        self.reducers = nn.ModuleList(reducers)
        self.trunk = nn.Conv2d(3 * width, width, 3, padding=1, rng=rng)
        self.occ_head = nn.Conv2d(width, 1, 1, rng=rng)
        self.box_head = nn.Conv2d(width, 4, 1, rng=rng)
        self.disp_head = nn.Conv2d(width, scene_cfg.disparity_bins, 1, rng=rng)

    def forward(self, pyr: FeaturePyramid) -> TaskPrediction:
        reduced = []
        for level, chain in enumerate(self.reducers):
            x = ad.channel_concat(pyr.left[level], pyr.right[level])
            for conv in chain:
                x = nn.lrelu(conv(x))
            reduced.append(x)
        h = ad.channel_concat(ad.channel_concat(reduced[0], reduced[1]), reduced[2])
        h = nn.lrelu(self.trunk(h))
        return TaskPrediction(
            occupancy=self.occ_head(h),
            box_offsets=self.box_head(h),
            disparity=self.disp_head(h),
        )

    __call__ = forward
