"""Stereo multi-scale transforms.

``JointTransformCodec`` folds the pyramid progressively: each encoder stage
downsamples, exchanges information across views, and absorbs the next feature
level by channel concatenation; the decoder mirrors the process, splitting
each stage's output into the next carried latent and one reconstructed level.

``SeparateTransformCodec`` is the ablation baseline: every level is reduced
to the bottleneck independently (no cross-view, no cross-scale mixing) and
the per-level latents are concatenated only for entropy coding.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from .. import nn
from ..errors import ConfigError, ShapeError, VersioningError
from .config import VARIANT_JOINT, VARIANT_SEPARATE, CodecConfig
from .interaction import make_interaction
from .types import FeaturePyramid, LatentSet


def _log2(n: int) -> int:
    return int(n).bit_length() - 1


class StereoEncoderUnit(nn.Module):
    """Downsampling convolutions + cross-view exchange, separate per-view weights."""

    def __init__(self, cin: int, cout: int, factor: int, interaction: str,
                 rng: np.random.Generator):
        downs_l, downs_r = [], []
        ch = cin
        for _ in range(_log2(factor)):
            downs_l.append(nn.Conv2d(ch, cout, 3, stride=2, padding=1, rng=rng))
            downs_r.append(nn.Conv2d(ch, cout, 3, stride=2, padding=1, rng=rng))
            ch = cout
        self.downs_l = nn.ModuleList(downs_l)
        self.downs_r = nn.ModuleList(downs_r)
        self.exchange = make_interaction(interaction, cout, rng)
        self.fuse_l = nn.Conv2d(cout, cout, 3, padding=1, rng=rng)
        self.fuse_r = nn.Conv2d(cout, cout, 3, padding=1, rng=rng)

    def forward(self, fl: ad.Tensor, fr: ad.Tensor) -> tuple[ad.Tensor, ad.Tensor]:
        if fl.shape != fr.shape:
            raise ShapeError(f"view shapes differ: {fl.shape} vs {fr.shape}")
        hl, hr = fl, fr
        for cl, cr in zip(self.downs_l, self.downs_r):
            hl = nn.lrelu(cl(hl))
            hr = nn.lrelu(cr(hr))
        hl, hr = self.exchange(hl, hr)
        return self.fuse_l(hl), self.fuse_r(hr)

    __call__ = forward


class StereoDecoderUnit(nn.Module):
    """Cross-view exchange + transposed convolutions, mirroring the encoder unit."""

    def __init__(self, cin: int, cout: int, factor: int, interaction: str,
                 rng: np.random.Generator):
        self.exchange = make_interaction(interaction, cin, rng)
        self.head_l = nn.ConvTranspose2d(cin, cin, 3, stride=1, padding=1, rng=rng)
        self.head_r = nn.ConvTranspose2d(cin, cin, 3, stride=1, padding=1, rng=rng)
        ups_l, ups_r = [], []
        n_up = _log2(factor)
        for i in range(n_up):
            out_ch = cout if i == n_up - 1 else cin
            ups_l.append(nn.ConvTranspose2d(cin, out_ch, 4, stride=2, padding=1, rng=rng))
            ups_r.append(nn.ConvTranspose2d(cin, out_ch, 4, stride=2, padding=1, rng=rng))
        self.ups_l = nn.ModuleList(ups_l)
        self.ups_r = nn.ModuleList(ups_r)

    def forward(self, cl: ad.Tensor, cr: ad.Tensor) -> tuple[ad.Tensor, ad.Tensor]:
        if cl.shape != cr.shape:
            raise ShapeError(f"view shapes differ: {cl.shape} vs {cr.shape}")
        hl, hr = self.exchange(cl, cr)
        hl = nn.lrelu(self.head_l(hl))
        hr = nn.lrelu(self.head_r(hr))
        n = len(self.ups_l)
        for i, (ul, ur) in enumerate(zip(self.ups_l, self.ups_r)):
            hl, hr = ul(hl), ur(hr)
            if i < n - 1:
                hl, hr = nn.lrelu(hl), nn.lrelu(hr)
        return hl, hr

    __call__ = forward


class JointTransformCodec(nn.Module):
    def __init__(self, config: CodecConfig, rng: np.random.Generator):
        if config.variant != VARIANT_JOINT:
            raise ConfigError(f"JointTransformCodec needs variant={VARIANT_JOINT!r}")
        self.config = config
        ch = config.feature_channels
        lat = config.latent_channels
        f = config.stage_factor
        kind = config.interaction
        self.stages = nn.ModuleList([
            StereoEncoderUnit(ch[0], lat[0], f, kind, rng),
            StereoEncoderUnit(lat[0] + ch[1], lat[1], f, kind, rng),
            StereoEncoderUnit(lat[1] + ch[2], lat[2], f, kind, rng),
        ])
        self.dstages = nn.ModuleList([
            StereoDecoderUnit(lat[0], ch[0], f, kind, rng),
            StereoDecoderUnit(lat[1], lat[0] + ch[1], f, kind, rng),
            StereoDecoderUnit(lat[2], lat[1] + ch[2], f, kind, rng),
        ])

    def encode(self, pyr: FeaturePyramid) -> tuple[ad.Tensor, ad.Tensor]:
        cl, cr = self.stages[0](pyr.left[0], pyr.right[0])
        for level in (1, 2):
            try:
                xl = ad.channel_concat(cl, pyr.left[level])
                xr = ad.channel_concat(cr, pyr.right[level])
            except ShapeError as e:
                raise ConfigError(
                    f"stage {level}: carried latent does not align with pyramid "
                    f"level {level} for concatenation ({e})"
                ) from None
            cl, cr = self.stages[level](xl, xr)
        return cl, cr

    def decode(self, zl: ad.Tensor, zr: ad.Tensor) -> FeaturePyramid:
        lat = self.config.latent_channels
        hl, hr = self.dstages[2](zl, zr)
        cl1, f2l = ad.channel_split(hl, lat[1])
        cr1, f2r = ad.channel_split(hr, lat[1])
        hl, hr = self.dstages[1](cl1, cr1)
        cl0, f1l = ad.channel_split(hl, lat[0])
        cr0, f1r = ad.channel_split(hr, lat[0])
        f0l, f0r = self.dstages[0](cl0, cr0)
        return FeaturePyramid(left=(f0l, f1l, f2l), right=(f0r, f1r, f2r))


class SeparateTransformCodec(nn.Module):
    def __init__(self, config: CodecConfig, rng: np.random.Generator):
        if config.variant != VARIANT_SEPARATE:
            raise ConfigError(f"SeparateTransformCodec needs variant={VARIANT_SEPARATE!r}")
        self.config = config
        # per-view separate weights: build each view's chains from the shared rng stream
        self.enc_l = nn.ModuleList([self._chain_conv(config, lv, rng) for lv in range(3)])
        self.enc_r = nn.ModuleList([self._chain_conv(config, lv, rng) for lv in range(3)])
        self.dec_l = nn.ModuleList([self._chain_deconv(config, lv, rng) for lv in range(3)])
        self.dec_r = nn.ModuleList([self._chain_deconv(config, lv, rng) for lv in range(3)])

    @staticmethod
    def _chain_conv(config: CodecConfig, level: int, rng) -> nn.ModuleList:
        steps = _log2(config.bottleneck_stride // config.pyramid_strides[level])
        blat = config.separate_latent_channels[level]
        cin = config.feature_channels[level]
        convs = []
        for i in range(steps):
            cout = blat if i == steps - 1 else max(cin, blat)
            convs.append(nn.Conv2d(cin, cout, 3, stride=2, padding=1, rng=rng))
            cin = cout
        return nn.ModuleList(convs)

    @staticmethod
    def _chain_deconv(config: CodecConfig, level: int, rng) -> nn.ModuleList:
        steps = _log2(config.bottleneck_stride // config.pyramid_strides[level])
        blat = config.separate_latent_channels[level]
        out_final = config.feature_channels[level]
        cin = blat
        convs = []
        for i in range(steps):
            cout = out_final if i == steps - 1 else max(blat, out_final)
            convs.append(nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1, rng=rng))
            cin = cout
        return nn.ModuleList(convs)

    @property
    def bottleneck_slices(self) -> list[tuple[int, int]]:
        """Channel ranges of each level's latent inside the concatenated bottleneck."""
        blat = self.config.separate_latent_channels
        bounds = np.cumsum((0,) + blat)
        return [(int(bounds[i]), int(bounds[i + 1])) for i in range(3)]

    @staticmethod
    def _run_chain(chain, x: ad.Tensor) -> ad.Tensor:
        n = len(chain)
        for i, conv in enumerate(chain):
            x = conv(x)
            if i < n - 1:
                x = nn.lrelu(x)
        return x

    def encode(self, pyr: FeaturePyramid) -> tuple[ad.Tensor, ad.Tensor]:
        outs_l = [self._run_chain(self.enc_l[lv], pyr.left[lv]) for lv in range(3)]
        outs_r = [self._run_chain(self.enc_r[lv], pyr.right[lv]) for lv in range(3)]
        try:
            yl = ad.channel_concat(ad.channel_concat(outs_l[0], outs_l[1]), outs_l[2])
            yr = ad.channel_concat(ad.channel_concat(outs_r[0], outs_r[1]), outs_r[2])
        except ShapeError as e:
            raise ConfigError(f"bottleneck concatenation failed: {e}") from None
        return yl, yr

    def decode(self, zl: ad.Tensor, zr: ad.Tensor) -> FeaturePyramid:
        b0, b1, _ = self.config.separate_latent_channels
        zl0, rest = ad.channel_split(zl, b0)
        zl1, zl2 = ad.channel_split(rest, b1)
        zr0, rest = ad.channel_split(zr, b0)
        zr1, zr2 = ad.channel_split(rest, b1)
        left = tuple(
            self._run_chain(self.dec_l[lv], z) for lv, z in enumerate((zl0, zl1, zl2))
        )
        right = tuple(
            self._run_chain(self.dec_r[lv], z) for lv, z in enumerate((zr0, zr1, zr2))
        )
        return FeaturePyramid(left=left, right=right)


def make_transform(config: CodecConfig, rng: np.random.Generator) -> nn.Module:
    if config.variant == VARIANT_JOINT:
        return JointTransformCodec(config, rng)
    return SeparateTransformCodec(config, rng)


def encode_pyramid(codec, pyr: FeaturePyramid, mode: str = "inference"):
    """Continuous per-view bottleneck latents (no side information)."""
    if mode not in ("train", "inference"):
        raise ConfigError(f"mode must be 'train' or 'inference', got {mode!r}")
    return codec.encode(pyr)


def decode_latents(codec, latents: LatentSet) -> FeaturePyramid:
    """Reconstruct the feature pyramid from quantized latents."""
    if latents.config_id != codec.config.config_id:
        raise VersioningError(
            f"latents were produced under config {latents.config_id}, "
            f"codec has {codec.config.config_id}"
        )
    zl = ad.Tensor(latents.left[None].astype(np.float32))
    zr = ad.Tensor(latents.right[None].astype(np.float32))
    return codec.decode(zl, zr)
