"""The full stereo feature codec bundle: extractor, transform, prior, task head."""

from __future__ import annotations

import hashlib

import numpy as np

from . import autodiff as ad
from . import nn
from .codec import (
    VARIANT_CODES,
    CodecConfig,
    FeatureExtractor,
    FeaturePyramid,
    LatentSet,
    StereoPair,
    make_transform,
    quantize,
)
from .entropy import FactorizedPrior, FrameMeta, decode_frame, encode_latents
from .errors import VersioningError
from .task import SceneConfig, TaskHead, TaskPrediction


class CodecModel(nn.Module):
    """Owns all trainable components and the end-to-end compress path."""

    def __init__(
        self,
        codec_config: CodecConfig | None = None,
        scene_config: SceneConfig | None = None,
        seed: int = 0,
        head_width: int = 32,
        prior_filters: tuple[int, ...] = (3, 3, 3),
    ):
        self.config = codec_config or CodecConfig()
        self.scene_config = scene_config or SceneConfig()
        self.seed = seed
        self.head_width = head_width
        self.prior_filters = tuple(prior_filters)
        streams = np.random.SeedSequence(seed).spawn(4)
        self.extractor = FeatureExtractor(self.config, np.random.default_rng(streams[0]))
        self.transform = make_transform(self.config, np.random.default_rng(streams[1]))
        self.prior = FactorizedPrior(
            self.config.bottleneck_channels,
            filters=self.prior_filters,
            rng=np.random.default_rng(streams[2]),
        )
        self.head = TaskHead(
            self.config, self.scene_config, np.random.default_rng(streams[3]),
            width=head_width,
        )
        self.finalize_names()

    # -- identity ---------------------------------------------------------------

    def content_hash(self) -> bytes:
        """16-byte digest over the architecture id and every parameter."""
        h = hashlib.md5()
        h.update(self.config.config_id.encode())
        for name, p in self.named_parameters():
            h.update(name.encode())
            h.update(p.value.data.tobytes())
        return h.digest()

    # -- deployment path ----------------------------------------------------------

    def extract(self, pair: StereoPair) -> FeaturePyramid:
        return self.extractor(pair.left, pair.right)

    def compress(self, pair: StereoPair) -> LatentSet:
        """Pixels to integer latents (rounding quantizer), no tape."""
        with ad.no_grad():
            pyr = self.extractor(pair.left, pair.right)
            yl, yr = self.transform.encode(pyr)
        return LatentSet(
            left=np.rint(yl.data[0]).astype(np.int32),
            right=np.rint(yr.data[0]).astype(np.int32),
            config_id=self.config.config_id,
        )

    def decompress(self, latents: LatentSet) -> FeaturePyramid:
        if latents.config_id and latents.config_id != self.config.config_id:
            raise VersioningError(
                f"latents config {latents.config_id} != model config "
                f"{self.config.config_id}"
            )
        with ad.no_grad():
            zl = ad.Tensor(latents.left[None].astype(np.float32))
            zr = ad.Tensor(latents.right[None].astype(np.float32))
            return self.transform.decode(zl, zr)

    def predict(self, pyr: FeaturePyramid) -> TaskPrediction:
        with ad.no_grad():
            return self.head(pyr)

    def encode_frame(self, pair: StereoPair, lambda_index: int = 0) -> bytes:
        latents = self.compress(pair)
        meta = FrameMeta(
            width=pair.width,
            height=pair.height,
            variant_code=VARIANT_CODES[self.config.variant],
            lambda_index=lambda_index,
        )
        return encode_latents(latents, self.prior, meta, model_hash=self.content_hash())

    def decode_frame(self, frame: bytes) -> LatentSet:
        return decode_frame(
            frame,
            self.prior,
            model_hash=self.content_hash(),
            config_id=self.config.config_id,
        )

    # -- training path --------------------------------------------------------------

    def train_forward(
        self,
        left: ad.Tensor,
        right: ad.Tensor,
        rng: np.random.Generator,
        freeze_features: bool = False,
    ) -> tuple[TaskPrediction, ad.Tensor, ad.Tensor]:
        """Noise-quantized codec pass; returns (prediction, bits_left, bits_right)."""
        from .entropy import estimate_rate

        if freeze_features:
            with ad.no_grad():
                pyr = self.extractor(left, right)
        else:
            pyr = self.extractor(left, right)
        yl, yr = self.transform.encode(pyr)
        ql = quantize(yl, "train-noise", rng)
        qr = quantize(yr, "train-noise", rng)
        bits_l = estimate_rate(ql, self.prior)
        bits_r = estimate_rate(qr, self.prior)
        recon = self.transform.decode(ql, qr)
        pred = self.head(recon)
        return pred, bits_l, bits_r

    def task_forward(self, left: ad.Tensor, right: ad.Tensor) -> TaskPrediction:
        """Uncompressed path used for task-only pretraining."""
        return self.head(self.extractor(left, right))
