"""Stereo multi-scale feature transform: extraction, joint compression, variants."""

from .config import (
    VARIANT_CODES,
    VARIANT_JOINT,
    VARIANT_NAMES,
    VARIANT_SEPARATE,
    CodecConfig,
)
from .extractor import FeatureExtractor
from .interaction import ConcatProjectExchange, make_interaction, register_interaction
from .quantize import quantize
from .transform import (
    JointTransformCodec,
    SeparateTransformCodec,
    StereoDecoderUnit,
    StereoEncoderUnit,
    decode_latents,
    encode_pyramid,
    make_transform,
)
from .types import FeaturePyramid, LatentSet, StereoPair

__all__ = [
    "CodecConfig",
    "ConcatProjectExchange",
    "FeatureExtractor",
    "FeaturePyramid",
    "JointTransformCodec",
    "LatentSet",
    "SeparateTransformCodec",
    "StereoDecoderUnit",
    "StereoEncoderUnit",
    "StereoPair",
    "VARIANT_CODES",
    "VARIANT_JOINT",
    "VARIANT_NAMES",
    "VARIANT_SEPARATE",
    "decode_latents",
    "encode_pyramid",
    "make_interaction",
    "make_transform",
    "quantize",
    "register_interaction",
]
