"""Probability modeling and lossless coding of quantized latents."""

from .frame import (
    FILE_EXTENSION,
    MAGIC,
    FrameHeader,
    FrameMeta,
    SymbolClampWarning,
    decode_frame,
    encode_latents,
    estimate_rate,
    parse_header,
)
from .prior import LIKELIHOOD_FLOOR, TOTAL_FREQ, TOTAL_FREQ_BITS, FactorizedPrior
from .rangecoder import RangeDecoder, RangeEncoder

__all__ = [
    "FILE_EXTENSION",
    "FactorizedPrior",
    "FrameHeader",
    "FrameMeta",
    "LIKELIHOOD_FLOOR",
    "MAGIC",
    "RangeDecoder",
    "RangeEncoder",
    "SymbolClampWarning",
    "TOTAL_FREQ",
    "TOTAL_FREQ_BITS",
    "decode_frame",
    "encode_latents",
    "estimate_rate",
    "parse_header",
]
