"""Bit-exact coded-frame container (.smfc).

Layout, all integers little-endian::

    "SMFC" | version u8 | variant u8 | lambda-index u8 | reserved u8 |
    model-hash 16B | image W u16 | image H u16 | scales u8 |
    per payload: channels u16, height u16, width u16, length u32 |
    payload bytes in declared order | CRC32 u32 over everything after magic

One entropy payload per view (left, then right), each holding that view's
bottleneck latent in channel-major order.
"""

from __future__ import annotations

import struct
import warnings
import zlib
from dataclasses import dataclass

import numpy as np

from ..codec.types import LatentSet
from ..errors import (
    CorruptionError,
    SymbolRangeError,
    TruncationError,
    VersioningError,
)
from .prior import FactorizedPrior
from .rangecoder import RangeDecoder, RangeEncoder

MAGIC = b"SMFC"
VERSION = 1
FILE_EXTENSION = ".smfc"
_HEADER = struct.Struct("<4sBBBB16sHHB")
_PAYLOAD_ENTRY = struct.Struct("<HHHI")
_CRC = struct.Struct("<I")


class SymbolClampWarning(UserWarning):
    """Latent values fell outside the coded symbol range and were clamped."""


@dataclass(frozen=True)
class FrameMeta:
    width: int
    height: int
    variant_code: int = 0
    lambda_index: int = 0


def check_symbol_range(latent: np.ndarray, prior: FactorizedPrior) -> None:
    """Raise SymbolRangeError naming the first offending channel and value."""
    if latent.size == 0:
        return
    bad = (latent < prior.symbol_min) | (latent > prior.symbol_max)
    if bad.any():
        pos = np.argwhere(bad)[0]
        channel = int(pos[0]) if latent.ndim >= 1 else 0
        raise SymbolRangeError(
            f"symbol {int(latent[tuple(pos)])} in channel {channel} outside "
            f"[{prior.symbol_min}, {prior.symbol_max}]"
        )


def estimate_rate(latent, prior: FactorizedPrior):
    """Differentiable bits of a (possibly noisy) latent under the prior.

    The latent must round into the coded symbol range; out-of-range values
    raise SymbolRangeError like the hard coder would.
    """
    rounded = np.rint(latent.data if hasattr(latent, "data") else latent)
    check_symbol_range(np.moveaxis(rounded, 1, 0) if rounded.ndim == 4 else rounded, prior)
    return prior.bits(latent)


def _clamp_symbols(arr: np.ndarray, prior: FactorizedPrior) -> np.ndarray:
    clipped = np.clip(arr, prior.symbol_min, prior.symbol_max)
    n_clipped = int((clipped != arr).sum())
    if n_clipped:
        prior.clip_count += n_clipped
        warnings.warn(
            f"{n_clipped} latent symbols clamped to [{prior.symbol_min}, "
            f"{prior.symbol_max}] before coding",
            SymbolClampWarning,
            stacklevel=3,
        )
    return clipped


def _encode_payload(symbols: np.ndarray, prior: FactorizedPrior) -> bytes:
    if symbols.size == 0:
        return b""
    tables = prior.tables
    c = symbols.shape[0]
    idx = symbols.reshape(c, -1).astype(np.int64) - prior.symbol_min
    rows = np.arange(c)[:, None]
    lo = tables[rows, idx].ravel().tolist()
    hi = tables[rows, idx + 1].ravel().tolist()
    enc = RangeEncoder()
    encode = enc.encode
    for a, b in zip(lo, hi):
        encode(a, b)
    return enc.finish()


def _decode_payload(
    data: bytes, shape: tuple[int, int, int], prior: FactorizedPrior
) -> np.ndarray:
    c, h, w = shape
    n = c * h * w
    if n == 0:
        return np.zeros(shape, dtype=np.int32)
    cums = [row.tolist() for row in prior.tables]
    dec = RangeDecoder(data)
    decode = dec.decode
    out = np.empty(n, dtype=np.int32)
    per_channel = h * w
    k = 0
    for ch in range(c):
        cum = cums[ch]
        for _ in range(per_channel):
            out[k] = decode(cum)
            k += 1
    return (out + prior.symbol_min).reshape(shape)


def encode_latents(
    latents: LatentSet,
    prior: FactorizedPrior,
    meta: FrameMeta,
    model_hash: bytes | None = None,
) -> bytes:
    """Serialize quantized latents into a deterministic byte-exact frame."""
    prior.check_tables_fresh()
    model_hash = model_hash if model_hash is not None else prior.param_hash()
    if len(model_hash) != 16:
        raise ValueError("model hash must be 16 bytes")

    payloads = []
    for view in (latents.left, latents.right):
        symbols = _clamp_symbols(view, prior)
        payloads.append((view.shape, _encode_payload(symbols, prior)))

    buf = bytearray()
    buf += _HEADER.pack(
        MAGIC, VERSION, meta.variant_code, meta.lambda_index, 0,
        model_hash, meta.width, meta.height, 3,
    )
    for (c, h, w), data in payloads:
        buf += _PAYLOAD_ENTRY.pack(c, h, w, len(data))
    for _, data in payloads:
        buf += data
    buf += _CRC.pack(zlib.crc32(bytes(buf[len(MAGIC):])))
    return bytes(buf)


@dataclass(frozen=True)
class FrameHeader:
    version: int
    variant_code: int
    lambda_index: int
    model_hash: bytes
    width: int
    height: int
    scales: int
    payload_shapes: tuple[tuple[int, int, int], ...]
    payload_lengths: tuple[int, ...]


def parse_header(frame: bytes, n_payloads: int = 2) -> FrameHeader:
    if len(frame) < _HEADER.size + _CRC.size:
        raise TruncationError(f"frame of {len(frame)} bytes is shorter than a header")
    magic, version, variant, lam, _, model_hash, width, height, scales = _HEADER.unpack_from(
        frame, 0
    )
    if magic != MAGIC:
        raise CorruptionError(f"bad magic {magic!r}; not an {FILE_EXTENSION} frame")
    stored_crc = _CRC.unpack_from(frame, len(frame) - _CRC.size)[0]
    actual_crc = zlib.crc32(frame[len(MAGIC) : len(frame) - _CRC.size])
    if stored_crc != actual_crc:
        raise CorruptionError(
            f"CRC mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )
    if version != VERSION:
        raise VersioningError(f"unsupported frame version {version}")
    off = _HEADER.size
    shapes, lengths = [], []
    for _ in range(n_payloads):
        if off + _PAYLOAD_ENTRY.size > len(frame) - _CRC.size:
            raise TruncationError("frame ends inside the payload table")
        c, h, w, length = _PAYLOAD_ENTRY.unpack_from(frame, off)
        shapes.append((c, h, w))
        lengths.append(length)
        off += _PAYLOAD_ENTRY.size
    if off + sum(lengths) > len(frame) - _CRC.size:
        raise TruncationError("declared payload lengths exceed the frame size")
    return FrameHeader(
        version, variant, lam, model_hash, width, height, scales,
        tuple(shapes), tuple(lengths),
    )


def decode_frame(
    frame: bytes,
    prior: FactorizedPrior,
    model_hash: bytes | None = None,
    config_id: str = "",
) -> LatentSet:
    """Recover the exact latent symbols from a frame (checksum verified first)."""
    header = parse_header(frame)
    expected = model_hash if model_hash is not None else prior.param_hash()
    if header.model_hash != expected:
        raise VersioningError(
            "frame was encoded under a different model "
            f"(hash {header.model_hash.hex()} != {expected.hex()})"
        )
    prior.check_tables_fresh()
    off = _HEADER.size + _PAYLOAD_ENTRY.size * 2
    views = []
    for shape, length in zip(header.payload_shapes, header.payload_lengths):
        views.append(_decode_payload(frame[off : off + length], shape, prior))
        off += length
    return LatentSet(left=views[0], right=views[1], config_id=config_id)
