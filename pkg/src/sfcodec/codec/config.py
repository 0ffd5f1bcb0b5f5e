"""Codec architecture configuration."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

from ..errors import ConfigError

VARIANT_JOINT = "joint"
VARIANT_SEPARATE = "separate"
VARIANT_CODES = {VARIANT_JOINT: 0, VARIANT_SEPARATE: 1}
VARIANT_NAMES = {v: k for k, v in VARIANT_CODES.items()}


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class CodecConfig:
    """Channel/stride plan for the multi-scale stereo transform.

    ``stage_factor`` is the spatial reduction of one encoder stage; it must
    equal the ratio between consecutive pyramid strides so that a stage's
    output lines up with the next feature level for channel concatenation.
    """

    feature_channels: tuple[int, int, int] = (32, 64, 96)
    latent_channels: tuple[int, int, int] = (64, 96, 128)
    pyramid_strides: tuple[int, int, int] = (4, 8, 16)
    stage_factor: int = 2
    interaction: str = "concat-1x1"
    variant: str = VARIANT_JOINT
    separate_latent_channels: tuple[int, int, int] = (32, 32, 64)

    def __post_init__(self):
        if self.variant not in VARIANT_CODES:
            raise ConfigError(f"unknown variant {self.variant!r}")
        for name in ("feature_channels", "latent_channels", "pyramid_strides",
                     "separate_latent_channels"):
            val = tuple(int(v) for v in getattr(self, name))
            if len(val) != 3 or any(v < 1 for v in val):
                raise ConfigError(f"{name} must be three positive ints, got {val}")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "stage_factor", int(self.stage_factor))
        s0, s1, s2 = self.pyramid_strides
        if not (s0 < s1 < s2):
            raise ConfigError(f"pyramid strides must increase, got {self.pyramid_strides}")
        if not all(_is_pow2(s) for s in (s0, s1, s2, self.stage_factor)):
            raise ConfigError("strides and stage_factor must be powers of two")
        if self.stage_factor < 2:
            raise ConfigError("stage_factor must be >= 2")
        if s1 != s0 * self.stage_factor or s2 != s1 * self.stage_factor:
            raise ConfigError(
                f"stage_factor {self.stage_factor} times stride {s0} must step through "
                f"{self.pyramid_strides}: each stage output must match the next level"
            )

    @property
    def bottleneck_stride(self) -> int:
        return self.pyramid_strides[2] * self.stage_factor

    @property
    def bottleneck_channels(self) -> int:
        if self.variant == VARIANT_JOINT:
            return self.latent_channels[2]
        return sum(self.separate_latent_channels)

    @property
    def divisor(self) -> int:
        """Input H and W must be divisible by this."""
        return self.bottleneck_stride

    @property
    def config_id(self) -> str:
        payload = ";".join(
            f"{f.name}={getattr(self, f.name)}" for f in fields(self)
        )
        return hashlib.md5(payload.encode()).hexdigest()[:16]

    def latent_shape(self, height: int, width: int) -> tuple[int, int, int]:
        """Per-view latent (C, h, w) for an input of the given pixel dims."""
        s = self.bottleneck_stride
        if height % s or width % s:
            raise ConfigError(
                f"input dims {height}x{width} must be divisible by {s}"
            )
        return (self.bottleneck_channels, height // s, width // s)
