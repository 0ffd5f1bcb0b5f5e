"""Rate-distortion curve containers and their CSV format."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import CodecError


@dataclass(frozen=True)
class RDPoint:
    label: str
    bpp: float
    metric: float

    def __post_init__(self):
        if not (self.bpp > 0 and math.isfinite(self.bpp)):
            raise ValueError(f"bpp must be finite and positive, got {self.bpp}")
        if not math.isfinite(self.metric):
            raise ValueError(f"metric must be finite, got {self.metric}")


@dataclass(frozen=True)
class RDCurve:
    points: tuple[RDPoint, ...]

    def __post_init__(self):
        if len(self.points) < 4:
            raise ValueError(
                f"an RD curve needs at least 4 points, got {len(self.points)}"
            )
        bpps = [p.bpp for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(bpps, bpps[1:])):
            raise ValueError(f"bpp must be strictly increasing, got {bpps}")
        object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def from_points(cls, points) -> "RDCurve":
        return cls(points=tuple(sorted(points, key=lambda p: p.bpp)))

    @property
    def bpp(self) -> list[float]:
        return [p.bpp for p in self.points]

    @property
    def metric(self) -> list[float]:
        return [p.metric for p in self.points]

    def scaled_rate(self, factor: float) -> "RDCurve":
        return RDCurve(
            points=tuple(
                RDPoint(p.label, p.bpp * factor, p.metric) for p in self.points
            )
        )

    def shifted_metric(self, delta: float) -> "RDCurve":
        return RDCurve(
            points=tuple(
                RDPoint(p.label, p.bpp, p.metric + delta) for p in self.points
            )
        )


CSV_HEADER = "label,bpp,metric"


def curve_to_csv(curve: RDCurve) -> str:
    lines = [CSV_HEADER]
    for p in curve.points:
        lines.append(f"{p.label},{p.bpp!r},{p.metric!r}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> RDCurve:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CSV_HEADER:
        raise CodecError(f"RD CSV must start with header {CSV_HEADER!r}")
    points = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise CodecError(f"malformed RD CSV line {ln!r}")
        points.append(RDPoint(parts[0], float(parts[1]), float(parts[2])))
    return RDCurve(points=tuple(points))


def write_curve_csv(curve: RDCurve, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(curve_to_csv(curve), encoding="utf-8")
    return path


def read_curve_csv(path) -> RDCurve:
    return curve_from_csv(Path(path).read_text(encoding="utf-8"))
