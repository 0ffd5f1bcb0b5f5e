"""Bjontegaard-delta metrics over RD curves.

Monotone piecewise-cubic (shape-preserving Hermite) interpolation, integrated
exactly in closed form.  ``bd_rate`` interpolates log10(rate) against the
quality metric; ``bd_metric`` interpolates the metric against log10(rate).
A negative BD-rate means the test curve needs fewer bits at equal quality.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import DisjointRangeError
from .curves import RDCurve


def compute_bpp(
    total_bits: int, width: int, height: int, denominator: str = "both"
) -> float:
    """Coding bits divided by pixel count; 'both' counts both views' pixels."""
    if width <= 0 or height <= 0:
        raise ValueError(f"image dims must be positive, got {width}x{height}")
    if total_bits < 0:
        raise ValueError(f"bit count must be nonnegative, got {total_bits}")
    if denominator == "both":
        views = 2
    elif denominator == "single":
        views = 1
    else:
        raise ValueError(f"denominator must be 'both' or 'single', got {denominator!r}")
    return total_bits / (views * width * height)


def _by_metric(curve: RDCurve) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(curve.points, key=lambda p: p.metric)
    metric = np.array([p.metric for p in pts], dtype=np.float64)
    rate = np.array([p.bpp for p in pts], dtype=np.float64)
    if np.any(np.diff(metric) <= 0):
        raise ValueError(
            f"metric values must be distinct for BD interpolation, got {metric.tolist()}"
        )
    return metric, rate


def _overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> tuple[float, float]:
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if hi <= lo:
        raise DisjointRangeError(
            f"curves share no interval: [{lo1:g}, {hi1:g}] vs [{lo2:g}, {hi2:g}]"
        )
    return lo, hi


def bd_rate(anchor: RDCurve, test: RDCurve) -> float:
    """Average rate difference in percent at equal quality."""
    am, ar = _by_metric(anchor)
    tm, tr = _by_metric(test)
    lo, hi = _overlap(am[0], am[-1], tm[0], tm[-1])
    pa = PchipInterpolator(am, np.log10(ar))
    pt = PchipInterpolator(tm, np.log10(tr))
    delta = (pt.integrate(lo, hi) - pa.integrate(lo, hi)) / (hi - lo)
    return float((10.0**delta - 1.0) * 100.0)


def bd_metric(anchor: RDCurve, test: RDCurve) -> float:
    """Average metric difference at equal rate (log-rate axis)."""
    ar = np.log10(np.array(anchor.bpp, dtype=np.float64))
    tr = np.log10(np.array(test.bpp, dtype=np.float64))
    am = np.array(anchor.metric, dtype=np.float64)
    tm = np.array(test.metric, dtype=np.float64)
    lo, hi = _overlap(ar[0], ar[-1], tr[0], tr[-1])
    pa = PchipInterpolator(ar, am)
    pt = PchipInterpolator(tr, tm)
    return float((pt.integrate(lo, hi) - pa.integrate(lo, hi)) / (hi - lo))


def bd_rate_dense_oracle(anchor: RDCurve, test: RDCurve, samples: int = 100_000) -> float:
    """Trapezoid integration of the same interpolants; oracle for bd_rate."""
    am, ar = _by_metric(anchor)
    tm, tr = _by_metric(test)
    lo, hi = _overlap(am[0], am[-1], tm[0], tm[-1])
    grid = np.linspace(lo, hi, samples)
    pa = PchipInterpolator(am, np.log10(ar))
    pt = PchipInterpolator(tm, np.log10(tr))
    delta = np.trapezoid(pt(grid) - pa(grid), grid) / (hi - lo)
    return float((10.0**delta - 1.0) * 100.0)


def bd_metric_dense_oracle(anchor: RDCurve, test: RDCurve, samples: int = 100_000) -> float:
    """Trapezoid integration of the same interpolants; oracle for bd_metric."""
    ar = np.log10(np.array(anchor.bpp, dtype=np.float64))
    tr = np.log10(np.array(test.bpp, dtype=np.float64))
    lo, hi = _overlap(ar[0], ar[-1], tr[0], tr[-1])
    grid = np.linspace(lo, hi, samples)
    pa = PchipInterpolator(ar, np.array(anchor.metric, dtype=np.float64))
    pt = PchipInterpolator(tr, np.array(test.metric, dtype=np.float64))
    return float(np.trapezoid(pt(grid) - pa(grid), grid) / (hi - lo))
