"""Task distortion: focal occupancy loss + smooth-L1 box loss + disparity CE."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..errors import ShapeError
from .head import TaskPrediction

FOCAL_ALPHA = 0.25
FOCAL_GAMMA = 2.0
SMOOTH_L1_BETA = 1.0


def _one_minus(x: ad.Tensor) -> ad.Tensor:
    return ad.add_const(ad.scale(x, -1.0), 1.0)


def focal_loss(
    logits: ad.Tensor,
    occupancy: np.ndarray,
    alpha: float = FOCAL_ALPHA,
    gamma: float = FOCAL_GAMMA,
) -> ad.Tensor:
    """Binary focal loss summed over cells, normalized by positive count."""
    if logits.shape != occupancy.shape:
        raise ShapeError(
            f"occupancy logits {logits.shape} vs target {occupancy.shape}"
        )
    pos = ad.Tensor(occupancy.astype(logits.dtype.type))
    p = ad.sigmoid(logits)
    # log p = -softplus(-z), log(1-p) = -softplus(z): saturation-safe
    pos_term = ad.scale(
        ad.mul(ad.pow_const(_one_minus(p), gamma), ad.softplus(ad.scale(logits, -1.0))),
        alpha,
    )
    neg_term = ad.scale(ad.mul(ad.pow_const(p, gamma), ad.softplus(logits)), 1.0 - alpha)
    total = ad.add(ad.mul(pos, pos_term), ad.mul(_one_minus(pos), neg_term))
    num_pos = max(float(occupancy.sum()), 1.0)
    return ad.scale(ad.sum_all(total), 1.0 / num_pos)


def box_regression_loss(
    pred: ad.Tensor,
    target: np.ndarray,
    occupancy: np.ndarray,
    beta: float = SMOOTH_L1_BETA,
) -> ad.Tensor:
    """Smooth-L1 over positive cells, mean per offset element."""
    if pred.shape != target.shape:
        raise ShapeError(f"box offsets {pred.shape} vs target {target.shape}")
    err = ad.sub(pred, ad.Tensor(target.astype(pred.dtype.type)))
    mask = ad.Tensor(occupancy.astype(pred.dtype.type))  # (N,1,Hg,Wg), broadcasts
    per_elem = ad.mul(mask, ad.huber(err, beta))
    num_pos = max(float(occupancy.sum()), 1.0)
    return ad.scale(ad.sum_all(per_elem), 1.0 / (4.0 * num_pos))


def disparity_ce_loss(logits: ad.Tensor, bin_target: np.ndarray) -> ad.Tensor:
    """Per-cell cross-entropy over disparity bins, mean over all cells."""
    n, b, hg, wg = logits.shape
    if bin_target.shape != (n, hg, wg):
        raise ShapeError(
            f"disparity logits {logits.shape} vs bin target {bin_target.shape}"
        )
    onehot = np.zeros((n, b, hg, wg), dtype=logits.dtype.type)
    ni, yi, xi = np.meshgrid(np.arange(n), np.arange(hg), np.arange(wg), indexing="ij")
    onehot[ni, bin_target, yi, xi] = 1.0
    logp = ad.log_softmax_channels(logits)
    return ad.scale(ad.sum_all(ad.mul(ad.Tensor(onehot), logp)), -1.0 / (n * hg * wg))


def task_distortion(pred: TaskPrediction, targets: dict[str, np.ndarray]) -> ad.Tensor:
    """Sum of the three task loss terms (each nonnegative, unit weights)."""
    cls = focal_loss(pred.occupancy, targets["occupancy"])
    reg = box_regression_loss(pred.box_offsets, targets["box_offsets"], targets["occupancy"])
    dis = disparity_ce_loss(pred.disparity, targets["disparity_bins"])
    return ad.add(ad.add(cls, reg), dis)


def task_distortion_terms(
    pred: TaskPrediction, targets: dict[str, np.ndarray]
) -> tuple[ad.Tensor, ad.Tensor, ad.Tensor]:
    return (
        focal_loss(pred.occupancy, targets["occupancy"]),
        box_regression_loss(pred.box_offsets, targets["box_offsets"], targets["occupancy"]),
        disparity_ce_loss(pred.disparity, targets["disparity_bins"]),
    )
