"""Proxy task quality: average precision of occupancy-grid detection.

Per-cell predictions decode into scored boxes (cell units), pass greedy NMS,
and are matched against ground-truth boxes at IoU 0.5.  AP integrates the
precision envelope over recall and is reported on [0, 100] to mirror an
AP-style axis.
"""

from __future__ import annotations

import numpy as np

from .head import TaskPrediction
from .scenes import SyntheticScene

IOU_THRESHOLD = 0.5


def _to_corners(box: np.ndarray) -> np.ndarray:
    cx, cy, w, h = box
    return np.array([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2])


def box_iou(a: np.ndarray, b: np.ndarray) -> float:
    ax0, ay0, ax1, ay1 = _to_corners(a)
    bx0, by0, bx1, by1 = _to_corners(b)
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return float(inter / union) if union > 0 else 0.0


def decode_detections(pred: TaskPrediction, index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """(scores, boxes) for one batch element; boxes are (cx,cy,w,h) in cells."""
    occ = pred.occupancy.data[index, 0]
    off = pred.box_offsets.data[index]
    hg, wg = occ.shape
    scores = 1.0 / (1.0 + np.exp(-occ.astype(np.float64)))
    jj, ii = np.meshgrid(np.arange(wg), np.arange(hg))
    cx = jj + 0.5 + off[0]
    cy = ii + 0.5 + off[1]
    w = np.exp(np.clip(off[2], -10, 10))
    h = np.exp(np.clip(off[3], -10, 10))
    boxes = np.stack([cx, cy, w, h], axis=-1).reshape(-1, 4)
    return scores.reshape(-1), boxes


def nms(scores: np.ndarray, boxes: np.ndarray, iou_thr: float = IOU_THRESHOLD):
    """Greedy NMS; ties broken by cell index for determinism."""
    order = np.lexsort((np.arange(len(scores)), -scores))
    keep = []
    for i in order:
        if all(box_iou(boxes[i], boxes[j]) < iou_thr for j in keep):
            keep.append(int(i))
    return scores[keep], boxes[keep]


def average_precision(
    scores: np.ndarray,
    boxes: np.ndarray,
    gt_boxes: np.ndarray,
    iou_thr: float = IOU_THRESHOLD,
) -> float:
    """All-point interpolated AP in [0, 1]."""
    n_gt = len(gt_boxes)
    if n_gt == 0:
        return float("nan")
    if len(scores) == 0:
        return 0.0
    order = np.lexsort((np.arange(len(scores)), -scores))
    matched = np.zeros(n_gt, dtype=bool)
    tp = np.zeros(len(order))
    for rank, i in enumerate(order):
        best_iou, best_j = 0.0, -1
        for j in range(n_gt):
            if matched[j]:
                continue
            iou = box_iou(boxes[i], gt_boxes[j])
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_iou >= iou_thr:
            matched[best_j] = True
            tp[rank] = 1.0
    cum_tp = np.cumsum(tp)
    recall = cum_tp / n_gt
    precision = cum_tp / np.arange(1, len(order) + 1)
    # precision envelope, integrated over recall
    mrec = np.concatenate([[0.0], recall, [recall[-1]]])
    mpre = np.concatenate([[1.0], precision, [0.0]])
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]).sum())


def scene_gt_boxes(scene: SyntheticScene) -> np.ndarray:
    return np.array([[b.cx, b.cy, b.w, b.h] for b in scene.boxes]).reshape(-1, 4)


def proxy_ap(pred: TaskPrediction, scene: SyntheticScene, index: int = 0) -> float:
    """AP (in percent) of one scene's predictions against its boxes."""
    gt = scene_gt_boxes(scene)
    if len(gt) == 0:
        return float("nan")
    scores, boxes = decode_detections(pred, index)
    scores, boxes = nms(scores, boxes)
    return 100.0 * average_precision(scores, boxes, gt)


def mean_proxy_ap(aps: list[float]) -> float:
    """Mean over scenes, ignoring scenes without ground-truth objects."""
    vals = [a for a in aps if not np.isnan(a)]
    return float(np.mean(vals)) if vals else 0.0
