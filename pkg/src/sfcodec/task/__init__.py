"""Synthetic stereo scenes and the proxy machine task."""

from .head import TaskHead, TaskPrediction
from .losses import (
    FOCAL_ALPHA,
    FOCAL_GAMMA,
    SMOOTH_L1_BETA,
    box_regression_loss,
    disparity_ce_loss,
    focal_loss,
    task_distortion,
    task_distortion_terms,
)
from .metric import (
    average_precision,
    box_iou,
    decode_detections,
    mean_proxy_ap,
    nms,
    proxy_ap,
    scene_gt_boxes,
)
from .scenes import (
    Box,
    SceneConfig,
    SyntheticScene,
    collate,
    export_scene,
    generate_scene,
    rasterize_boxes,
)

__all__ = [
    "Box",
    "FOCAL_ALPHA",
    "FOCAL_GAMMA",
    "SMOOTH_L1_BETA",
    "SceneConfig",
    "SyntheticScene",
    "TaskHead",
    "TaskPrediction",
    "average_precision",
    "box_iou",
    "box_regression_loss",
    "collate",
    "decode_detections",
    "disparity_ce_loss",
    "export_scene",
    "focal_loss",
    "generate_scene",
    "mean_proxy_ap",
    "nms",
    "proxy_ap",
    "rasterize_boxes",
    "scene_gt_boxes",
    "task_distortion",
    "task_distortion_terms",
]
