"""RD sweeps: real encode/decode over evaluation scenes, one point per model."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import VersioningError
from ..model import CodecModel
from ..task.losses import task_distortion
from ..task.metric import mean_proxy_ap, proxy_ap
from ..task.scenes import SyntheticScene
from ..training.checkpoint import Checkpoint
from ..training.loop import make_dataset, split_dataset
from .bd import compute_bpp
from .curves import RDCurve, RDPoint, write_curve_csv
from .plots import save_rd_plot


@dataclass
class EvalSummary:
    mean_bpp: float
    mean_metric: float
    mean_distortion: float
    per_scene: list[dict]


def evaluate_model(
    model: CodecModel,
    scenes: list[SyntheticScene],
    bpp_denominator: str = "both",
    lambda_index: int = 0,
) -> EvalSummary:
    """Encode every scene with the real coder; report byte-true bpp and AP.

    Results are gathered by scene index so reports are byte-stable regardless
    of any execution-order differences.
    """
    rows = [None] * len(scenes)
    for i, scene in enumerate(scenes):
        pair = scene.pair
        frame = model.encode_frame(pair, lambda_index=lambda_index)
        bits = 8 * len(frame)
        latents = model.decode_frame(frame)
        recon = model.decompress(latents)
        pred = model.predict(recon)
        targets = {
            "occupancy": scene.occupancy,
            "box_offsets": scene.box_offsets,
            "disparity_bins": scene.disparity_bins,
        }
        import sfcodec.autodiff as ad

        with ad.no_grad():
            d_v = task_distortion(pred, targets).item()
        rows[i] = {
            "scene": i,
            "bits": bits,
            "bpp": compute_bpp(bits, pair.width, pair.height, bpp_denominator),
            "ap": proxy_ap(pred, scene),
            "distortion": d_v,
        }
    return EvalSummary(
        mean_bpp=float(np.mean([r["bpp"] for r in rows])),
        mean_metric=mean_proxy_ap([r["ap"] for r in rows]),
        mean_distortion=float(np.mean([r["distortion"] for r in rows])),
        per_scene=rows,
    )


def eval_scenes_for(checkpoint: Checkpoint) -> list[SyntheticScene]:
    """The held-out split implied by a checkpoint's training config."""
    _, heldout = split_dataset(make_dataset(checkpoint.train_config))
    return heldout


def run_rd_sweep(
    checkpoints: list[Checkpoint],
    scenes: list[SyntheticScene] | None = None,
    csv_path=None,
    plot_path=None,
    bpp_denominator: str = "both",
    curve_name: str = "sweep",
) -> tuple[RDCurve, list[EvalSummary]]:
    """One RD point per checkpoint; emits a sorted curve plus optional CSV/SVG."""
    if not checkpoints:
        raise ValueError("need at least one checkpoint")
    config_ids = {c.train_config.codec.config_id for c in checkpoints}
    if len(config_ids) != 1:
        raise VersioningError(
            f"checkpoints mix codec configs: {sorted(config_ids)}"
        )
    if scenes is None:
        scenes = eval_scenes_for(checkpoints[0])
    points, summaries = [], []
    for ckpt in checkpoints:
        model = ckpt.build_model()
        summary = evaluate_model(
            model, scenes, bpp_denominator, lambda_index=ckpt.train_config.lambda_index
        )
        summaries.append(summary)
        points.append(
            RDPoint(
                label=f"lambda={ckpt.train_config.lam:g}",
                bpp=summary.mean_bpp,
                metric=summary.mean_metric,
            )
        )
    curve = RDCurve.from_points(points)
    if csv_path is not None:
        write_curve_csv(curve, csv_path)
    if plot_path is not None:
        save_rd_plot({curve_name: curve}, plot_path)
    return curve, summaries
