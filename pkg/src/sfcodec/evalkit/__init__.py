"""Measurement toolkit: BPP, BD deltas, RD sweeps, ablation, model stats."""

from .ablation import DEFAULT_ABLATION_LAMBDAS, AblationReport, run_ablation
from .bd import (
    bd_metric,
    bd_metric_dense_oracle,
    bd_rate,
    bd_rate_dense_oracle,
    compute_bpp,
)
from .curves import (
    CSV_HEADER,
    RDCurve,
    RDPoint,
    curve_from_csv,
    curve_to_csv,
    read_curve_csv,
    write_curve_csv,
)
from .plots import save_rd_plot
from .stats import ModelStats, model_stats
from .sweep import EvalSummary, eval_scenes_for, evaluate_model, run_rd_sweep

__all__ = [
    "AblationReport",
    "CSV_HEADER",
    "DEFAULT_ABLATION_LAMBDAS",
    "EvalSummary",
    "ModelStats",
    "RDCurve",
    "RDPoint",
    "bd_metric",
    "bd_metric_dense_oracle",
    "bd_rate",
    "bd_rate_dense_oracle",
    "compute_bpp",
    "curve_from_csv",
    "curve_to_csv",
    "eval_scenes_for",
    "evaluate_model",
    "model_stats",
    "read_curve_csv",
    "run_ablation",
    "run_rd_sweep",
    "save_rd_plot",
    "write_curve_csv",
]
