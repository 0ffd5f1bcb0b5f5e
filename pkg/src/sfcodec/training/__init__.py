"""Rate-distortion training: loss, progressive schedule, checkpoints."""

from .checkpoint import (
    FILE_EXTENSION,
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
    snapshot,
)
from .config import (
    LAMBDA_SWEEP,
    TrainConfig,
    format_train_config,
    load_train_config,
    parse_train_config,
    with_lambda,
)
from .loop import (
    TrainResult,
    make_dataset,
    pretrain_task,
    rd_loss,
    run_training,
    split_dataset,
)

__all__ = [
    "Checkpoint",
    "FILE_EXTENSION",
    "LAMBDA_SWEEP",
    "TrainConfig",
    "TrainResult",
    "format_train_config",
    "load_checkpoint",
    "load_train_config",
    "make_dataset",
    "parse_train_config",
    "pretrain_task",
    "rd_loss",
    "run_training",
    "save_checkpoint",
    "snapshot",
    "split_dataset",
    "with_lambda",
]
