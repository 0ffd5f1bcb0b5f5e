"""Parameter and MAC accounting for a trained model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..codec.types import StereoPair
from ..model import CodecModel
from ..training.checkpoint import Checkpoint


@dataclass(frozen=True)
class ModelStats:
    params: int
    macs: int
    macs_by_kind: dict[str, int]


def model_stats(
    source: CodecModel | Checkpoint,
    height: int | None = None,
    width: int | None = None,
) -> ModelStats:
    """Exact parameter count plus analytic MACs for one stereo pair.

    MACs cover the deployed pipeline (feature extraction, transform encode and
    decode, task head) at the given dims; a conv contributes
    N*Cout*H'*W'*Cin*k^2.  The frozen entropy tables cost no multiplies and
    are excluded.
    """
    model = source.build_model() if isinstance(source, Checkpoint) else source
    height = height if height is not None else model.scene_config.height
    width = width if width is not None else model.scene_config.width
    params = model.param_count()
    zeros = np.zeros((1, 3, height, width), dtype=np.float32)
    pair = StereoPair(left=ad.Tensor(zeros), right=ad.Tensor(zeros.copy()))
    with ad.count_macs() as counter, ad.no_grad():
        pyr = model.extractor(pair.left, pair.right)
        yl, yr = model.transform.encode(pyr)
        recon = model.transform.decode(yl, yr)
        model.head(recon)
    return ModelStats(
        params=params, macs=counter.total, macs_by_kind=dict(counter.by_kind)
    )
