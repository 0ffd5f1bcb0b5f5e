"""Rate-distortion loss assembly and the three-phase progressive training loop.

Phase 1 pretrains the feature extractor and task head on the task loss alone.
Phase 2 freezes both and optimizes the codec (transform + prior) under the
rate-distortion objective.  Phase 3 unfreezes everything for joint training.
The learning rate is cosine-annealed from ``base_lr`` to ``final_lr`` across
phases 2 and 3 combined.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..errors import NumericError
from ..model import CodecModel
from ..task.losses import task_distortion
from ..task.scenes import SyntheticScene, collate, generate_scene
from .checkpoint import Checkpoint, snapshot
from .config import TrainConfig


def rd_loss(d_v, r_left, r_right, lam: float):
    """lambda * D_v + R_l + R_r; rates in bits per pixel of one view.

    Accepts python floats or scalar tensors (the training path).
    """
    lam = float(lam)
    if not math.isfinite(lam):
        raise NumericError(f"non-finite lambda {lam}")
    if isinstance(d_v, ad.Tensor) or isinstance(r_left, ad.Tensor):
        return ad.add(ad.add(ad.scale(d_v, lam), r_left), r_right)
    vals = (float(d_v), float(r_left), float(r_right))
    if not all(math.isfinite(v) for v in vals):
        raise NumericError(f"non-finite rd_loss inputs {vals}")
    return lam * vals[0] + vals[1] + vals[2]


def make_dataset(cfg: TrainConfig) -> list[SyntheticScene]:
    """Deterministic scene list for (cfg.seed, cfg.scene)."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 10]))
    seeds = rng.integers(0, 2**31 - 1, size=cfg.dataset_size)
    return [generate_scene(int(s), cfg.scene) for s in seeds]


def split_dataset(scenes: list[SyntheticScene]) -> tuple[list, list]:
    """Train / held-out split: the last tenth of the generated order."""
    n_held = max(1, len(scenes) // 10)
    return scenes[:-n_held], scenes[-n_held:]


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    model: CodecModel
    history: dict[str, list[float]] = field(default_factory=dict)
    heldout: list[SyntheticScene] = field(default_factory=list)


def _target_slice(data: dict[str, np.ndarray], sel: np.ndarray) -> dict[str, np.ndarray]:
    return {
        "occupancy": data["occupancy"][sel],
        "box_offsets": data["box_offsets"][sel],
        "disparity_bins": data["disparity_bins"][sel],
    }


def _guard_finite(value: float, *, phase: int, epoch: int, step: int,
                  history: dict) -> None:
    if not math.isfinite(value):
        tail = {k: v[-3:] for k, v in history.items()}
        raise NumericError(
            f"non-finite loss {value} at phase {phase} epoch {epoch} step {step}",
            snapshot={"phase": phase, "epoch": epoch, "step": step,
                      "recent_epoch_losses": tail},
        )


def pretrain_task(cfg: TrainConfig) -> tuple[dict[str, np.ndarray], list[float]]:
    """Phase-1 only: task pretraining of extractor + head from scratch.

    Returns the trained parameter arrays (extractor/head namespaces) and the
    per-epoch loss history.  Injecting the result into ``run_training`` gives
    bit-identical outcomes to running phase 1 inline, so a lambda sweep can
    share one phase-1 run.
    """
    model = CodecModel(cfg.codec, cfg.scene, seed=cfg.seed)
    scenes, _ = split_dataset(make_dataset(cfg))
    data = collate(scenes)
    history: dict[str, list[float]] = {"phase1": []}
    _run_phase1(model, cfg, data, history)
    params = {
        name: p.value.data.copy()
        for name, p in model.named_parameters()
        if name.startswith(("extractor.", "head."))
    }
    return params, history["phase1"]


def _run_phase1(model: CodecModel, cfg: TrainConfig, data, history) -> None:
    rng_shuffle = np.random.default_rng(np.random.SeedSequence([cfg.seed, 11]))
    params = model.extractor.parameters() + model.head.parameters()
    opt = ad.Adam(params, lr=cfg.base_lr)
    n = data["left"].shape[0]
    bs = cfg.batch_size
    for epoch in range(cfg.phase_epochs[0]):
        order = rng_shuffle.permutation(n)
        losses = []
        for step, start in enumerate(range(0, n - bs + 1, bs)):
            sel = order[start : start + bs]
            left = ad.Tensor(data["left"][sel])
            right = ad.Tensor(data["right"][sel])
            pred = model.task_forward(left, right)
            loss = task_distortion(pred, _target_slice(data, sel))
            value = loss.item()
            _guard_finite(value, phase=1, epoch=epoch, step=step, history=history)
            ad.backward(loss)
            opt.step()
            losses.append(value)
        history["phase1"].append(float(np.mean(losses)))


def run_training(
    cfg: TrainConfig,
    pretrained: tuple[dict[str, np.ndarray], list[float]] | None = None,
    log=None,
) -> TrainResult:
    """Full progressive training; deterministic for identical (cfg, seed)."""
    model = CodecModel(cfg.codec, cfg.scene, seed=cfg.seed)
    scenes = make_dataset(cfg)
    train_scenes, heldout = split_dataset(scenes)
    data = collate(train_scenes)
    history: dict[str, list[float]] = {"phase1": [], "phase2": [], "phase3": []}

    if pretrained is not None:
        params, phase1_history = pretrained
        named = dict(model.named_parameters())
        for name, arr in params.items():
            named[name].value.data[...] = arr
        history["phase1"] = list(phase1_history)
    else:
        _run_phase1(model, cfg, data, history)
    if log:
        log(f"phase 1 done: {history['phase1'][-1:] or 'skipped'}")

    rng_shuffle = np.random.default_rng(np.random.SeedSequence([cfg.seed, 12]))
    rng_noise = np.random.default_rng(np.random.SeedSequence([cfg.seed, 13]))
    n = data["left"].shape[0]
    bs = cfg.batch_size
    steps_per_epoch = len(range(0, n - bs + 1, bs))
    e2, e3 = cfg.phase_epochs[1], cfg.phase_epochs[2]
    total_anneal = max((e2 + e3) * steps_per_epoch, 1)
    anneal_step = 0
    height, width = cfg.scene.height, cfg.scene.width
    pixels_per_view = bs * height * width

    codec_params = model.transform.parameters() + model.prior.parameters()
    opt = ad.Adam(codec_params, lr=cfg.base_lr)
    last_opt = opt

    for phase, epochs in ((2, e2), (3, e3)):
        model.zero_grad()
        if phase == 3:
            opt = ad.Adam(model.parameters(), lr=cfg.base_lr)
            last_opt = opt
        for epoch in range(epochs):
            order = rng_shuffle.permutation(n)
            losses = []
            for step, start in enumerate(range(0, n - bs + 1, bs)):
                sel = order[start : start + bs]
                left = ad.Tensor(data["left"][sel])
                right = ad.Tensor(data["right"][sel])
                pred, bits_l, bits_r = model.train_forward(
                    left, right, rng_noise, freeze_features=(phase == 2)
                )
                d_v = task_distortion(pred, _target_slice(data, sel))
                loss = rd_loss(
                    d_v,
                    ad.scale(bits_l, 1.0 / pixels_per_view),
                    ad.scale(bits_r, 1.0 / pixels_per_view),
                    cfg.lam,
                )
                value = loss.item()
                _guard_finite(value, phase=phase, epoch=epoch, step=step, history=history)
                ad.backward(loss)
                lr = ad.cosine_lr(anneal_step, total_anneal, cfg.base_lr, cfg.final_lr)
                opt.step(lr)
                anneal_step += 1
                losses.append(value)
            history[f"phase{phase}"].append(float(np.mean(losses)))
            if log:
                log(f"phase {phase} epoch {epoch}: loss {history[f'phase{phase}'][-1]:.4f}")

    model.prior.build_cdf_tables()
    ckpt = snapshot(
        model, cfg, phase=3, epoch=e3, optimizer=last_opt
    )
    return TrainResult(checkpoint=ckpt, model=model, history=history, heldout=heldout)
