"""Checkpoint snapshot and its binary file format (.smfw).

Layout, all integers little-endian::

    "SMFW" | version u8 | model-hash 16B |
    parameter table: count u32, then per tensor
        name-length u16 | UTF-8 name | rank u8 | dims u32 each | f32 LE data |
    optimizer-state block (same tensor-table encoding) | CRC32 u32

The optimizer block also carries the phase/epoch cursor and a numeric echo of
the full training config under ``meta.*`` names, so a checkpoint alone can
rebuild its model.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..codec.config import CodecConfig, VARIANT_NAMES
from ..errors import CorruptionError, TruncationError, VersioningError
from ..model import CodecModel
from ..task.scenes import SceneConfig
from .config import TrainConfig

MAGIC = b"SMFW"
VERSION = 1
FILE_EXTENSION = ".smfw"
_CRC = struct.Struct("<I")


def _f(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float32)


def _encode_text(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-8"), dtype=np.uint8).astype(np.float32)


def _decode_text(arr: np.ndarray) -> str:
    return bytes(arr.astype(np.uint8)).decode("utf-8")


def _split_int(v: int) -> np.ndarray:
    """Encode a non-negative int < 2^48 exactly in two float32 halves."""
    return _f([v >> 24, v & 0xFFFFFF])


def _join_int(arr: np.ndarray) -> int:
    return (int(arr[0]) << 24) | int(arr[1])


@dataclass
class Checkpoint:
    train_config: TrainConfig
    params: dict[str, np.ndarray]
    opt_state: dict[str, np.ndarray] = field(default_factory=dict)
    phase: int = 0
    epoch: int = 0
    head_width: int = 32
    prior_filters: tuple[int, ...] = (3, 3, 3)

    @property
    def model_hash(self) -> bytes:
        h = hashlib.md5()
        h.update(self.train_config.codec.config_id.encode())
        for name, arr in self.params.items():
            h.update(name.encode())
            h.update(arr.tobytes())
        return h.digest()

    def build_model(self) -> CodecModel:
        model = CodecModel(
            codec_config=self.train_config.codec,
            scene_config=self.train_config.scene,
            seed=self.train_config.seed,
            head_width=self.head_width,
            prior_filters=self.prior_filters,
        )
        self.load_into(model)
        model.prior.build_cdf_tables()
        return model

    def load_into(self, model: CodecModel) -> None:
        model_names = dict(model.named_parameters())
        if set(model_names) != set(self.params):
            missing = sorted(set(model_names) - set(self.params))[:3]
            extra = sorted(set(self.params) - set(model_names))[:3]
            raise VersioningError(
                f"checkpoint does not match model: missing {missing}, extra {extra}"
            )
        for name, arr in self.params.items():
            p = model_names[name]
            if p.value.shape != arr.shape:
                raise VersioningError(
                    f"parameter {name}: checkpoint shape {arr.shape} != model "
                    f"shape {p.value.shape}"
                )
            p.value.data[...] = arr


def snapshot(
    model: CodecModel,
    train_config: TrainConfig,
    phase: int = 0,
    epoch: int = 0,
    optimizer=None,
) -> Checkpoint:
    params = {name: p.value.data.copy() for name, p in model.named_parameters()}
    opt_state: dict[str, np.ndarray] = {}
    if optimizer is not None:
        opt_state["adam.t"] = _f([optimizer.t])
        for p in optimizer.params:
            m, v = optimizer.state[id(p)]
            opt_state[f"adam.m.{p.name}"] = m.copy()
            opt_state[f"adam.v.{p.name}"] = v.copy()
    return Checkpoint(
        train_config=train_config,
        params=params,
        opt_state=opt_state,
        phase=phase,
        epoch=epoch,
        head_width=model.head_width,
        prior_filters=model.prior_filters,
    )


# -- meta echo -------------------------------------------------------------------


def _meta_entries(ckpt: Checkpoint) -> dict[str, np.ndarray]:
    cfg = ckpt.train_config
    sc, cc = cfg.scene, cfg.codec
    from ..codec.config import VARIANT_CODES

    return {
        "meta.phase": _f([ckpt.phase]),
        "meta.epoch": _f([ckpt.epoch]),
        "meta.train.lambda": _f([cfg.lam]),
        "meta.train.lambda_index": _f([cfg.lambda_index]),
        "meta.train.epochs": _f(cfg.phase_epochs),
        "meta.train.batch_size": _f([cfg.batch_size]),
        "meta.train.base_lr": _f([cfg.base_lr]),
        "meta.train.final_lr": _f([cfg.final_lr]),
        "meta.train.seed": _split_int(cfg.seed),
        "meta.train.dataset_size": _f([cfg.dataset_size]),
        "meta.scene.dims": _f([sc.height, sc.width, sc.grid_stride, sc.disparity_bins]),
        "meta.scene.objects": _f([
            sc.min_objects, sc.max_objects, sc.background_disparity,
            sc.object_disparity_min, sc.object_disparity_max,
            *sc.object_cells_w, *sc.object_cells_h, sc.texture_cell,
        ]),
        "meta.codec.feature_channels": _f(cc.feature_channels),
        "meta.codec.latent_channels": _f(cc.latent_channels),
        "meta.codec.pyramid_strides": _f(cc.pyramid_strides),
        "meta.codec.stage_factor": _f([cc.stage_factor]),
        "meta.codec.variant": _f([VARIANT_CODES[cc.variant]]),
        "meta.codec.separate_latent_channels": _f(cc.separate_latent_channels),
        "meta.codec.interaction": _encode_text(cc.interaction),
        "meta.model.head_width": _f([ckpt.head_width]),
        "meta.model.prior_filters": _f(ckpt.prior_filters),
    }


def _config_from_meta(meta: dict[str, np.ndarray]) -> tuple[TrainConfig, int, int, int, tuple]:
    dims = meta["meta.scene.dims"]
    obj = meta["meta.scene.objects"]
    scene = SceneConfig(
        height=int(dims[0]), width=int(dims[1]), grid_stride=int(dims[2]),
        disparity_bins=int(dims[3]),
        min_objects=int(obj[0]), max_objects=int(obj[1]),
        background_disparity=int(obj[2]),
        object_disparity_min=int(obj[3]), object_disparity_max=int(obj[4]),
        object_cells_w=(int(obj[5]), int(obj[6])),
        object_cells_h=(int(obj[7]), int(obj[8])),
        texture_cell=int(obj[9]),
    )
    codec = CodecConfig(
        feature_channels=tuple(int(v) for v in meta["meta.codec.feature_channels"]),
        latent_channels=tuple(int(v) for v in meta["meta.codec.latent_channels"]),
        pyramid_strides=tuple(int(v) for v in meta["meta.codec.pyramid_strides"]),
        stage_factor=int(meta["meta.codec.stage_factor"][0]),
        variant=VARIANT_NAMES[int(meta["meta.codec.variant"][0])],
        separate_latent_channels=tuple(
            int(v) for v in meta["meta.codec.separate_latent_channels"]
        ),
        interaction=_decode_text(meta["meta.codec.interaction"]),
    )
    cfg = TrainConfig(
        lam=float(meta["meta.train.lambda"][0]),
        phase_epochs=tuple(int(v) for v in meta["meta.train.epochs"]),
        batch_size=int(meta["meta.train.batch_size"][0]),
        base_lr=float(meta["meta.train.base_lr"][0]),
        final_lr=float(meta["meta.train.final_lr"][0]),
        seed=_join_int(meta["meta.train.seed"]),
        dataset_size=int(meta["meta.train.dataset_size"][0]),
        lambda_index=int(meta["meta.train.lambda_index"][0]),
        scene=scene,
        codec=codec,
    )
    phase = int(meta["meta.phase"][0])
    epoch = int(meta["meta.epoch"][0])
    head_width = int(meta["meta.model.head_width"][0])
    prior_filters = tuple(int(v) for v in meta["meta.model.prior_filters"])
    return cfg, phase, epoch, head_width, prior_filters


# -- binary io --------------------------------------------------------------------


def _pack_table(tensors: dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<I", len(tensors))]
    for name, arr in tensors.items():
        nb = name.encode("utf-8")
        arr32 = np.ascontiguousarray(arr, dtype="<f4")
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<B", arr32.ndim))
        for d in arr32.shape:
            parts.append(struct.pack("<I", d))
        parts.append(arr32.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncationError("checkpoint file ended prematurely")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def _unpack_table(reader: _Reader) -> dict[str, np.ndarray]:
    count = reader.u32()
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.take(reader.u16()).decode("utf-8")
        rank = reader.u8()
        shape = tuple(reader.u32() for _ in range(rank))
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(reader.take(4 * n), dtype="<f4").reshape(shape).copy()
        out[name] = arr
    return out


def save_checkpoint(ckpt: Checkpoint, path) -> Path:
    path = Path(path)
    opt = dict(ckpt.opt_state)
    opt.update(_meta_entries(ckpt))
    body = (
        MAGIC
        + struct.pack("<B", VERSION)
        + ckpt.model_hash
        + _pack_table(ckpt.params)
        + _pack_table(opt)
    )
    crc = zlib.crc32(body[len(MAGIC):])
    path.write_bytes(body + _CRC.pack(crc))
    return path


def load_checkpoint(path) -> Checkpoint:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 1 + 16 + _CRC.size:
        raise TruncationError(f"{path}: too short to be a checkpoint")
    if data[:4] != MAGIC:
        raise CorruptionError(f"{path}: bad magic {data[:4]!r}")
    stored_crc = _CRC.unpack(data[-4:])[0]
    if zlib.crc32(data[4:-4]) != stored_crc:
        raise CorruptionError(f"{path}: CRC mismatch")
    reader = _Reader(data[:-4], pos=4)
    version = reader.u8()
    if version != VERSION:
        raise VersioningError(f"{path}: unsupported checkpoint version {version}")
    stored_hash = reader.take(16)
    params = _unpack_table(reader)
    opt = _unpack_table(reader)
    meta = {k: v for k, v in opt.items() if k.startswith("meta.")}
    opt_state = {k: v for k, v in opt.items() if not k.startswith("meta.")}
    try:
        cfg, phase, epoch, head_width, prior_filters = _config_from_meta(meta)
    except KeyError as e:
        raise CorruptionError(f"{path}: missing config echo entry {e}") from None
    ckpt = Checkpoint(
        train_config=cfg,
        params=params,
        opt_state=opt_state,
        phase=phase,
        epoch=epoch,
        head_width=head_width,
        prior_filters=prior_filters,
    )
    if ckpt.model_hash != stored_hash:
        raise CorruptionError(
            f"{path}: model hash mismatch (stored {stored_hash.hex()}, "
            f"recomputed {ckpt.model_hash.hex()})"
        )
    return ckpt
