"""Training configuration and its line-based key=value file format."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from ..codec.config import CodecConfig
from ..errors import ConfigError
from ..task.scenes import SceneConfig

# rate-distortion tradeoff sweep
LAMBDA_SWEEP = (0.5, 1.0, 4.0, 16.0, 64.0, 256.0)


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 4.0
    phase_epochs: tuple[int, int, int] = (5, 3, 8)
    batch_size: int = 4
    base_lr: float = 1e-3
    final_lr: float = 1e-5
    seed: int = 0
    dataset_size: int = 512
    lambda_index: int = 0
    scene: SceneConfig = field(default_factory=SceneConfig)
    codec: CodecConfig = field(default_factory=CodecConfig)

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if any(e < 0 for e in self.phase_epochs) or len(self.phase_epochs) != 3:
            raise ConfigError(f"phase_epochs must be three nonnegative ints: {self.phase_epochs}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.dataset_size < self.batch_size:
            raise ConfigError("dataset_size must cover at least one batch")
        object.__setattr__(self, "phase_epochs", tuple(int(e) for e in self.phase_epochs))


_TOP_KEYS = {
    "lambda": ("lam", float),
    "epochs_phase1": (None, int),
    "epochs_phase2": (None, int),
    "epochs_phase3": (None, int),
    "batch_size": ("batch_size", int),
    "base_lr": ("base_lr", float),
    "final_lr": ("final_lr", float),
    "seed": ("seed", int),
    "dataset_size": ("dataset_size", int),
    "lambda_index": ("lambda_index", int),
}

_SCENE_FIELDS = {f.name for f in fields(SceneConfig)}
_CODEC_FIELDS = {f.name for f in fields(CodecConfig)}


def _parse_value(raw: str, kind):
    raw = raw.strip()
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def _parse_tuple(raw: str, kind=int) -> tuple:
    return tuple(kind(part) for part in raw.replace(",", " ").split())


def parse_train_config(text: str) -> TrainConfig:
    """Parse a ``key = value`` config; unknown keys are rejected."""
    top: dict = {}
    epochs = {}
    scene_kw: dict = {}
    codec_kw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in _TOP_KEYS:
            attr, kind = _TOP_KEYS[key]
            if key.startswith("epochs_phase"):
                epochs[int(key[-1])] = int(raw)
            else:
                top[attr] = _parse_value(raw, kind)
        elif key.startswith("scene."):
            name = key[len("scene."):]
            if name not in _SCENE_FIELDS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if name in ("object_cells_w", "object_cells_h"):
                scene_kw[name] = _parse_tuple(raw)
            else:
                scene_kw[name] = int(raw)
        elif key.startswith("codec."):
            name = key[len("codec."):]
            if name not in _CODEC_FIELDS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if name in ("feature_channels", "latent_channels", "pyramid_strides",
                        "separate_latent_channels"):
                codec_kw[name] = _parse_tuple(raw)
            elif name == "stage_factor":
                codec_kw[name] = int(raw)
            else:
                codec_kw[name] = raw
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if epochs:
        default = TrainConfig().phase_epochs
        top["phase_epochs"] = tuple(epochs.get(i + 1, default[i]) for i in range(3))
    if scene_kw:
        top["scene"] = SceneConfig(**scene_kw)
    if codec_kw:
        top["codec"] = CodecConfig(**codec_kw)
    return TrainConfig(**top)


def load_train_config(path) -> TrainConfig:
    from pathlib import Path

    return parse_train_config(Path(path).read_text(encoding="utf-8"))


def format_train_config(cfg: TrainConfig) -> str:
    """Render a config back to the key=value format (parse round-trips)."""
    lines = [
        f"lambda = {cfg.lam!r}",
        f"epochs_phase1 = {cfg.phase_epochs[0]}",
        f"epochs_phase2 = {cfg.phase_epochs[1]}",
        f"epochs_phase3 = {cfg.phase_epochs[2]}",
        f"batch_size = {cfg.batch_size}",
        f"base_lr = {cfg.base_lr!r}",
        f"final_lr = {cfg.final_lr!r}",
        f"seed = {cfg.seed}",
        f"dataset_size = {cfg.dataset_size}",
        f"lambda_index = {cfg.lambda_index}",
    ]
    default_scene, default_codec = SceneConfig(), CodecConfig()
    for f in fields(SceneConfig):
        val = getattr(cfg.scene, f.name)
        if val != getattr(default_scene, f.name):
            if isinstance(val, tuple):
                lines.append(f"scene.{f.name} = {' '.join(str(v) for v in val)}")
            else:
                lines.append(f"scene.{f.name} = {val}")
    for f in fields(CodecConfig):
        val = getattr(cfg.codec, f.name)
        if val != getattr(default_codec, f.name):
            if isinstance(val, tuple):
                lines.append(f"codec.{f.name} = {' '.join(str(v) for v in val)}")
            else:
                lines.append(f"codec.{f.name} = {val}")
    return "\n".join(lines) + "\n"


def with_lambda(cfg: TrainConfig, lam: float, lambda_index: int) -> TrainConfig:
    return replace(cfg, lam=lam, lambda_index=lambda_index)
