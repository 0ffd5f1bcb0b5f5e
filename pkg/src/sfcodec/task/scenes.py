"""Synthetic rectified-stereo scene generator.

A scene is a textured background plane plus up to a few textured rectangular
objects at distinct depths.  Each layer carries an integer disparity; the
right view renders every layer shifted left by its disparity, painted far to
near, so the right image equals the left warped by the disparity map wherever
unoccluded.  Objects are snapped to the task grid, which makes the occupancy
grid exactly the rasterization of the boxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import autodiff as ad
from ..codec.types import StereoPair
from ..errors import ConfigError


@dataclass(frozen=True)
class SceneConfig:
    height: int = 64
    width: int = 256
    grid_stride: int = 16
    disparity_bins: int = 16
    min_objects: int = 1
    max_objects: int = 4
    background_disparity: int = 1
    object_disparity_min: int = 3
    object_disparity_max: int = 13
    object_cells_w: tuple[int, int] = (1, 3)
    object_cells_h: tuple[int, int] = (1, 2)
    texture_cell: int = 8

    def __post_init__(self):
        if self.height % self.grid_stride or self.width % self.grid_stride:
            raise ConfigError(
                f"scene dims {self.height}x{self.width} must be divisible by "
                f"grid stride {self.grid_stride}"
            )
        if not 0 <= self.min_objects <= self.max_objects:
            raise ConfigError("need 0 <= min_objects <= max_objects")
        if not (0 <= self.background_disparity < self.object_disparity_min
                <= self.object_disparity_max):
            raise ConfigError("need background < object disparities, all nonnegative")
        if self.object_disparity_max >= self.disparity_bins:
            raise ConfigError("disparity_bins must exceed the largest disparity")
        span = self.object_disparity_max - self.object_disparity_min + 1
        if self.max_objects > span:
            raise ConfigError("not enough distinct disparities for max_objects")

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.height // self.grid_stride, self.width // self.grid_stride


@dataclass(frozen=True)
class Box:
    """Axis-aligned object box; center/extent in grid-cell units."""

    cx: float
    cy: float
    w: float
    h: float
    disparity: int


@dataclass
class SyntheticScene:
    pair: StereoPair
    disparity: np.ndarray        # (1,1,H,W) float32, left-view pixels
    occupancy: np.ndarray        # (1,1,Hg,Wg) float32 in {0,1}
    box_offsets: np.ndarray      # (1,4,Hg,Wg) float32: dx,dy,log w,log h
    disparity_bins: np.ndarray   # (1,Hg,Wg) int32 bin indices
    boxes: list[Box] = field(default_factory=list)
    seed: int = 0
    config: SceneConfig = field(default_factory=SceneConfig)


def _smooth_noise(rng: np.random.Generator, h: int, w: int, cell: int) -> np.ndarray:
    """(3,h,w) texture in [0,1]: coarse uniform noise, bilinearly upsampled."""
    gh, gw = h // cell + 2, w // cell + 2
    grid = rng.random((3, gh, gw))
    ys = (np.arange(h) + 0.5) / cell
    xs = (np.arange(w) + 0.5) / cell
    y0 = np.clip(ys.astype(int), 0, gh - 2)
    x0 = np.clip(xs.astype(int), 0, gw - 2)
    fy = (ys - y0)[None, :, None]
    fx = (xs - x0)[None, None, :]
    g00 = grid[:, y0][:, :, x0]
    g01 = grid[:, y0][:, :, x0 + 1]
    g10 = grid[:, y0 + 1][:, :, x0]
    g11 = grid[:, y0 + 1][:, :, x0 + 1]
    top = g00 * (1 - fx) + g01 * fx
    bot = g10 * (1 - fx) + g11 * fx
    return (top * (1 - fy) + bot * fy).astype(np.float32)


def generate_scene(seed: int, cfg: SceneConfig | None = None) -> SyntheticScene:
    """Deterministic scene for (seed, cfg)."""
    cfg = cfg or SceneConfig()
    rng = np.random.default_rng(seed)
    hh, ww = cfg.height, cfg.width
    s = cfg.grid_stride
    hg, wg = cfg.grid_shape
    dmax = cfg.object_disparity_max

    left = np.zeros((3, hh, ww), dtype=np.float32)
    right = np.zeros((3, hh, ww), dtype=np.float32)
    disparity = np.zeros((hh, ww), dtype=np.float32)
    occupancy = np.zeros((hg, wg), dtype=np.float32)
    offsets = np.zeros((4, hg, wg), dtype=np.float32)

    def paint_object(tex: np.ndarray, x0: int, x1: int, y0: int, y1: int, d: int) -> None:
        # the surface at left-view column u shows at right-view column u-d,
        # so right[y,x] = left[y,x+d] wherever the layer is visible
        left[:, y0:y1, x0:x1] = tex
        rs = max(0, x0 - d)
        right[:, y0:y1, rs : x1 - d] = tex[:, :, rs + d - x0 :]
        disparity[y0:y1, x0:x1] = d

    # background surface extends dmax columns past the left frame so the right
    # view is fully covered
    bg = _smooth_noise(rng, hh, ww + dmax, cfg.texture_cell)
    d_bg = cfg.background_disparity
    left[:] = bg[:, :, :ww]
    right[:] = bg[:, :, d_bg : ww + d_bg]
    disparity[:] = d_bg

    n_obj = int(rng.integers(cfg.min_objects, cfg.max_objects + 1))
    disparities = rng.choice(
        np.arange(cfg.object_disparity_min, cfg.object_disparity_max + 1),
        size=n_obj,
        replace=False,
    )
    disparities = np.sort(disparities)  # paint far (small d) to near (large d)
    boxes: list[Box] = []
    for d in disparities:
        wc = int(rng.integers(cfg.object_cells_w[0], cfg.object_cells_w[1] + 1))
        hc = int(rng.integers(cfg.object_cells_h[0], cfg.object_cells_h[1] + 1))
        wc, hc = min(wc, wg), min(hc, hg)
        gx = int(rng.integers(0, wg - wc + 1))
        gy = int(rng.integers(0, hg - hc + 1))
        x0, x1 = gx * s, (gx + wc) * s
        y0, y1 = gy * s, (gy + hc) * s
        tex = _smooth_noise(rng, y1 - y0, x1 - x0, cfg.texture_cell)
        paint_object(tex, x0, x1, y0, y1, int(d))
        box = Box(cx=gx + wc / 2.0, cy=gy + hc / 2.0, w=float(wc), h=float(hc),
                  disparity=int(d))
        boxes.append(box)
        occupancy[gy : gy + hc, gx : gx + wc] = 1.0
        jj, ii = np.meshgrid(np.arange(gx, gx + wc), np.arange(gy, gy + hc))
        offsets[0, gy : gy + hc, gx : gx + wc] = box.cx - (jj + 0.5)
        offsets[1, gy : gy + hc, gx : gx + wc] = box.cy - (ii + 0.5)
        offsets[2, gy : gy + hc, gx : gx + wc] = np.log(box.w)
        offsets[3, gy : gy + hc, gx : gx + wc] = np.log(box.h)

    centers = disparity[s // 2 :: s, s // 2 :: s]
    bins = np.clip(np.rint(centers), 0, cfg.disparity_bins - 1).astype(np.int32)

    pair = StereoPair(left=ad.Tensor(left[None]), right=ad.Tensor(right[None]))
    return SyntheticScene(
        pair=pair,
        disparity=disparity[None, None],
        occupancy=occupancy[None, None],
        box_offsets=offsets[None],
        disparity_bins=bins[None],
        boxes=boxes,
        seed=seed,
        config=cfg,
    )


def rasterize_boxes(boxes: list[Box], grid_shape: tuple[int, int]) -> np.ndarray:
    """Union of box footprints on the task grid (independent of the generator)."""
    hg, wg = grid_shape
    grid = np.zeros((hg, wg), dtype=np.float32)
    for b in boxes:
        x0 = int(round(b.cx - b.w / 2))
        x1 = int(round(b.cx + b.w / 2))
        y0 = int(round(b.cy - b.h / 2))
        y1 = int(round(b.cy + b.h / 2))
        grid[max(0, y0) : min(hg, y1), max(0, x0) : min(wg, x1)] = 1.0
    return grid


def export_scene(scene: SyntheticScene, out_dir, fmt: str = "png") -> dict[str, Path]:
    """Write left/right images plus a box/disparity sidecar for inspection."""
    from PIL import Image

    if fmt not in ("png", "ppm"):
        raise ConfigError(f"unsupported image format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, tensor in (("left", scene.pair.left), ("right", scene.pair.right)):
        arr = (np.clip(tensor.data[0], 0.0, 1.0) * 255.0).round().astype(np.uint8)
        img = Image.fromarray(arr.transpose(1, 2, 0))
        path = out_dir / f"{name}.{fmt}"
        img.save(path)
        paths[name] = path
    sidecar = out_dir / "boxes.txt"
    lines = [f"{b.cx:g} {b.cy:g} {b.w:g} {b.h:g} {b.disparity}" for b in scene.boxes]
    disp = scene.disparity
    lines.append(
        f"# disparity min={disp.min():g} max={disp.max():g} mean={disp.mean():.4f}"
    )
    sidecar.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths["boxes"] = sidecar
    return paths


def collate(scenes: list[SyntheticScene]) -> dict[str, np.ndarray]:
    """Stack scene inputs and targets along the batch axis."""
    return {
        "left": np.concatenate([s.pair.left.data for s in scenes]),
        "right": np.concatenate([s.pair.right.data for s in scenes]),
        "occupancy": np.concatenate([s.occupancy for s in scenes]),
        "box_offsets": np.concatenate([s.box_offsets for s in scenes]),
        "disparity_bins": np.concatenate([s.disparity_bins for s in scenes]),
    }
