"""Deterministic synthetic tracking sequences with exact ground truth."""
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import TargetLeavesFrame


@dataclass(frozen=True)
class Occlusion:
    """Noise patch over part of the target for frames ``start <= t < stop``.

    ``region`` is ``(x0, y0, x1, y1)`` in fractions of the target box.
    """
    region: tuple
    start: int
    stop: int


@dataclass(frozen=True)
class Deformation:
    """Part of the target whose texture jitters by up to ``amplitude`` px per frame."""
    region: tuple
    start: int
    stop: int
    amplitude: int = 3


@dataclass(frozen=True)
class SynthSpec:
    frame_size: tuple = (160, 120)
    target_size: tuple = (32, 32)
    center: tuple = (80.0, 60.0)
    motion: str = "static"
    velocity: tuple = (0.0, 0.0)
    amplitude: tuple = (0.0, 0.0)
    period: float = 40.0
    scale_rate: float = 1.0
    occlusions: tuple = field(default_factory=tuple)
    deformations: tuple = field(default_factory=tuple)
    seed: int = 0
    noise_sigma: float = 0.0
    length: int = 60
    block: int = 4
    background_contrast: float = 12.0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.motion not in ("static", "velocity", "sinusoidal"):
            raise ValueError(f"unknown motion model {self.motion!r}")


def trajectory(spec):
    """Centers ``(length, 2)`` and scale factors ``(length,)`` per frame."""
    t = np.arange(spec.length, dtype=float)
    c = np.tile(np.asarray(spec.center, dtype=float), (spec.length, 1))
    if spec.motion == "velocity":
        c += t[:, None] * np.asarray(spec.velocity, dtype=float)
    elif spec.motion == "sinusoidal":
        c += np.sin(2 * np.pi * t / spec.period)[:, None] * np.asarray(spec.amplitude, dtype=float)
    return c, spec.scale_rate ** t


def ground_truth(spec):
    """Integer ``(x, y, w, h)`` boxes, 0-based, one per frame."""
    centers, scales = trajectory(spec)
    tw, th = spec.target_size
    boxes = []
    for (cx, cy), s in zip(centers, scales):
        w = max(1, int(round(tw * s)))
        h = max(1, int(round(th * s)))
        x = int(round(cx - w / 2.0))
        y = int(round(cy - h / 2.0))
        boxes.append((x, y, w, h))
    W, H = spec.frame_size
    for t, (x, y, w, h) in enumerate(boxes):
        if x < 0 or y < 0 or x + w > W or y + h > H:
            raise TargetLeavesFrame(f"frame {t}: box {(x, y, w, h)} leaves {W}x{H} frame")
    return np.array(boxes, dtype=float)


def _block_texture(rng, shape, block, low, high):
    h, w = shape
    coarse = rng.uniform(low, high, size=(-(-h // block), -(-w // block)))
    return np.kron(coarse, np.ones((block, block)))[:h, :w]


def _resize_nearest(tex, shape):
    h, w = shape
    ri = np.minimum(((np.arange(h) + 0.5) * tex.shape[0] / h).astype(int), tex.shape[0] - 1)
    ci = np.minimum(((np.arange(w) + 0.5) * tex.shape[1] / w).astype(int), tex.shape[1] - 1)
    return tex[np.ix_(ri, ci)]


def _frac_slice(region, w, h):
    x0, y0, x1, y1 = region
    return (slice(int(round(y0 * h)), int(round(y1 * h))),
            slice(int(round(x0 * w)), int(round(x1 * w))))


def generate(spec):
    """Render ``(frames, boxes)``: uint8 grayscale frames and 0-based boxes."""
    boxes = ground_truth(spec)
    W, H = spec.frame_size
    rng = np.random.default_rng(spec.seed)
    background = ndimage.gaussian_filter(rng.standard_normal((H, W)), 1.5)
    background = 128.0 + spec.background_contrast * background / background.std()
    tw, th = spec.target_size
    texture = _block_texture(rng, (th, tw), spec.block, 20.0, 235.0)

    frames = []
    for t, (x, y, w, h) in enumerate(boxes.astype(int)):
        frng = np.random.default_rng([spec.seed, t])
        frame = background.copy()
        patch = _resize_nearest(texture, (h, w))
        for d in spec.deformations:
            if d.start <= t < d.stop:
                rs, cs = _frac_slice(d.region, w, h)
                di, dj = frng.integers(-d.amplitude, d.amplitude + 1, size=2)
                patch[rs, cs] = np.roll(patch, (di, dj), axis=(0, 1))[rs, cs]
        for o in spec.occlusions:
            if o.start <= t < o.stop:
                rs, cs = _frac_slice(o.region, w, h)
                sub = patch[rs, cs]
                patch[rs, cs] = _block_texture(frng, sub.shape, 2, 0.0, 255.0)
        frame[y:y + h, x:x + w] = patch
        if spec.noise_sigma > 0:
            frame = frame + frng.normal(0.0, spec.noise_sigma, size=frame.shape)
        frames.append(np.clip(np.round(frame), 0, 255).astype(np.uint8))
    return frames, boxes


_SUITE_REGIONS = ((0, 0, 0.5, 1), (0.5, 0, 1, 1), (0, 0, 1, 0.5), (0, 0.5, 1, 1),
                  (0, 0, 0.67, 0.67), (0.33, 0.33, 1, 1))


def ablation_suite(n=10, base_seed=1000):
    """``n`` moving-target sequences, each with a 30-frame partial occlusion and
    a part whose texture jitters from frame 5 onwards.

    Occluded and deforming parts cycle through halves and corners of the
    target; motion alternates between sinusoidal and slow drift.
    """
    specs = []
    for k in range(n):
        rng = np.random.default_rng(base_seed + k)
        start = int(rng.integers(15, 25))
        drift = tuple(rng.uniform(-0.5, 0.5, 2).round(2))
        specs.append(SynthSpec(
            center=(80.0, 60.0),
            motion="sinusoidal" if k % 2 == 0 else "velocity",
            velocity=drift, amplitude=(8.0, 5.0), period=30.0,
            occlusions=(Occlusion(_SUITE_REGIONS[k % 6], start, start + 30),),
            deformations=(Deformation(_SUITE_REGIONS[(k + 3) % 6], 5, 60, 2),),
            seed=base_seed + k, length=60))
    return specs


def format_box(box):
    return ",".join(f"{v:.2f}" for v in box)


def write_boxes(path, boxes):
    """Write 0-based boxes as 1-based ``x,y,w,h`` lines."""
    with open(path, "w") as f:
        for x, y, w, h in boxes:
            f.write(format_box((x + 1, y + 1, w, h)) + "\n")


def read_boxes(path):
    """Read 1-based ``x,y,w,h`` lines (comma, tab or space separated) as 0-based boxes."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            vals = [float(v) for v in line.replace(",", " ").replace("\t", " ").split()]
            if len(vals) != 4:
                raise ValueError(f"expected 4 values per box, got {line!r}")
            rows.append(vals)
    boxes = np.array(rows, dtype=float).reshape(-1, 4)
    boxes[:, :2] -= 1
    return boxes


def write_sequence(frames, boxes, out_dir):
    """Numbered PNG frames plus ``groundtruth.txt`` in ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    for t, frame in enumerate(frames):
        Image.fromarray(frame).save(os.path.join(out_dir, f"{t + 1:04d}.png"))
    write_boxes(os.path.join(out_dir, "groundtruth.txt"), boxes)
