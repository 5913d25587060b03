"""Hand-crafted features of an image region.

A region is resampled to a fixed pixel grid (bilinear, edge replication
outside the image) and described per ``cell_size`` x ``cell_size`` cell by
31 gradient-histogram channels (18 signed orientations, 9 unsigned, 4
texture energies) plus one mean-intensity channel.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateRegion

N_HOG = 31
N_CHANNELS = N_HOG + 1
_SIGNED_BINS = 18
_TRUNC = 0.2
_EPS = 1e-4


@dataclass(frozen=True)
class RegionSpec:
    """Search region around ``center`` (x, y) px for a target of ``target_size`` (w, h) px.

    ``padding`` is the ratio of region area to target area; ``scale`` grows
    the sampled area while keeping the output grid fixed.
    """
    center: tuple
    target_size: tuple
    padding: float = 4.0
    scale: float = 1.0

    def grid_cells(self, cell_size):
        """Output size (rows, cols) in cells, independent of ``scale``."""
        side = np.sqrt(self.padding)
        w, h = self.target_size
        rows = int(round(side * h / cell_size))
        cols = int(round(side * w / cell_size))
        if rows < 1 or cols < 1 or self.scale <= 0:
            raise DegenerateRegion(
                f"region for target {self.target_size} is below one {cell_size}px cell")
        return rows, cols


def to_gray(img):
    img = np.asarray(img, dtype=float)
    if img.ndim == 3:
        return img[..., :3] @ np.array([0.299, 0.587, 0.114])
    return img


def sample_region(img, center, size_px, scale, border=0):
    """Bilinear resample of a ``size_px`` (rows, cols) grid, spaced ``scale`` px apart.

    Pixel ``i`` covers ``[i, i+1)`` so its center is at ``i + 0.5``.  ``border``
    extra samples are taken on every side.  Returns float array with the
    image's channel layout.
    """
    rows, cols = size_px
    cx, cy = center
    ii = np.arange(-border, rows + border)
    jj = np.arange(-border, cols + border)
    ys = cy + (ii + 0.5 - rows / 2.0) * scale - 0.5
    xs = cx + (jj + 0.5 - cols / 2.0) * scale - 0.5
    coords = np.meshgrid(ys, xs, indexing="ij")
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        return ndimage.map_coordinates(img, coords, order=1, mode="nearest")
    return np.stack([ndimage.map_coordinates(img[..., c], coords, order=1, mode="nearest")
                     for c in range(img.shape[2])], axis=-1)


def _gradients(patch):
    """Central-difference gradients of the interior; colour keeps the strongest channel."""
    if patch.ndim == 2:
        patch = patch[..., None]
    dx = 0.5 * (patch[1:-1, 2:] - patch[1:-1, :-2])
    dy = 0.5 * (patch[2:, 1:-1] - patch[:-2, 1:-1])
    mag2 = dx ** 2 + dy ** 2
    best = np.argmax(mag2, axis=-1)[..., None]
    dx = np.take_along_axis(dx, best, -1)[..., 0]
    dy = np.take_along_axis(dy, best, -1)[..., 0]
    return dx, dy


def _cell_histograms(dx, dy, cell_size):
    rows, cols = dx.shape[0] // cell_size, dx.shape[1] // cell_size
    mag = np.hypot(dx, dy)
    ang = np.mod(np.arctan2(dy, dx), 2 * np.pi) * (_SIGNED_BINS / (2 * np.pi))
    lo = np.floor(ang).astype(int) % _SIGNED_BINS
    hi = (lo + 1) % _SIGNED_BINS
    frac = ang - np.floor(ang)

    ci = (np.arange(dx.shape[0]) // cell_size)[:, None]
    cj = (np.arange(dx.shape[1]) // cell_size)[None, :]
    cell = np.broadcast_to(ci * cols + cj, dx.shape)
    n = rows * cols * _SIGNED_BINS
    hist = np.bincount((cell * _SIGNED_BINS + lo).ravel(),
                       weights=(mag * (1 - frac)).ravel(), minlength=n)
    hist += np.bincount((cell * _SIGNED_BINS + hi).ravel(),
                        weights=(mag * frac).ravel(), minlength=n)
    return hist.reshape(rows, cols, _SIGNED_BINS)


def gradient_histogram_features(dx, dy, cell_size):
    """31-channel normalized orientation histograms, returned as ``(31, rows, cols)``."""
    signed = _cell_histograms(dx, dy, cell_size)
    half = _SIGNED_BINS // 2
    unsigned = signed[..., :half] + signed[..., half:]
    energy = np.pad(np.sum(unsigned ** 2, axis=-1), 1, mode="edge")

    rows, cols = signed.shape[:2]
    sens = np.zeros_like(signed)
    insens = np.zeros_like(unsigned)
    texture = []
    for di in (0, 1):
        for dj in (0, 1):
            # 2x2 cell block touching each cell from one diagonal direction
            block = (energy[di:di + rows, dj:dj + cols]
                     + energy[di + 1:di + 1 + rows, dj:dj + cols]
                     + energy[di:di + rows, dj + 1:dj + 1 + cols]
                     + energy[di + 1:di + 1 + rows, dj + 1:dj + 1 + cols])
            norm = 1.0 / np.sqrt(block + _EPS)
            s = np.minimum(signed * norm[..., None], _TRUNC)
            sens += s
            insens += np.minimum(unsigned * norm[..., None], _TRUNC)
            texture.append(0.2357 * s.sum(axis=-1))
    feats = np.concatenate([0.5 * sens, 0.5 * insens, np.stack(texture, -1)], axis=-1)
    return np.moveaxis(feats, -1, 0)


def block_mean(a, cell_size):
    r, c = a.shape[0] // cell_size, a.shape[1] // cell_size
    return a[:r * cell_size, :c * cell_size].reshape(r, cell_size, c, cell_size).mean(axis=(1, 3))


def extract_features(img, spec, cell_size=4):
    """Feature tensor ``(32, rows, cols)`` for the region described by ``spec``."""
    if cell_size < 1:
        raise ValueError("cell_size must be >= 1")
    rows, cols = spec.grid_cells(cell_size)
    size_px = (rows * cell_size, cols * cell_size)
    patch = sample_region(img, spec.center, size_px, spec.scale, border=1)
    dx, dy = _gradients(patch)
    hog = gradient_histogram_features(dx, dy, cell_size)
    gray = to_gray(patch[1:-1, 1:-1])
    intensity = block_mean(gray / 255.0 - 0.5, cell_size)
    return np.concatenate([hog, intensity[None]], axis=0)


def hann_window(rows, cols):
    return np.outer(np.hanning(rows), np.hanning(cols))


def apply_window(t):
    t = np.asarray(t, dtype=float)
    return t * hann_window(*t.shape[-2:])
