"""Regression targets, fragment masks and reliability maps."""
from dataclasses import dataclass

import numpy as np

from .errors import BetaOutOfRange, ShapeMismatch, TargetTooSmall

THETA_MIN = 0.5
THETA_MAX = 1.5


def label_sigma(target_h, target_w):
    """Gaussian bandwidth in feature cells for a target of the given cell size."""
    return np.sqrt(target_h * target_w) / 16.0


def wrapped_offsets(n):
    """Signed circular distance of every index in ``range(n)`` from 0."""
    i = np.arange(n)
    return (i + n // 2) % n - n // 2


def make_gaussian_label(H, W, target_h, target_w):
    """Gaussian response peaked at shift (0, 0), wrapped around the grid."""
    if H < 1 or W < 1 or target_h < 1 or target_w < 1:
        raise ValueError("grid and target sizes must be >= 1")
    sigma = label_sigma(target_h, target_w)
    di = wrapped_offsets(H)[:, None]
    dj = wrapped_offsets(W)[None, :]
    return np.exp(-(di ** 2 + dj ** 2) / (2.0 * sigma ** 2))


def _split(n, parts):
    # remainder goes to the outer strips, first edge before last
    base, rem = divmod(n, parts)
    sizes = [base] * parts
    if rem >= 1:
        sizes[0] += 1
    if rem >= 2:
        sizes[-1] += 1
    return sizes


@dataclass(frozen=True)
class PatchMaskSet:
    """Disjoint binary fragment masks tiling the target rectangle.

    ``masks`` has shape ``(M, H, W)``; ``target`` is the union of all masks.
    Fragments are numbered row-major over the grid (left column of a 3x3
    grid is fragments 0, 3, 6).
    """
    masks: np.ndarray
    target: np.ndarray
    grid: tuple

    @property
    def M(self):
        return self.masks.shape[0]

    @property
    def shape(self):
        return self.target.shape

    def column(self, c):
        """Indices of the fragments in grid column ``c``."""
        rows, cols = self.grid
        return [r * cols + c for r in range(rows)]


def make_patch_masks(H, W, target_h, target_w, grid=(3, 3)):
    """Tile a target rectangle centered in an ``H x W`` window with a uniform grid."""
    rows, cols = grid
    if target_h > H or target_w > W:
        raise ShapeMismatch(f"target {target_h}x{target_w} does not fit in {H}x{W}")
    if target_h < rows or target_w < cols:
        raise TargetTooSmall(
            f"target {target_h}x{target_w} cells cannot hold a {rows}x{cols} grid")
    top = (H - target_h) // 2
    left = (W - target_w) // 2
    row_edges = np.cumsum([top] + _split(target_h, rows))
    col_edges = np.cumsum([left] + _split(target_w, cols))

    masks = np.zeros((rows * cols, H, W), dtype=bool)
    for r in range(rows):
        for c in range(cols):
            masks[r * cols + c, row_edges[r]:row_edges[r + 1],
                  col_edges[c]:col_edges[c + 1]] = True
    return PatchMaskSet(masks=masks, target=masks.any(axis=0), grid=(rows, cols))


@dataclass(frozen=True)
class ReliabilityModel:
    beta: np.ndarray
    mask_set: PatchMaskSet
    v: np.ndarray

    def apply(self, h):
        """Diagonal operator V acting on a ``(D, H, W)`` tensor: ``v * h``."""
        return self.v * h


def assemble_reliability(beta, mask_set, theta_min=THETA_MIN, theta_max=THETA_MAX):
    """Build the weight map ``v = sum_m beta_m p^m`` shared by all channels."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (mask_set.M,):
        raise ShapeMismatch(f"need {mask_set.M} weights, got shape {beta.shape}")
    if np.any(beta < theta_min) or np.any(beta > theta_max):
        raise BetaOutOfRange(
            f"weights {beta} leave [{theta_min}, {theta_max}]")
    v = np.tensordot(beta, mask_set.masks.astype(float), axes=1)
    return ReliabilityModel(beta=beta.copy(), mask_set=mask_set, v=v)
