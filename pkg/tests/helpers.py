"""Random problem instances shared by the learning tests."""
import numpy as np

from drtrack.labels import make_gaussian_label, make_patch_masks
from drtrack.learning import TrainingSet


def random_instance(rng, T=2, D=2, H=4, W=4, target=(2, 2), grid=(2, 2)):
    feats = rng.standard_normal((T, D, H, W))
    weights = rng.uniform(0.2, 1.0, T)
    weights /= weights.sum()
    label = make_gaussian_label(H, W, *target)
    masks = make_patch_masks(H, W, *target, grid=grid)
    ts = TrainingSet(feats, weights, label)
    return ts, masks


def random_shape(rng, max_k=16):
    """(D, H, W, target, grid) with D <= 2 and H*W <= max_k."""
    while True:
        H, W = rng.integers(1, 6, size=2)
        if H * W <= max_k and H * W >= 2:
            break
    D = int(rng.integers(1, 3))
    th, tw = int(rng.integers(1, H + 1)), int(rng.integers(1, W + 1))
    grid = (int(rng.integers(1, th + 1)), int(rng.integers(1, tw + 1)))
    return D, int(H), int(W), (th, tw), grid
