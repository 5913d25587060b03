import numpy as np
import pytest

from drtrack.errors import BetaOutOfRange, ShapeMismatch, TargetTooSmall
from drtrack.labels import (assemble_reliability, label_sigma, make_gaussian_label,
                            make_patch_masks)


@pytest.mark.parametrize("H,W", [(1, 1), (5, 5), (8, 6), (7, 10)])
def test_label_peak(H, W):
    assert make_gaussian_label(H, W, 3, 3)[0, 0] == 1.0


def test_label_first_offset():
    y = make_gaussian_label(10, 12, 4, 9)
    s = label_sigma(4, 9)
    assert s == pytest.approx(6 / 16)
    assert y[1, 0] == pytest.approx(np.exp(-1 / (2 * s * s)), rel=1e-14)
    assert y[0, 1] == y[1, 0]


def test_label_circular_symmetry():
    y = make_gaussian_label(8, 6, 5, 4)
    i, j = np.mgrid[0:8, 0:6]
    assert np.array_equal(y, y[(8 - i) % 8, (6 - j) % 6])
    assert np.all((y > 0) & (y <= 1))


def test_masks_exact_division():
    ms = make_patch_masks(10, 10, 6, 6)
    assert ms.M == 9
    assert all(m.sum() == 4 for m in ms.masks)
    for m in ms.masks:
        r, c = np.nonzero(m)
        assert np.ptp(r) == 1 and np.ptp(c) == 1


def test_masks_partition_with_remainder():
    ms = make_patch_masks(11, 11, 7, 7)
    sizes = ms.masks.sum(axis=(1, 2))
    assert sizes.sum() == 49
    assert np.array_equal(ms.masks.sum(axis=0), ms.target.astype(int))
    assert np.all(ms.masks.sum(axis=0) <= 1)
    assert np.all(sizes > 0)
    # interior patch keeps the base size, edge patches take the extra cells
    assert sizes[4] == 4 and sizes.max() == 9


def test_masks_target_centered():
    ms = make_patch_masks(12, 16, 6, 8)
    r, c = np.nonzero(ms.target)
    assert (r.min(), r.max(), c.min(), c.max()) == (3, 8, 4, 11)


def test_masks_errors():
    with pytest.raises(TargetTooSmall):
        make_patch_masks(8, 8, 2, 2)
    with pytest.raises(ShapeMismatch):
        make_patch_masks(4, 4, 6, 6)


def test_reliability_all_ones_is_indicator():
    ms = make_patch_masks(9, 9, 6, 6)
    rel = assemble_reliability(np.ones(9), ms)
    assert np.array_equal(rel.v, ms.target.astype(float))
    h = np.random.default_rng(0).standard_normal((3, 9, 9))
    np.testing.assert_array_equal(rel.apply(h), h * ms.target)


def test_reliability_ramp():
    ms = make_patch_masks(9, 9, 7, 7)
    beta = np.linspace(0.5, 1.5, 9)
    rel = assemble_reliability(beta, ms)
    for m in range(9):
        assert np.all(rel.v[ms.masks[m]] == beta[m])
    assert np.all(rel.v[~ms.target] == 0)


def test_reliability_range():
    ms = make_patch_masks(9, 9, 6, 6)
    beta = np.ones(9)
    beta[3] = 1.6
    with pytest.raises(BetaOutOfRange):
        assemble_reliability(beta, ms)
    beta[3] = 1.5  # bounds are inclusive
    assemble_reliability(beta, ms)
    with pytest.raises(ShapeMismatch):
        assemble_reliability(np.ones(4), ms)


def test_column_indices():
    ms = make_patch_masks(9, 9, 6, 6)
    assert ms.column(0) == [0, 3, 6]
    assert ms.column(2) == [2, 5, 8]
