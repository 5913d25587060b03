import numpy as np
import pytest

from drtrack.errors import ImaginaryResidue, ShapeMismatch
from drtrack.fourier import circular_correlate, fft2, ifft2, shift_map
from oracles import brute_correlate


def test_matches_direct_summation():
    rng = np.random.default_rng(0)
    for D, H, W in [(1, 4, 4), (2, 3, 5), (3, 6, 2)]:
        x, w = rng.standard_normal((2, D, H, W))
        np.testing.assert_allclose(circular_correlate(x, w), brute_correlate(x, w), atol=1e-12)


def test_delta_filter_recovers_features():
    x = np.arange(12.0).reshape(1, 3, 4)
    delta = np.zeros_like(x)
    delta[0, 0, 0] = 1.0
    np.testing.assert_allclose(circular_correlate(x, delta), x[0], atol=1e-12)


def test_displaced_target_peaks_at_displacement():
    rng = np.random.default_rng(1)
    w = rng.standard_normal((2, 8, 8))
    x = shift_map(w, -2, 3)  # target moved by (+2, -3)
    r = circular_correlate(x, w)
    i, j = np.unravel_index(np.argmax(r), r.shape)
    assert (i, j) == (2, 8 - 3)
    # the shift map itself: element k moves to the origin
    assert shift_map(w, 2, 1)[0, 0, 0] == w[0, 2, 1]


def test_constant_maps():
    x = np.ones((1, 3, 3))
    np.testing.assert_allclose(circular_correlate(x, x), np.full((3, 3), 9.0))


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        circular_correlate(np.zeros((1, 4, 4)), np.zeros((1, 4, 5)))


def test_bare_map_is_one_channel():
    rng = np.random.default_rng(2)
    x, w = rng.standard_normal((2, 5, 5))
    np.testing.assert_allclose(circular_correlate(x, w), circular_correlate(x[None], w[None]))


def test_imaginary_residue_detected():
    s = fft2(np.random.default_rng(3).standard_normal((4, 4)))
    s[0, 1] += 5j
    with pytest.raises(ImaginaryResidue):
        ifft2(s)
    assert ifft2(s, check=False).dtype == float


def test_round_trip():
    x = np.random.default_rng(4).standard_normal((2, 6, 7))
    np.testing.assert_allclose(ifft2(fft2(x)), x, atol=1e-12)
