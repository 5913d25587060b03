"""
Shifts, correlation and target fragments
========================================

Every sample shift used by the learner is a circular shift, so correlation
with all of them at once is a product of spectra.  This walk-through checks
the shift convention and shows how the target is cut into fragments.
"""
import numpy as np

from drtrack import circular_correlate, make_gaussian_label, make_patch_masks, shift_map

rng = np.random.default_rng(0)

# a random 1-channel sample and a filter equal to the sample itself
x = rng.standard_normal((1, 16, 16))


def peak(r):
    return tuple(int(i) for i in np.unravel_index(np.argmax(r), r.shape))


print("autocorrelation peak at", peak(circular_correlate(x, x)))

# a target displaced by (3, 5) gives a response peak at (3, 5)
moved = np.roll(x, (3, 5), axis=(1, 2))
print("peak for content rolled by (3, 5):", peak(circular_correlate(moved, x)))

# shift_map(x, k) reads x(j + k): it brings element k to the origin,
# so shifting the moved sample back by (3, 5) restores the original
print("shift_map undoes the roll:", np.allclose(shift_map(moved, 3, 5), x))

# the regression label is a Gaussian centred on the origin, wrapped around
y = make_gaussian_label(16, 16, 6, 6)
print("label max %.3f at %s" % (y.max(), peak(y)))

# a 6x6 target in a 16x16 window, split into a 3x3 grid of fragments
masks = make_patch_masks(16, 16, 6, 6, grid=(3, 3))
layout = np.zeros((16, 16), dtype=int)
for m, mask in enumerate(masks.masks):
    layout[mask] = m + 1
print("fragment layout (0 = background, fragments numbered from 1):")
print(layout[5:11, 5:11])
print("left column fragments:", masks.column(0), "right column:", masks.column(2))
