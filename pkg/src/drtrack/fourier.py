"""Multi-channel 2-D transforms and circular correlation.

Feature tensors are float arrays shaped ``(D, H, W)``; spectra are complex
arrays of the same shape.  Transforms act on the last two axes, so any
leading batch dimensions are carried through unchanged.

Shift convention: the k-step shift of ``x`` is the map with element ``k``
moved to the origin, ``x_k(j) = x(j + k)`` (indices taken modulo the grid).
The response of filter ``w`` on ``x`` is therefore

    r(k) = sum_d sum_j x_d(j + k) w_d(j)

and a target displaced by ``(di, dj)`` relative to the filter peaks at
index ``(di, dj)``.
"""
import os

import numpy as np
import scipy.fft

from .errors import ImaginaryResidue, ShapeMismatch

_RESIDUE_TOL = 1e-10


def _workers():
    n = os.environ.get("DRT_THREADS")
    if not n:
        return None
    return max(1, int(n))


def fft2(t):
    """Unnormalized forward 2-D DFT of every channel."""
    t = np.asarray(t, dtype=float)
    if t.ndim < 2 or min(t.shape[-2:]) < 1:
        raise ShapeMismatch(f"expected (..., H, W) with H, W >= 1, got {t.shape}")
    return scipy.fft.fft2(t, axes=(-2, -1), workers=_workers())


def ifft2(s, check=True):
    """Inverse 2-D DFT (divides by K = H*W) returning a real array.

    A spectrum coming from real data is conjugate symmetric, so its inverse is
    real up to rounding.  Anything larger than that is treated as an upstream
    bug and raises :class:`ImaginaryResidue`.
    """
    out = scipy.fft.ifft2(s, axes=(-2, -1), workers=_workers())
    if check:
        scale = np.abs(out).max(initial=0.0)
        resid = np.abs(out.imag).max(initial=0.0)
        if resid > _RESIDUE_TOL * scale:
            raise ImaginaryResidue(
                f"imaginary residue {resid:.3e} exceeds {_RESIDUE_TOL:g} x {scale:.3e}")
    return np.ascontiguousarray(out.real)


def correlate_spectra(xf, wf):
    """Fourier-domain response ``sum_d xf_d * conj(wf_d)`` (not inverted)."""
    return np.sum(xf * np.conj(wf), axis=-3)


def circular_correlate(x, w):
    """Response map of filter ``w`` on features ``x``, summed over channels.

    Both inputs are ``(D, H, W)`` (a bare ``(H, W)`` map is taken as one
    channel).  Cost is O(D K log K).
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != w.shape:
        raise ShapeMismatch(f"features {x.shape} and filter {w.shape} differ")
    if x.ndim == 2:
        x, w = x[None], w[None]
    return ifft2(correlate_spectra(fft2(x), fft2(w)))


def shift_map(x, di, dj):
    """Return the (di, dj)-step shift ``x_k`` with element k moved to the origin."""
    return np.roll(x, shift=(-di, -dj), axis=(-2, -1))


def rfft2(t):
    """Half-spectrum forward transform of real maps (last axis halved)."""
    return scipy.fft.rfft2(np.asarray(t, dtype=float), axes=(-2, -1), workers=_workers())


def irfft2(s, shape):
    return scipy.fft.irfft2(s, s=shape, axes=(-2, -1), workers=_workers())
