"""Frequency-domain solves of the two layer subproblems.

Both subproblems reduce to ``(F^T F + s I) x = b`` with ``F`` the stacked
circular gradient. Circular filtering is diagonalized by the DFT over the
gradient axes, so ``x = ifft(fft(b) / (sum_j |H_j|^2 + s))``. Axes that
carry no gradient (color channels) are batched: the operator is the
identity along them.
"""
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .gradient import FORWARD_DIFFERENCE, GradientField, gradient_adjoint
from .tensor import DimensionError


def fft_workers():
    """Thread count for FFTs, capped by ``LAYERSPLIT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LAYERSPLIT_THREADS", "1")))
    except ValueError:
        return 1


@lru_cache(maxsize=64)
def _symbol_power(dims, axes, filt):
    """sum_j |H_j|^2 on the full DFT grid of the gradient axes.

    Returned with size-1 extents on non-gradient axes so it broadcasts.
    """
    shape = [1] * len(dims)
    for a in axes:
        shape[a] = dims[a]
    power = np.zeros(shape)
    for a in axes:
        h = np.fft.fft(filt.kernel(dims[a]))
        bshape = [1] * len(dims)
        bshape[a] = dims[a]
        power = power + (h.real ** 2 + h.imag ** 2).reshape(bshape)
    power.setflags(write=False)
    return power


@dataclass(frozen=True)
class SpectralDenominator:
    """``sum_j |H_j(w)|^2 + shift`` over the frequency grid of ``axes``."""

    values: np.ndarray  # full grid, broadcastable to dims
    shift: float
    axes: tuple
    dims: tuple

    @property
    def half(self):
        """Values on the real-FFT grid (last gradient axis halved)."""
        last = max(self.axes)
        idx = [slice(None)] * self.values.ndim
        idx[last] = slice(0, self.dims[last] // 2 + 1)
        return self.values[tuple(idx)]

    def apply_inverse(self, b):
        """Solve ``(F^T F + shift I) x = b`` for a real tensor ``b``."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape != self.dims:
            raise DimensionError(f"right-hand side {b.shape} does not match {self.dims}")
        axes = tuple(sorted(self.axes))
        workers = fft_workers()
        spec = sfft.rfftn(b, axes=axes, workers=workers)
        spec /= self.half
        shape = [self.dims[a] for a in axes]
        return sfft.irfftn(spec, s=shape, axes=axes, workers=workers)


def build_denominator(dims, axes, filt=FORWARD_DIFFERENCE, shift=1.0):
    if not shift > 0:
        raise ValueError(f"shift must be positive, got {shift}")
    dims = tuple(int(d) for d in dims)
    axes = tuple(int(a) for a in axes)
    values = _symbol_power(dims, axes, filt) + shift
    return SpectralDenominator(values, float(shift), axes, dims)


def _check_state(state, c):
    for name in ("L_I", "L_A", "X"):
        arr = getattr(state, name)
        if arr.shape != c.shape:
            raise DimensionError(f"{name} has shape {arr.shape}, expected {c.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} contains NaN or Inf")
    if not state.mu > 0:
        raise ValueError("mu must be positive")


def la_rhs(state, c, axes, filt=FORWARD_DIFFERENCE):
    """``m + F^T (v + y2 / mu)`` with ``m = C + X / mu - L_I``."""
    mu = state.mu
    m = c + state.X / mu - state.L_I
    return m + gradient_adjoint(GradientField(state.v + state.y2 / mu, axes), filt)


def li_rhs(state, c, axes, filt=FORWARD_DIFFERENCE):
    """``w + F^T (u + y1 / mu)`` with ``w = C + X / mu - L_A``."""
    mu = state.mu
    w = c + state.X / mu - state.L_A
    return w + gradient_adjoint(GradientField(state.u + state.y1 / mu, axes), filt)


def solve_la(state, c, axes, filt=FORWARD_DIFFERENCE, denominator=None):
    """Artifact-layer update: shift ``2 / mu + 1``."""
    _check_state(state, c)
    if denominator is None:
        denominator = build_denominator(c.shape, axes, filt, 2.0 / state.mu + 1.0)
    return denominator.apply_inverse(la_rhs(state, c, axes, filt))


def solve_li(state, c, axes, filt=FORWARD_DIFFERENCE, denominator=None):
    """Intrinsic-layer update: shift 1. Expects ``state.L_A`` already updated."""
    _check_state(state, c)
    if denominator is None:
        denominator = build_denominator(c.shape, axes, filt, 1.0)
    return denominator.apply_inverse(li_rhs(state, c, axes, filt))
