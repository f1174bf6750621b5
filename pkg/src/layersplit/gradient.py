"""Generalized tensor gradient under circular boundary conditions.

A derivative response filters every fiber along one axis with a short
derivative filter, wrapping around at the ends. The gradient stacks the
responses for the selected axes into an array of shape ``(J, *dims)``;
``field.responses.ravel()`` is the stacked vector the solver works with.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .tensor import DimensionError, default_channel_axis


@dataclass(frozen=True)
class DerivativeFilter:
    """Correlation taps: ``r[i] = sum_k taps[k] * x[(i + k - anchor) mod D]``."""

    taps: tuple = (-1.0, 1.0)
    anchor: int = 0

    def __post_init__(self):
        taps = tuple(float(t) for t in self.taps)
        if len(taps) < 2:
            raise ValueError("a derivative filter needs at least two taps")
        if abs(sum(taps)) > 1e-12:
            raise ValueError(f"derivative taps must sum to zero, got {sum(taps)}")
        object.__setattr__(self, "taps", taps)

    def __len__(self):
        return len(self.taps)

    def kernel(self, length):
        """Length-``length`` convolution kernel ``h`` with ``r = h (*) x``."""
        h = np.zeros(length)
        for k, t in enumerate(self.taps):
            h[(self.anchor - k) % length] += t
        return h


FORWARD_DIFFERENCE = DerivativeFilter((-1.0, 1.0), 0)
CENTERED_DIFFERENCE = DerivativeFilter((-0.5, 0.0, 0.5), 1)


@dataclass
class GradientField:
    responses: np.ndarray  # shape (J, *dims)
    axes: tuple

    def __post_init__(self):
        if self.responses.shape[0] != len(self.axes):
            raise DimensionError("one response per gradient axis required")

    @property
    def dims(self):
        return self.responses.shape[1:]

    def __len__(self):
        return len(self.axes)

    def __getitem__(self, j):
        return self.responses[j]


def _validate_axis(shape, axis, filt, channel_axis):
    if not 0 <= axis < len(shape):
        raise IndexError(f"axis {axis} out of range for order-{len(shape)} tensor")
    if channel_axis is not None and axis == channel_axis:
        raise ValueError(f"axis {axis} is the channel axis; no derivative across channels")
    if shape[axis] < len(filt):
        raise DimensionError(
            f"extent {shape[axis]} along axis {axis} is shorter than the filter ({len(filt)} taps)"
        )


def _as_3d(a, axis):
    """View ``a`` as (outer, D_axis, inner); ``a`` must be C-contiguous."""
    outer = int(np.prod(a.shape[:axis], dtype=np.int64))
    inner = int(np.prod(a.shape[axis + 1:], dtype=np.int64))
    return a.reshape(outer, a.shape[axis], inner)


_UNSET = object()


def _resolve_channel(ndim, channel_axis):
    return default_channel_axis(ndim) if channel_axis is _UNSET else channel_axis


def derivative_response(t, axis, filt=FORWARD_DIFFERENCE, channel_axis=_UNSET, out=None):
    """Circular derivative response of ``t`` along ``axis``."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    _validate_axis(t.shape, axis, filt, _resolve_channel(t.ndim, channel_axis))
    if out is None:
        out = np.empty_like(t)
    taps = np.asarray(filt.taps, dtype=np.float64)
    kernels.circ_filter(_as_3d(t, axis), taps, filt.anchor, False, _as_3d(out, axis))
    return out


def gradient(t, axes, filt=FORWARD_DIFFERENCE, channel_axis=_UNSET, out=None):
    """Stack of derivative responses along ``axes``."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    axes = tuple(int(a) for a in axes)
    if not axes:
        raise ValueError("at least one gradient axis is required")
    if len(set(axes)) != len(axes):
        raise ValueError(f"gradient axes must be distinct, got {axes}")
    ch = _resolve_channel(t.ndim, channel_axis)
    for a in axes:
        _validate_axis(t.shape, a, filt, ch)
    if out is None:
        out = np.empty((len(axes),) + t.shape)
    for j, a in enumerate(axes):
        derivative_response(t, a, filt, channel_axis=ch, out=out[j])
    return GradientField(out, axes)


def gradient_adjoint(field, filt=FORWARD_DIFFERENCE, out=None):
    """Apply the transpose of :func:`gradient` to a stacked field."""
    resp = np.ascontiguousarray(field.responses, dtype=np.float64)
    dims = resp.shape[1:]
    if out is None:
        out = np.empty(dims)
    taps = np.asarray(filt.taps, dtype=np.float64)
    for j, a in enumerate(field.axes):
        if dims[a] < len(filt):
            raise DimensionError(f"extent {dims[a]} along axis {a} shorter than the filter")
        kernels.circ_filter(
            _as_3d(resp[j], a), taps, filt.anchor, True, _as_3d(out, a), accumulate=j > 0
        )
    return out


def observation_gradient(c, axes, filt=FORWARD_DIFFERENCE, channel_axis=_UNSET):
    """Gradient of the observed tensor; computed once per solve."""
    return gradient(c, axes, filt, channel_axis)
