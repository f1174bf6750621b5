"""Dense n-order tensors (n in {2, 3, 4}) and their reshaping algebra.

Tensors are plain ``float64`` NumPy arrays in C (row-major) order. That
single ordering defines every reshaping below:

* ``vec(t)`` is ``t.ravel()`` in C order, which is also ``vec`` of the
  mode-0 unfolding, so solver vectors never need a permutation.
* ``unfold(t, k)`` moves axis ``k`` to the front and flattens the remaining
  axes in their original (C) order, giving a ``D_k x prod(D_i, i != k)``
  matrix whose rows are mode-k slices and whose columns are mode-k fibers.

Axes are 0-based. Layout conventions: gray image ``(H, W)``, color image
``(H, W, C)``, video ``(H, W, C, T)``.
"""
import numpy as np

MAX_ORDER = 4


class DimensionError(ValueError):
    """Raised when tensor shapes are incompatible."""


def as_tensor(data, copy=False):
    """Validate and return ``data`` as a float64 tensor of order 2 to 4."""
    if copy:
        t = np.array(data, dtype=np.float64, order="C")
    else:
        t = np.ascontiguousarray(data, dtype=np.float64)
    if not 2 <= t.ndim <= MAX_ORDER:
        raise DimensionError(f"tensor order must be 2..{MAX_ORDER}, got {t.ndim}")
    if 0 in t.shape:
        raise DimensionError(f"empty extent in shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains NaN or Inf")
    return t


def default_channel_axis(ndim):
    """Channel axis for the layout conventions above (None for gray images)."""
    return None if ndim == 2 else 2


def default_axes(ndim):
    """Gradient axes: spatial for images, spatial plus temporal for video."""
    if ndim == 4:
        return (0, 1, 3)
    return (0, 1)


def _check_axis(t, k):
    if not 0 <= k < t.ndim:
        raise IndexError(f"axis {k} out of range for order-{t.ndim} tensor")


def unfold(t, k):
    """Mode-k unfolding: a ``(D_k, prod_{i != k} D_i)`` matrix."""
    t = np.asarray(t)
    _check_axis(t, k)
    return np.moveaxis(t, k, 0).reshape(t.shape[k], -1)


def fold(m, k, shape):
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    shape = tuple(shape)
    if not 0 <= k < len(shape):
        raise IndexError(f"axis {k} out of range for order-{len(shape)} tensor")
    moved = (shape[k],) + shape[:k] + shape[k + 1:]
    m = np.asarray(m)
    if m.size != int(np.prod(shape)):
        raise DimensionError(f"matrix of size {m.size} cannot fold into {shape}")
    return np.moveaxis(m.reshape(moved), 0, k)


def vec(t):
    return np.asarray(t).ravel()


def reshape_vec(v, shape):
    return np.asarray(v).reshape(shape)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")


def frobenius_norm(t):
    t = np.asarray(t, dtype=np.float64).ravel()
    return float(np.sqrt(np.dot(t, t)))


def l1_norm(t):
    return float(np.abs(np.asarray(t, dtype=np.float64)).sum())


def inner(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def hadamard(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    _same_shape(a, b)
    return a * b
