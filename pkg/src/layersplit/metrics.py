"""Quality metrics: mean SSIM and gradient consistency (GC).

Both assume intensities on the unit scale ([0, 1]). GC is the squared
Frobenius distance between the two gradient fields divided by the element
count; lower is better. ``gc_8bit`` rescales it to the 0..255 range
(factor 255^2) for comparison with numbers quoted on that scale.
"""
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .gradient import FORWARD_DIFFERENCE, gradient
from .tensor import DimensionError, default_axes, default_channel_axis

K1, K2 = 0.01, 0.03
WINDOW = 11
SIGMA = 1.5
DATA_RANGE = 1.0

# ITU-R BT.601 luma weights
LUMA = np.array([0.299, 0.587, 0.114])


def gaussian_window(size=WINDOW, sigma=SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def gc(reference, recovered, axes=None, filt=FORWARD_DIFFERENCE, channel_axis="auto"):
    ref, rec = _check_pair(reference, recovered)
    if channel_axis == "auto":
        channel_axis = default_channel_axis(ref.ndim)
    axes = default_axes(ref.ndim) if axes is None else tuple(axes)
    d = gradient(ref - rec, axes, filt, channel_axis=channel_axis).responses.ravel()
    return float(np.dot(d, d)) / ref.size


def _ssim_global(a, b, data_range):
    c1, c2 = (K1 * data_range) ** 2, (K2 * data_range) ** 2
    ma, mb = a.mean(), b.mean()
    va = ((a - ma) ** 2).mean()
    vb = ((b - mb) ** 2).mean()
    cov = ((a - ma) * (b - mb)).mean()
    return float(((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma ** 2 + mb ** 2 + c1) * (va + vb + c2)))


def ssim_map(a, b, data_range=DATA_RANGE, window=WINDOW, sigma=SIGMA):
    """SSIM index at every fully contained window position of 2-D ``a``, ``b``."""
    a, b = _check_pair(a, b)
    w = gaussian_window(window, sigma)
    half = window // 2
    crop = (slice(half, a.shape[0] - half), slice(half, a.shape[1] - half))

    def filt(x):
        y = correlate1d(x, w, axis=0, mode="constant")
        return correlate1d(y, w, axis=1, mode="constant")[crop]

    c1, c2 = (K1 * data_range) ** 2, (K2 * data_range) ** 2
    ma, mb = filt(a), filt(b)
    va = filt(a * a) - ma * ma
    vb = filt(b * b) - mb * mb
    cov = filt(a * b) - ma * mb
    return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))


def ssim2d(a, b, data_range=DATA_RANGE):
    """Mean SSIM of two 2-D arrays; ``(value, used_global_fallback)``."""
    a, b = _check_pair(a, b)
    if a.ndim != 2:
        raise DimensionError("ssim2d expects 2-D arrays")
    if min(a.shape) < WINDOW:
        return _ssim_global(a, b, data_range), True
    return float(ssim_map(a, b, data_range).mean()), False


def to_luma(t, channel_axis):
    if channel_axis is None:
        return t
    t = np.moveaxis(t, channel_axis, -1)
    if t.shape[-1] == 1:
        return t[..., 0]
    if t.shape[-1] != 3:
        raise DimensionError(f"luma needs 1 or 3 channels, got {t.shape[-1]}")
    return t @ LUMA


def _planes(t):
    """Split a channel-free tensor (H, W[, T]) into 2-D frames."""
    if t.ndim == 2:
        return [t]
    return [t[..., k] for k in range(t.shape[-1])]


def _mean_ssim(a, b, data_range):
    vals, fallback = [], False
    for pa, pb in zip(_planes(a), _planes(b)):
        v, fb = ssim2d(pa, pb, data_range)
        vals.append(v)
        fallback |= fb
    return float(np.mean(vals)), fallback


def ssim(reference, recovered, data_range=DATA_RANGE, channel_axis="auto"):
    """Mean SSIM on luma (gray inputs are used directly; video frames averaged)."""
    return ssim_details(reference, recovered, data_range, channel_axis)[0]


def ssim_details(reference, recovered, data_range=DATA_RANGE, channel_axis="auto"):
    """``(luma_ssim, per_channel_ssim_list_or_None, used_global_fallback)``."""
    ref, rec = _check_pair(reference, recovered)
    if channel_axis == "auto":
        channel_axis = default_channel_axis(ref.ndim)
    luma, fallback = _mean_ssim(to_luma(ref, channel_axis), to_luma(rec, channel_axis), data_range)
    per_channel = None
    if channel_axis is not None and ref.shape[channel_axis] > 1:
        per_channel = []
        for k in range(ref.shape[channel_axis]):
            v, fb = _mean_ssim(np.take(ref, k, channel_axis), np.take(rec, k, channel_axis), data_range)
            per_channel.append(v)
            fallback |= fb
    return luma, per_channel, fallback


@dataclass
class MetricsReport:
    ssim: float
    gc: float
    gc_8bit: float
    ssim_channel_mean: float = None
    per_channel: list = None
    ssim_global_fallback: bool = False
    value_scale: str = "unit-range"
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return d


def evaluate(reference, recovered, axes=None, channel_axis="auto", **extra):
    ref, rec = _check_pair(reference, recovered)
    if channel_axis == "auto":
        channel_axis = default_channel_axis(ref.ndim)
    s, per_channel, fallback = ssim_details(ref, rec, channel_axis=channel_axis)
    g = gc(ref, rec, axes, channel_axis=channel_axis)
    return MetricsReport(
        ssim=s,
        gc=g,
        gc_8bit=g * 255.0 ** 2,
        ssim_channel_mean=float(np.mean(per_channel)) if per_channel else None,
        per_channel=per_channel,
        ssim_global_fallback=fallback,
        extra=extra,
    )
