"""Block-DCT compression simulator (8x8 blocks, baseline JPEG-style tables).

Produces the blocking degradation used throughout the tests without an
external codec: level shift, orthonormal 8x8 DCT-II, quantize with the
quality-scaled luminance / chrominance tables, dequantize, inverse DCT and
round to 8-bit levels. Color inputs go through full-resolution YCbCr (no
chroma subsampling).
"""
import numpy as np
from scipy.fft import dctn, idctn

BLOCK = 8

LUMINANCE_TABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)

CHROMINANCE_TABLE = np.array([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
], dtype=np.float64)

# JFIF full-range RGB <-> YCbCr
_RGB2YCC = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
_YCC2RGB = np.linalg.inv(_RGB2YCC)


def quality_table(quality, base=LUMINANCE_TABLE):
    """Scale a base table with the usual IJG quality law."""
    if not 1 <= int(quality) <= 100 or int(quality) != quality:
        raise ValueError(f"quality must be an integer in [1, 100], got {quality}")
    q = int(quality)
    scale = 5000.0 / q if q < 50 else 200.0 - 2.0 * q
    return np.clip(np.floor((base * scale + 50.0) / 100.0), 1.0, 255.0)


def _pad(plane):
    h, w = plane.shape
    ph, pw = (-h) % BLOCK, (-w) % BLOCK
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _blocks(plane):
    h, w = plane.shape
    return plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)


def _unblocks(b):
    nh, nw = b.shape[:2]
    return b.swapaxes(1, 2).reshape(nh * BLOCK, nw * BLOCK)


def block_dct(plane):
    """Orthonormal 8x8 DCT of every block; shape ``(H/8, W/8, 8, 8)``."""
    return dctn(_blocks(np.asarray(plane, dtype=np.float64)), axes=(2, 3), norm="ortho")


def block_idct(coeffs):
    return _unblocks(idctn(coeffs, axes=(2, 3), norm="ortho"))


def _code_plane(plane, table):
    """Quantize one 0..255 plane (level-shifted internally)."""
    h, w = plane.shape
    padded = _pad(plane) - 128.0
    coeffs = block_dct(padded)
    coeffs = np.round(coeffs / table) * table
    return block_idct(coeffs)[:h, :w] + 128.0


def synthesize_blocking(clean, quality, grid_offset=(0, 0)):
    """Block-DCT compress a unit-range image or video.

    Accepts ``(H, W)``, ``(H, W, C)`` with C in {1, 3}, or ``(H, W, C, T)``
    (frames coded independently). ``grid_offset`` shifts the 8x8 block grid
    by ``(dy, dx)`` pixels (circularly), which gives independent blocking
    patterns for otherwise identical frames.
    """
    table_y = quality_table(quality, LUMINANCE_TABLE)
    table_c = quality_table(quality, CHROMINANCE_TABLE)
    x = np.asarray(clean, dtype=np.float64)
    if x.ndim == 4:
        return np.stack(
            [synthesize_blocking(x[..., k], quality, grid_offset) for k in range(x.shape[-1])],
            axis=-1,
        )
    if x.ndim not in (2, 3):
        raise ValueError(f"expected an order 2..4 tensor, got order {x.ndim}")
    dy, dx = grid_offset
    x = np.roll(x * 255.0, (-dy, -dx), axis=(0, 1))
    if x.ndim == 2:
        out = _code_plane(x, table_y)
    elif x.shape[2] == 1:
        out = _code_plane(x[..., 0], table_y)[..., None]
    elif x.shape[2] == 3:
        ycc = x @ _RGB2YCC.T
        ycc[..., 1:] += 128.0
        coded = np.stack(
            [_code_plane(ycc[..., 0], table_y),
             _code_plane(ycc[..., 1], table_c),
             _code_plane(ycc[..., 2], table_c)],
            axis=-1,
        )
        coded[..., 1:] -= 128.0
        out = coded @ _YCC2RGB.T
    else:
        raise ValueError(f"expected 1 or 3 channels, got {x.shape[2]}")
    out = np.clip(np.round(out), 0.0, 255.0) / 255.0
    return np.roll(out, (dy, dx), axis=(0, 1))


def blocking_ratio(img, axes=(0, 1), block=BLOCK, offset=(0, 0)):
    """Mean squared step across block boundaries over that at interior positions.

    Differences are taken between neighbours ``i`` and ``i + 1`` along each
    spatial axis; a boundary step is one with ``(i + 1 - offset) % block == 0``.
    Values well above 1 indicate visible blocking.
    """
    x = np.asarray(img, dtype=np.float64)
    num = den = 0.0
    nb = ni = 0
    for a, off in zip(axes, offset):
        d = np.diff(x, axis=a)
        idx = np.arange(d.shape[a])
        boundary = ((idx + 1 - off) % block) == 0
        db = np.compress(boundary, d, axis=a)
        di = np.compress(~boundary, d, axis=a)
        num += float((db ** 2).sum())
        nb += db.size
        den += float((di ** 2).sum())
        ni += di.size
    if nb == 0 or ni == 0:
        raise ValueError("image too small to contain block boundaries")
    interior = den / ni
    return (num / nb) / interior if interior > 0 else np.inf
