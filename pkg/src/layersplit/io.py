"""Image and frame-directory I/O.

Images decode to unit-range float arrays: gray ``(H, W)``, color
``(H, W, 3)`` in RGB order. A video is a directory of numbered PNG frames
and loads as ``(H, W, C, T)``.

Signed layers are written as 16-bit PNG with a 0.5 offset:
``stored = round((value + 0.5) * 65535)``, so values in [-0.5, 0.5] are
representable.
"""
from pathlib import Path

import cv2
import numpy as np

from .metrics import to_luma

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".pgm", ".ppm", ".pnm", ".bmp", ".tif", ".tiff"}
SIGNED_OFFSET = 0.5


def _to_rgb(arr):
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[..., :3]
        arr = arr[..., ::-1]  # BGR -> RGB
    return arr


def read_image(path, gray=False):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot decode image {path}")
    scale = 65535.0 if raw.dtype == np.uint16 else 255.0
    if raw.dtype not in (np.uint8, np.uint16):
        raise OSError(f"unsupported pixel type {raw.dtype} in {path}")
    img = _to_rgb(raw).astype(np.float64) / scale
    if gray and img.ndim == 3:
        img = to_luma(img, 2)
    return np.ascontiguousarray(img)


def _write(path, arr):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if arr.ndim == 3:
        arr = np.ascontiguousarray(arr[..., ::-1])
    if not cv2.imwrite(str(path), arr):
        raise OSError(f"cannot write {path}")


def _squeeze_channels(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3 and x.shape[2] == 1:
        x = x[..., 0]
    if x.ndim not in (2, 3):
        raise ValueError(f"cannot write a tensor of shape {x.shape} as one image")
    return x


def write_image8(path, x):
    x = _squeeze_channels(x)
    _write(path, np.round(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8))


def write_image16(path, x):
    x = _squeeze_channels(x)
    _write(path, np.round(np.clip(x, 0.0, 1.0) * 65535.0).astype(np.uint16))


def quantize16(x):
    """Values as stored by :func:`write_image16` (clipped, 16-bit grid)."""
    return np.round(np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0) * 65535.0) / 65535.0


def write_signed16(path, x):
    write_image16(path, np.asarray(x) + SIGNED_OFFSET)


def read_signed16(path):
    return read_image(path) - SIGNED_OFFSET


def frame_paths(directory):
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise OSError(f"no image frames in {directory}")
    return paths


def read_video(directory, gray=False):
    frames = [read_image(p, gray=gray) for p in frame_paths(directory)]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise OSError(f"frames in {directory} have differing shapes {sorted(shapes)}")
    frames = [f[..., None] if f.ndim == 2 else f for f in frames]
    return np.stack(frames, axis=-1)


def write_video(directory, video, writer=write_image8):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(video.shape[-1]):
        p = directory / f"frame_{k:04d}.png"
        writer(p, video[..., k])
        paths.append(p)
    return paths


def read_input(path, gray=False):
    """Image file or frame directory."""
    path = Path(path)
    if path.is_dir():
        return read_video(path, gray=gray)
    return read_image(path, gray=gray)
