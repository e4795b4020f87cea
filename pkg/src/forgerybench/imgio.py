"""Raster decoding, full-range BT.601 color conversion and block partitioning.

Planes are plain 2-D ``float64`` numpy arrays indexed ``[row, col]`` with
samples in ``[0, 255]``; ``YCbCrImage`` bundles three of them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptStream, UnsupportedFormat

ImagePlane = np.ndarray

SUPPORTED_FORMATS = ("JPEG", "PNG", "BMP", "TIFF")
_GRAY_MODES = {"1", "L", "LA", "I", "I;16", "I;16B", "I;16L", "F"}


def _frozen(plane) -> np.ndarray:
    arr = np.array(plane, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class YCbCrImage:
    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    def __post_init__(self):
        planes = [_frozen(p) for p in (self.y, self.cb, self.cr)]
        if not (planes[0].shape == planes[1].shape == planes[2].shape):
            raise ValueError("y, cb and cr planes must share one shape")
        for name, p in zip(("y", "cb", "cr"), planes):
            object.__setattr__(self, name, p)

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @classmethod
    def from_gray(cls, gray) -> "YCbCrImage":
        y = np.asarray(gray, dtype=np.float64)
        neutral = np.full(y.shape, 128.0)
        return cls(y, neutral, neutral)


def rgb_to_ycbcr(rgb, clamp: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """JFIF (full-range BT.601) forward transform of an ``(..., 3)`` array."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    if clamp:
        y, cb, cr = (np.clip(c, 0.0, 255.0) for c in (y, cb, cr))
    return y, cb, cr


def ycbcr_to_rgb(y, cb, cr) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr` (no clamping); returns ``(..., 3)``."""
    y = np.asarray(y, dtype=np.float64)
    cb = np.asarray(cb, dtype=np.float64) - 128.0
    cr = np.asarray(cr, dtype=np.float64) - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


def image_from_rgb(rgb) -> YCbCrImage:
    rgb = np.asarray(rgb)
    if rgb.ndim == 2:
        return YCbCrImage.from_gray(rgb)
    return YCbCrImage(*rgb_to_ycbcr(rgb[..., :3]))


def decode_image(data: bytes | os.PathLike | str) -> YCbCrImage:
    """Decode raw bytes (or a path) without the filesystem existence check."""
    import io

    src = io.BytesIO(data) if isinstance(data, (bytes, bytearray)) else data
    try:
        im = Image.open(src)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(str(exc)) from exc
    with im:
        if im.format not in SUPPORTED_FORMATS:
            raise UnsupportedFormat(f"unsupported container {im.format!r}")
        try:
            im.load()
        except (OSError, SyntaxError, ValueError) as exc:
            raise CorruptStream(str(exc)) from exc
        if im.mode in _GRAY_MODES:
            gray = np.asarray(im.convert("L"), dtype=np.float64)
            return YCbCrImage.from_gray(gray)
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    return image_from_rgb(rgb)


def load_image(path: str | os.PathLike) -> YCbCrImage:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    return decode_image(path.read_bytes())


def to_grayscale(img: YCbCrImage) -> np.ndarray:
    return img.y


def partition_blocks(plane, block: int, stride: int | None = None) -> list[np.ndarray]:
    """Row-major, top-left anchored blocks; partial edge blocks are dropped."""
    if block < 2:
        raise ValueError("block must be >= 2")
    stride = block if stride is None else stride
    if stride < 1:
        raise ValueError("stride must be >= 1")
    plane = np.asarray(plane)
    h, w = plane.shape
    if h < block or w < block:
        return []
    return [
        plane[r:r + block, c:c + block]
        for r in range(0, h - block + 1, stride)
        for c in range(0, w - block + 1, stride)
    ]


def block_stack(plane, block: int) -> np.ndarray:
    """Non-overlapping blocks as an ``(n, block, block)`` array, row-major order.

    Same enumeration as ``partition_blocks(plane, block, block)`` but without a
    Python-level loop.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    nby, nbx = h // block, w // block
    if nby == 0 or nbx == 0:
        return np.empty((0, block, block))
    tiles = plane[: nby * block, : nbx * block].reshape(nby, block, nbx, block)
    return tiles.transpose(0, 2, 1, 3).reshape(nby * nbx, block, block)
