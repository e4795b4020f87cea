"""Seeded procedural colour textures: gradients, band-limited noise, shapes."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

MIN_SIDE = 64


def _gradient(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    angle = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    t = np.cos(angle) * xx / w + np.sin(angle) * yy / h
    t = (t - t.min()) / max(float(np.ptp(t)), 1e-12)
    c0, c1 = rng.uniform(20, 235, size=(2, 3))
    return c0 + t[..., None] * (c1 - c0)


def _noise_layers(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    out = np.zeros((h, w, 3))
    for _ in range(int(rng.integers(1, 4))):
        field = gaussian_filter(rng.standard_normal((h, w)), sigma=rng.uniform(1.0, 8.0))
        field /= max(float(field.std()), 1e-12)
        tint = rng.uniform(0.3, 1.0, size=3)
        out += rng.uniform(5, 35) * field[..., None] * tint
    return out


def _shapes(rng: np.random.Generator, img: np.ndarray) -> np.ndarray:
    h, w, _ = img.shape
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(int(rng.integers(2, 7))):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        rx, ry = rng.uniform(w / 16, w / 3), rng.uniform(h / 16, h / 3)
        if rng.random() < 0.5:
            mask = (np.abs(xx - cx) <= rx) & (np.abs(yy - cy) <= ry)
        else:
            mask = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        alpha = rng.uniform(0.5, 1.0)
        color = rng.uniform(0, 255, size=3)
        img[mask] = (1 - alpha) * img[mask] + alpha * color
    return img


def procedural_texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """``(height, width, 3)`` uint8 image drawn from ``rng``."""
    if height < MIN_SIDE or width < MIN_SIDE:
        raise ValueError(f"texture size must be at least {MIN_SIDE}x{MIN_SIDE}")
    img = _gradient(rng, height, width)
    img = _shapes(rng, img)
    img += _noise_layers(rng, height, width)
    img += rng.normal(0.0, rng.uniform(1.5, 4.0), size=img.shape)  # sensor-like grain
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)
